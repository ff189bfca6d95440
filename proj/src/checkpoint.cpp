#include "prsynth/optimizer.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace prsynth {

namespace {

using Json = nlohmann::ordered_json;

// JSON has no infinities; they travel as strings
Json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double num(const Json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw std::runtime_error("checkpoint: bad number '" + s + "'");
}

Json vec(const VecX& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

Json vec(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

VecX to_vecx(const Json& j) {
  VecX v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = num(j[i]);
  return v;
}

std::vector<double> to_vector(const Json& j) {
  std::vector<double> v;
  for (const Json& x : j) v.push_back(num(x));
  return v;
}

Json objectives_json(const ObjectiveVector& o) {
  return Json{{"f1", num(o.f1)},
              {"f2", num(o.f2)},
              {"f3", num(o.f3)},
              {"f4", num(o.f4)},
              {"f5", num(o.f5)},
              {"f6", num(o.f6)},
              {"position_error", num(o.position_error)},
              {"condition", num(o.condition)},
              {"stress_utilization", num(o.stress_utilization)},
              {"max_power", num(o.max_power)},
              {"max_velocity_term", num(o.max_velocity_term)}};
}

ObjectiveVector objectives_from(const Json& j) {
  ObjectiveVector o;
  o.f1 = num(j.at("f1"));
  o.f2 = num(j.at("f2"));
  o.f3 = num(j.at("f3"));
  o.f4 = num(j.at("f4"));
  o.f5 = num(j.at("f5"));
  o.f6 = num(j.at("f6"));
  o.position_error = num(j.at("position_error"));
  o.condition = num(j.at("condition"));
  o.stress_utilization = num(j.at("stress_utilization"));
  o.max_power = num(j.at("max_power"));
  o.max_velocity_term = num(j.at("max_velocity_term"));
  return o;
}

}  // namespace

std::string checkpoint_to_text(const Checkpoint& cp) {
  Json j;
  j["format"] = "prsynth-checkpoint";
  j["version"] = cp.version;
  j["family"] = family_info(cp.family).key;
  j["seed"] = std::to_string(cp.seed);
  std::ostringstream rng;
  rng << cp.swarm.rng;
  j["rng"] = rng.str();
  j["generation"] = cp.swarm.generation;
  Json parts = Json::array();
  for (const Particle& p : cp.swarm.particles)
    parts.push_back({{"position", vec(p.position)},
                     {"velocity", vec(p.velocity)},
                     {"best_position", vec(p.best_position)},
                     {"best_fitness", vec(p.best_fitness)},
                     {"fitness", vec(p.fitness)}});
  j["particles"] = std::move(parts);
  Json arch = Json::array();
  for (const ArchiveRecord& r : cp.archive)
    arch.push_back({{"params", vec(r.point.params)},
                    {"modes", std::string(to_string(r.point.modes))},
                    {"unit", vec(r.unit)},
                    {"objectives", objectives_json(r.objectives)},
                    {"soft", {r.soft.f1, r.soft.f2, r.soft.f3, r.soft.f5}},
                    {"tube_diameter", num(r.tube_diameter)},
                    {"tube_wall", num(r.tube_wall)},
                    {"generation", r.generation},
                    {"particle", r.particle}});
  j["archive"] = std::move(arch);
  j["stats"] = {{"failures", cp.stats.failures},
                {"evaluations", cp.stats.evaluations},
                {"feasible", cp.stats.feasible},
                {"soft_violating", cp.stats.soft_violating}};
  return j.dump(1);
}

Checkpoint checkpoint_from_text(const std::string& text) {
  try {
    const Json j = Json::parse(text);
    if (j.at("format") != "prsynth-checkpoint") throw std::runtime_error("not a checkpoint file");
    Checkpoint cp;
    cp.version = j.at("version").get<int>();
    if (cp.version != 1) throw std::runtime_error("unsupported checkpoint version");
    cp.family = parse_family(j.at("family").get<std::string>());
    cp.seed = std::stoull(j.at("seed").get<std::string>());
    std::istringstream rng(j.at("rng").get<std::string>());
    rng >> cp.swarm.rng;
    if (!rng) throw std::runtime_error("bad generator state");
    cp.swarm.generation = j.at("generation").get<int>();
    for (const Json& p : j.at("particles")) {
      Particle part;
      part.position = to_vecx(p.at("position"));
      part.velocity = to_vecx(p.at("velocity"));
      part.best_position = to_vecx(p.at("best_position"));
      part.best_fitness = to_vector(p.at("best_fitness"));
      part.fitness = to_vector(p.at("fitness"));
      cp.swarm.particles.push_back(std::move(part));
    }
    for (const Json& a : j.at("archive")) {
      ArchiveRecord r;
      r.point.family = cp.family;
      r.point.params = to_vecx(a.at("params"));
      r.point.modes = parse_mode_pattern(a.at("modes").get<std::string>());
      r.unit = to_vecx(a.at("unit"));
      r.objectives = objectives_from(a.at("objectives"));
      const Json& soft = a.at("soft");
      r.soft = {soft.at(0).get<bool>(), soft.at(1).get<bool>(), soft.at(2).get<bool>(),
                soft.at(3).get<bool>()};
      r.tube_diameter = num(a.at("tube_diameter"));
      r.tube_wall = num(a.at("tube_wall"));
      r.generation = a.at("generation").get<int>();
      r.particle = a.at("particle").get<int>();
      cp.archive.push_back(std::move(r));
    }
    const Json& st = j.at("stats");
    cp.stats.failures = st.at("failures").get<std::array<long, kStageCount + 1>>();
    cp.stats.evaluations = st.at("evaluations").get<long>();
    cp.stats.feasible = st.at("feasible").get<long>();
    cp.stats.soft_violating = st.at("soft_violating").get<long>();
    return cp;
  } catch (const Json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: ") + e.what());
  }
}

void write_checkpoint(const Checkpoint& cp, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out << checkpoint_to_text(cp);
    if (!out) throw std::runtime_error("write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot move '" + tmp + "' to '" + path + "'");
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_text(ss.str());
}

}  // namespace prsynth

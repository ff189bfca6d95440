#include "prsynth/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace prsynth {

namespace {

using Json = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string param_column(const ParamSpec& spec) {
  switch (spec.kind) {
    case ParamKind::Scale: return spec.name;
    case ParamKind::Length:
    case ParamKind::AbsoluteLength: return spec.name + "_m";
    case ParamKind::Angle: return spec.name + "_rad";
  }
  return spec.name;
}

const std::array<const char*, 11> kObjectiveColumns = {
    "f1_Nm", "f2_rad", "f3_m", "f4_kg", "f5_Nm", "f6_rad_s", "position_error_m", "condition",
    "stress_utilization", "max_power_W", "max_velocity_term_Nm"};

std::array<double, 11> objective_values(const ObjectiveVector& o) {
  return {o.f1, o.f2, o.f3, o.f4, o.f5, o.f6, o.position_error, o.condition,
          o.stress_utilization, o.max_power, o.max_velocity_term};
}

double objective_value(const ObjectiveVector& o, int index) {
  return objective_values(o)[static_cast<std::size_t>(index)];
}

double oriented_value(const ObjectiveVector& o, int index) {
  return o.minimization_form()[static_cast<std::size_t>(index)];
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Json vec3(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

}  // namespace

// ---------------------------------------------------------------- archive table

std::vector<std::string> archive_csv_header(FamilyId family) {
  std::vector<std::string> h = {"family", "modes", "generation", "particle"};
  for (const ParamSpec& s : param_schema(family)) h.push_back(param_column(s));
  for (const char* c : kObjectiveColumns) h.emplace_back(c);
  for (const char* c : {"tube_diameter_m", "tube_wall_m", "soft_f1", "soft_f2", "soft_f3", "soft_f5"})
    h.emplace_back(c);
  return h;
}

std::string archive_csv(FamilyId family, const std::vector<ArchiveRecord>& records) {
  std::ostringstream out;
  const auto header = archive_csv_header(family);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const ArchiveRecord& r : records) {
    out << family_info(family).key << "," << to_string(r.point.modes) << "," << r.generation << ","
        << r.particle;
    for (Eigen::Index i = 0; i < r.point.params.size(); ++i) out << "," << fmt(r.point.params[i]);
    for (double v : objective_values(r.objectives)) out << "," << fmt(v);
    out << "," << fmt(r.tube_diameter) << "," << fmt(r.tube_wall) << "," << r.soft.f1 << ","
        << r.soft.f2 << "," << r.soft.f3 << "," << r.soft.f5 << "\n";
  }
  return out.str();
}

std::vector<ArchiveRow> read_archive_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("archive table is empty");
  const std::vector<std::string> header = split_csv(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  std::vector<ArchiveRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv(line);
    if (cells.size() != header.size())
      throw std::runtime_error("archive line " + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size()) + " cells");
    auto cell = [&](const std::string& name) -> const std::string& {
      const auto it = col.find(name);
      if (it == col.end()) throw std::runtime_error("archive table lacks column '" + name + "'");
      return cells[it->second];
    };
    auto number = [&](const std::string& name) {
      const std::string& s = cell(name);
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end == s.c_str() || *end != '\0')
        throw std::runtime_error("archive line " + std::to_string(line_no) + ", column " + name +
                                 ": not a number");
      return v;
    };
    ArchiveRow row;
    row.family = parse_family(cell("family"));
    row.point.family = row.family;
    row.point.modes = parse_mode_pattern(cell("modes"));
    const auto& schema = param_schema(row.family);
    row.point.params.resize(static_cast<Eigen::Index>(schema.size()));
    for (std::size_t i = 0; i < schema.size(); ++i)
      row.point.params[static_cast<Eigen::Index>(i)] = number(param_column(schema[i]));
    std::array<double, 11> v{};
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = number(kObjectiveColumns[i]);
    row.objectives = {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10]};
    row.tube_diameter = number("tube_diameter_m");
    row.tube_wall = number("tube_wall_m");
    row.soft = {number("soft_f1") != 0.0, number("soft_f2") != 0.0, number("soft_f3") != 0.0,
                number("soft_f5") != 0.0};
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------- fronts

std::vector<std::array<int, 2>> front_pairs() { return {{2, 3}, {3, 4}, {0, 4}, {4, 5}}; }

std::string objective_key(int index) { return "f" + std::to_string(index + 1); }

std::string objective_label(int index) {
  static const std::array<const char*, 6> labels = {
      "f1 lowest detectable torque [N m]", "f2 smallest passive angle [rad]",
      "f3 clamping distance [m]",          "f4 effective mass [kg]",
      "f5 drive torque [N m]",             "f6 drive speed [rad/s]"};
  return labels.at(static_cast<std::size_t>(index));
}

std::vector<FrontPoint> front_projection(const std::vector<ArchiveRecord>& records,
                                         std::array<int, 2> pair) {
  auto key = [&](std::size_t i) {
    return std::vector<double>{oriented_value(records[i].objectives, pair[0]),
                               oriented_value(records[i].objectives, pair[1])};
  };
  auto on_front = [&](std::size_t i, bool only_passing) {
    for (std::size_t j = 0; j < records.size(); ++j) {
      if (j == i || (only_passing && records[j].soft.any())) continue;
      if (dominance(key(j), key(i)) == Dominance::ADominates) return false;
    }
    return true;
  };
  std::vector<FrontPoint> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const bool violator = records[i].soft.any();
    if (!on_front(i, !violator)) continue;
    out.push_back({i, objective_value(records[i].objectives, pair[0]),
                   objective_value(records[i].objectives, pair[1]), violator});
  }
  return out;
}

std::string front_csv(const std::vector<FrontPoint>& front, std::array<int, 2> pair) {
  std::ostringstream out;
  out << "record," << kObjectiveColumns[static_cast<std::size_t>(pair[0])] << ","
      << kObjectiveColumns[static_cast<std::size_t>(pair[1])] << ",translucent\n";
  for (const FrontPoint& p : front)
    out << p.record << "," << fmt(p.x) << "," << fmt(p.y) << "," << p.translucent << "\n";
  return out.str();
}

std::string front_svg(const std::vector<FrontPoint>& front, std::array<int, 2> pair,
                      const std::string& title) {
  constexpr double W = 480, H = 360, L = 70, R = 20, T = 36, B = 56;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const FrontPoint& p : front) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  if (front.empty()) x0 = y0 = 0.0, x1 = y1 = 1.0;
  auto pad = [](double& lo, double& hi) {
    const double span = hi - lo;
    const double m = span > 0 ? 0.05 * span : std::max(1e-9, 0.05 * std::abs(lo) + 1e-9);
    lo -= m;
    hi += m;
  };
  pad(x0, x1);
  pad(y0, y1);
  auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">" << title
    << "</text>\n";
  s << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
    << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    s << "<text x=\"" << sx(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
      << fmt_short(xv) << "</text>\n";
    s << "<text x=\"" << L - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">"
      << fmt_short(yv) << "</text>\n";
  }
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 14 << "\" text-anchor=\"middle\">"
    << objective_label(pair[0]) << "</text>\n";
  s << "<text transform=\"translate(16," << (T + H - B) / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << objective_label(pair[1]) << "</text>\n";
  for (const FrontPoint& p : front)
    s << "<circle cx=\"" << sx(p.x) << "\" cy=\"" << sy(p.y) << "\" r=\"4\" fill=\"#1f5fa8\""
      << " fill-opacity=\"" << (p.translucent ? "0.25" : "1") << "\" data-record=\"" << p.record
      << "\"/>\n";
  s << "</svg>\n";
  return s.str();
}

// ---------------------------------------------------------------- radar

std::vector<RadarAxis> radar_axes(const ObjectiveVector& v, const std::vector<ObjectiveVector>& reference) {
  std::vector<RadarAxis> axes;
  for (int k = 0; k < 6; ++k) {
    RadarAxis a;
    a.key = objective_key(k);
    a.value = objective_value(v, k);
    // oriented for minimization; an empty reference set normalizes against v alone
    const ObjectiveVector& first = reference.empty() ? v : reference.front();
    double lo = oriented_value(first, k), hi = lo;
    for (const ObjectiveVector& r : reference) {
      lo = std::min(lo, oriented_value(r, k));
      hi = std::max(hi, oriented_value(r, k));
    }
    const double sign = oriented_value(v, k) == a.value ? 1.0 : -1.0;
    a.best = sign * lo;
    a.worst = sign * hi;
    a.normalized = hi > lo ? std::clamp((hi - oriented_value(v, k)) / (hi - lo), 0.0, 1.0) : 1.0;
    axes.push_back(a);
  }
  return axes;
}

std::string radar_json(const std::vector<RadarAxis>& axes) {
  Json j = Json::array();
  for (const RadarAxis& a : axes)
    j.push_back({{"objective", a.key},
                 {"value", a.value},
                 {"normalized", a.normalized},
                 {"best", a.best},
                 {"worst", a.worst}});
  return Json{{"axes", j}}.dump(1) + "\n";
}

// ---------------------------------------------------------------- sketch

Sketch make_sketch(const RobotModel& model, const KinematicState& state,
                   const GeometryOptions& geometry) {
  Sketch sk;
  for (int i = 0; i < model.leg_count(); ++i) {
    const LegFrames f = leg_frames(model, i, state.q);
    const std::vector<Vec3> centers = joint_centers(model, i, f);
    const LegChain& chain = model.legs[static_cast<std::size_t>(i)];
    for (std::size_t g = 0; g < centers.size(); ++g) {
      SketchJoint jt;
      jt.leg = i;
      jt.group = static_cast<int>(g);
      jt.type = model.groups[g];
      jt.center = centers[g];
      for (int j = 0; j < model.coords_per_leg; ++j)
        if (chain.group[static_cast<std::size_t>(j)] == static_cast<int>(g))
          jt.axes.push_back(f.axis[static_cast<std::size_t>(j)]);
      sk.joints.push_back(std::move(jt));
    }
    sk.platform_points.push_back(centers.back());
  }
  sk.capsules = build_collision_set(model, state, nullptr, geometry).bodies;
  return sk;
}

std::string sketch_json(const RobotModel& model, const Sketch& sketch) {
  Json joints = Json::array();
  for (const SketchJoint& jt : sketch.joints) {
    Json axes = Json::array();
    for (const Vec3& a : jt.axes) axes.push_back(vec3(a));
    joints.push_back({{"leg", jt.leg},
                      {"group", jt.group},
                      {"type", std::string(1, joint_letter(jt.type))},
                      {"center_m", vec3(jt.center)},
                      {"axes", axes}});
  }
  Json caps = Json::array();
  for (const Capsule& c : sketch.capsules) {
    const char* kind = c.owner.kind == BodyKind::Segment
                           ? "segment"
                           : (c.owner.kind == BodyKind::Platform ? "platform-rim" : "base-rim");
    caps.push_back({{"kind", kind},
                    {"leg", c.owner.leg},
                    {"index", c.owner.segment},
                    {"a_m", vec3(c.a)},
                    {"b_m", vec3(c.b)},
                    {"radius_m", c.radius}});
  }
  Json platform = Json::array();
  for (const Vec3& p : sketch.platform_points) platform.push_back(vec3(p));
  return Json{{"family", family_info(model.family).name},
              {"legs", model.leg_count()},
              {"joints_per_leg", model.groups.size()},
              {"joints", joints},
              {"capsules", caps},
              {"platform_points_m", platform}}
             .dump(1) +
         "\n";
}

std::string sketch_svg(const Sketch& sketch) {
  constexpr double P = 360, M = 20;
  Eigen::AlignedBox3d box;
  for (const Capsule& c : sketch.capsules) {
    box.extend(c.a);
    box.extend(c.b);
  }
  for (const SketchJoint& j : sketch.joints) box.extend(j.center);
  if (box.isEmpty()) box.extend(Vec3::Zero());
  const double span = std::max(box.sizes().maxCoeff(), 1e-6);
  const double scale = (P - 2 * M) / span;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * P << "\" height=\"" << P + 20
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // panel 0: x right, z up; panel 1: x right, y up
  for (int panel = 0; panel < 2; ++panel) {
    const int vert = panel == 0 ? 2 : 1;
    const double ox = panel * P;
    auto px = [&](const Vec3& p) { return ox + M + (p.x() - box.min().x()) * scale; };
    auto py = [&](const Vec3& p) { return 20 + P - M - (p[vert] - box.min()[vert]) * scale; };
    s << "<text x=\"" << ox + M << "\" y=\"16\">" << (panel == 0 ? "front view (x-z)" : "top view (x-y)")
      << "</text>\n";
    for (const Capsule& c : sketch.capsules) {
      const char* color = c.owner.kind == BodyKind::Segment ? "#555555" : "#b07020";
      s << "<line x1=\"" << px(c.a) << "\" y1=\"" << py(c.a) << "\" x2=\"" << px(c.b) << "\" y2=\""
        << py(c.b) << "\" stroke=\"" << color << "\" stroke-opacity=\"0.6\" stroke-linecap=\"round\""
        << " stroke-width=\"" << std::max(1.0, 2.0 * c.radius * scale) << "\"/>\n";
    }
    for (const SketchJoint& j : sketch.joints) {
      const char* color = j.group == 0 ? "#c0302a" : "#1f5fa8";
      s << "<circle cx=\"" << px(j.center) << "\" cy=\"" << py(j.center) << "\" r=\"3\" fill=\""
        << color << "\"/>\n";
    }
  }
  s << "</svg>\n";
  return s.str();
}

// ---------------------------------------------------------------- run summaries

std::string run_report_json(const Scenario& scenario, const SynthesisConfig& config,
                            const SynthesisResult& result) {
  Json failures = Json::object();
  for (int s = 1; s < kStageCount; ++s)
    failures[std::string(stage_name(static_cast<Stage>(s)))] =
        result.stats.failures[static_cast<std::size_t>(s)];
  Json order = Json::array();
  for (Stage s : config.eval.stage_order) order.push_back(std::string(stage_name(s)));

  const auto& recs = result.archive.records();
  long passing = 0;
  double best_f3 = 0.0, power_lo = std::numeric_limits<double>::infinity(), power_hi = 0.0;
  for (const ArchiveRecord& r : recs) {
    if (!r.soft.any()) ++passing;
    best_f3 = std::max(best_f3, r.objectives.f3);
    power_lo = std::min(power_lo, r.objectives.max_power);
    power_hi = std::max(power_hi, r.objectives.max_power);
  }
  Json directional = Json::object();
  if (!recs.empty()) {
    directional["largest_f3_m"] = best_f3;
    directional["max_actuator_power_W"] = {power_lo, power_hi};
  }
  Json j{{"family", family_info(config.family).name},
         {"scenario", scenario.name},
         {"seed", std::to_string(config.seed)},
         {"particles", config.pso.particles},
         {"generations", config.pso.generations},
         {"generations_done", result.generations_done},
         {"trajectory_stride", config.eval.trajectory_stride},
         {"stage_order", order},
         {"evaluations", result.stats.evaluations},
         {"feasible_evaluations", result.stats.feasible},
         {"soft_violating_evaluations", result.stats.soft_violating},
         {"stage_failures", failures},
         {"archive_size", recs.size()},
         {"archive_passing_soft_gates", passing},
         {"directional", directional}};
  return j.dump(1) + "\n";
}

std::string eval_report_json(const DesignPoint& point, const EvalResult& r) {
  Json params = Json::object();
  const auto& schema = param_schema(point.family);
  for (std::size_t i = 0; i < schema.size(); ++i)
    params[param_column(schema[i])] = point.params[static_cast<Eigen::Index>(i)];
  Json stages = Json::array();
  for (const StageLog& l : r.log)
    stages.push_back({{"stage", std::string(stage_name(l.stage))},
                      {"value", std::isfinite(l.value) ? Json(l.value) : Json("inf")},
                      {"passed", l.passed}});
  Json j{{"family", family_info(point.family).name},
         {"modes", std::string(to_string(point.modes))},
         {"params", params},
         {"feasible", r.feasible},
         {"stages", stages}};
  if (!r.feasible) {
    j["failed_stage"] = std::string(stage_name(r.failed_stage));
    j["severity"] = r.severity;
    j["message"] = r.message;
  } else {
    Json obj = Json::object();
    const auto v = objective_values(r.objectives);
    for (std::size_t i = 0; i < v.size(); ++i) obj[kObjectiveColumns[i]] = v[i];
    j["objectives"] = obj;
    j["soft_gates_violated"] = {{"f1", r.soft.f1}, {"f2", r.soft.f2}, {"f3", r.soft.f3}, {"f5", r.soft.f5}};
    j["tube_diameter_m"] = r.tube_diameter;
    j["tube_wall_m"] = r.tube_wall;
  }
  j["fitness"] = r.fitness;
  return j.dump(1) + "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out << text;
    if (!out) throw std::runtime_error("write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot move '" + tmp + "' to '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace prsynth

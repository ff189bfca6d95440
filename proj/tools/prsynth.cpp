// prsynth command-line driver: synth, eval, validate, export-scenario.
#include "prsynth/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace prsynth;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitNoFeasible = 3;

std::string default_out_dir() {
  const char* env = std::getenv("PRSYNTH_OUT_DIR");
  return env && *env ? env : "prsynth_out";
}

std::vector<Stage> parse_stage_order(const std::string& text) {
  std::vector<Stage> order;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) order.push_back(parse_stage(item));
  validate_stage_order(order);
  return order;
}

DesignPoint read_params_file(const std::string& path) {
  const auto j = nlohmann::json::parse(read_text_file(path));
  DesignPoint p;
  p.family = parse_family(j.at("family").get<std::string>());
  p.modes = parse_mode_pattern(j.value("modes", std::string("uniform-out")));
  const auto& schema = param_schema(p.family);
  p.params.resize(static_cast<Eigen::Index>(schema.size()));
  const auto& params = j.at("params");
  if (params.is_array()) {
    if (params.size() != schema.size())
      throw std::invalid_argument("params: expected " + std::to_string(schema.size()) + " values");
    for (std::size_t i = 0; i < schema.size(); ++i)
      p.params[static_cast<Eigen::Index>(i)] = params[i].get<double>();
  } else {
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (!params.contains(schema[i].name))
        throw std::invalid_argument("params: missing '" + schema[i].name + "'");
      p.params[static_cast<Eigen::Index>(i)] = params[schema[i].name].get<double>();
    }
  }
  return p;
}

void print_stats(std::ostream& os, const StageStats& s) {
  os << "  evaluations " << s.evaluations << ", feasible " << s.feasible << ", soft-violating "
     << s.soft_violating << "\n  aborts:";
  for (int k = 1; k < kStageCount; ++k)
    os << " " << stage_name(static_cast<Stage>(k)) << "=" << s.failures[static_cast<std::size_t>(k)];
  os << "\n";
}

struct SynthArgs {
  std::string scenario;
  std::vector<std::string> families;
  std::uint64_t seed = 0;
  std::string out;
  int generations = 100;
  int particles = 100;
  int jobs = 1;
  int stride = 1;
  int capacity = 200;
  std::string stage_order;
  bool resume = false;
  bool quiet = false;
};

int cmd_synth(const SynthArgs& a) {
  const Scenario scenario = load_scenario(a.scenario);
  std::vector<FamilyId> families;
  for (const std::string& f : a.families) families.push_back(parse_family(f));

  SynthesisConfig base;
  base.seed = a.seed;
  base.jobs = a.jobs;
  base.resume = a.resume;
  base.pso.generations = a.generations;
  base.pso.particles = a.particles;
  base.pso.archive_capacity = a.capacity;
  base.eval.trajectory_stride = a.stride;
  if (!a.stage_order.empty()) base.eval.stage_order = parse_stage_order(a.stage_order);

  for (FamilyId f : families)
    if (family_info(f).platform_dof() != scenario.dof)
      throw std::invalid_argument(family_info(f).name + " does not match the scenario's " +
                                  std::to_string(scenario.dof) + " degrees of freedom");

  bool any_feasible = false;
  for (FamilyId f : families) {
    SynthesisConfig cfg = base;
    cfg.family = f;
    const fs::path dir = fs::path(a.out) / family_info(f).key;
    fs::create_directories(dir);
    cfg.checkpoint_path = (dir / "checkpoint.json").string();
    if (cfg.resume && !fs::exists(cfg.checkpoint_path)) cfg.resume = false;

    std::cerr << family_info(f).name << ": " << cfg.pso.particles << " particles x "
              << cfg.pso.generations << " generations\n";
    const SynthesisResult res = run_synthesis(
        scenario, cfg, [&](int gen, const ParetoArchive& archive, const StageStats& st) {
          if (!a.quiet)
            std::cerr << "  generation " << gen << ": archive " << archive.size() << ", feasible "
                      << st.feasible << "/" << st.evaluations << "\n";
        });

    const auto& recs = res.archive.records();
    write_text_file((dir / "archive.csv").string(), archive_csv(f, recs));
    for (const auto& pair : front_pairs()) {
      const std::string stem = "front_" + objective_key(pair[0]) + "_" + objective_key(pair[1]);
      const auto front = front_projection(recs, pair);
      write_text_file((dir / (stem + ".csv")).string(), front_csv(front, pair));
      write_text_file((dir / (stem + ".svg")).string(),
                      front_svg(front, pair, family_info(f).name + ": " + objective_key(pair[0]) +
                                                 " vs " + objective_key(pair[1])));
    }
    write_text_file((dir / "run_report.json").string(), run_report_json(scenario, cfg, res));

    std::cout << family_info(f).name << ": archive " << recs.size() << " entries ("
              << res.seconds << " s)\n";
    print_stats(std::cout, res.stats);
    if (!recs.empty()) any_feasible = true;
  }
  return any_feasible ? kExitOk : kExitNoFeasible;
}

struct EvalArgs {
  std::string params;
  std::string archive;
  int row = -1;
  std::string scenario;
  std::string out;
  int stride = 1;
};

int cmd_eval(const EvalArgs& a) {
  const Scenario scenario = load_scenario(a.scenario);
  std::vector<ArchiveRow> archive;
  if (!a.archive.empty()) archive = read_archive_csv(read_text_file(a.archive));

  DesignPoint point;
  const ArchiveRow* stored = nullptr;
  if (!a.params.empty()) {
    point = read_params_file(a.params);
  } else if (a.row >= 0) {
    if (static_cast<std::size_t>(a.row) >= archive.size())
      throw std::invalid_argument("--row " + std::to_string(a.row) + " outside the archive (" +
                                  std::to_string(archive.size()) + " rows)");
    stored = &archive[static_cast<std::size_t>(a.row)];
    point = stored->point;
  } else {
    throw std::invalid_argument("give --params, or --archive with --row");
  }

  EvalConfig cfg;
  cfg.trajectory_stride = a.stride;
  const EvalResult res = evaluate_fitness(point, scenario, cfg);
  fs::create_directories(a.out);
  const fs::path dir(a.out);
  write_text_file((dir / "eval_report.json").string(), eval_report_json(point, res));

  std::cout << family_info(point.family).name << " (" << to_string(point.modes) << "): ";
  if (!res.feasible) {
    std::cout << "rejected at " << stage_name(res.failed_stage) << ": " << res.message << "\n";
    return kExitNoFeasible;
  }
  const ObjectiveVector& o = res.objectives;
  std::cout << "feasible\n  f1 " << o.f1 << " N m, f2 " << rad2deg(o.f2) << " deg, f3 " << o.f3
            << " m, f4 " << o.f4 << " kg, f5 " << o.f5 << " N m, f6 " << o.f6 << " rad/s\n"
            << "  position error " << o.position_error * 1e6 << " um, condition " << o.condition
            << ", stress utilization " << o.stress_utilization << ", tube " << res.tube_diameter * 1e3
            << " x " << res.tube_wall * 1e3 << " mm\n";
  if (res.soft.any())
    std::cout << "  soft gates violated:" << (res.soft.f1 ? " f1" : "") << (res.soft.f2 ? " f2" : "")
              << (res.soft.f3 ? " f3" : "") << (res.soft.f5 ? " f5" : "") << "\n";
  if (stored) {
    const auto a1 = stored->objectives.minimization_form();
    const auto a2 = o.minimization_form();
    double diff = 0.0;
    for (std::size_t i = 0; i < a1.size(); ++i) diff = std::max(diff, std::abs(a1[i] - a2[i]));
    std::cout << "  largest deviation from the archived objectives: " << diff << "\n";
  }

  std::vector<ObjectiveVector> reference;
  for (const ArchiveRow& r : archive) reference.push_back(r.objectives);
  write_text_file((dir / "radar.json").string(), radar_json(radar_axes(o, reference)));

  ModelOptions mo = cfg.model_options(scenario);
  mo.tube_diameter = res.tube_diameter;
  mo.tube_wall = res.tube_wall;
  const RobotModel model = make_model(point.family, point.params, mo);
  const KinematicState state =
      solve_ik(model, scenario.trajectory.x.front(), mode_flags(point.modes, model.leg_count()));
  GeometryOptions geo;
  geo.platform_exclusion_length = scenario.platform_exclusion_length;
  const Sketch sketch = make_sketch(model, state, geo);
  write_text_file((dir / "sketch.json").string(), sketch_json(model, sketch));
  write_text_file((dir / "sketch.svg").string(), sketch_svg(sketch));
  return kExitOk;
}

int cmd_validate(const std::string& path) {
  const Scenario sc = load_scenario(path);
  std::cout << path << ": ok (" << sc.name << ", " << sc.reference_points.size()
            << " reference points, " << sc.trajectory.size() << " trajectory samples)\n";
  return kExitOk;
}

int cmd_export(const std::string& which, const std::string& out) {
  Scenario sc;
  if (which == "benchmark") sc = build_benchmark();
  else if (which == "planar") sc = build_planar_scenario();
  else throw std::invalid_argument("unknown built-in scenario '" + which + "'");
  save_scenario(sc, out);
  std::cout << "wrote " << out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dimensional synthesis of fully parallel robots"};
  app.require_subcommand(1);

  SynthArgs synth;
  synth.out = default_out_dir();
  auto* s = app.add_subcommand("synth", "run the multi-objective synthesis");
  s->add_option("--scenario", synth.scenario, "scenario file")->required()->check(CLI::ExistingFile);
  s->add_option("--family", synth.families, "leg-chain families (RUS, RRRS, RRUU, RURU, RUUR, planar-RRR)")
      ->required();
  s->add_option("--seed", synth.seed, "random seed")->required();
  s->add_option("--out", synth.out, "output directory (default $PRSYNTH_OUT_DIR or prsynth_out)");
  s->add_option("--generations", synth.generations)->check(CLI::PositiveNumber);
  s->add_option("--particles", synth.particles)->check(CLI::PositiveNumber);
  s->add_option("--jobs", synth.jobs, "worker threads")->check(CLI::PositiveNumber);
  s->add_option("--stride", synth.stride, "use every n-th trajectory sample")->check(CLI::PositiveNumber);
  s->add_option("--archive-capacity", synth.capacity)->check(CLI::PositiveNumber);
  s->add_option("--stage-order", synth.stage_order, "comma-separated constraint stages");
  s->add_flag("--resume", synth.resume, "continue from the checkpoint in the output directory");
  s->add_flag("--quiet", synth.quiet, "no per-generation progress");

  EvalArgs ev;
  ev.out = default_out_dir();
  auto* e = app.add_subcommand("eval", "evaluate one design");
  e->add_option("--params", ev.params, "design JSON: family, modes, params")->check(CLI::ExistingFile);
  e->add_option("--archive", ev.archive, "archive CSV: radar reference and source for --row")
      ->check(CLI::ExistingFile);
  e->add_option("--row", ev.row, "archive row to re-evaluate (0-based)");
  e->add_option("--scenario", ev.scenario, "scenario file")->required()->check(CLI::ExistingFile);
  e->add_option("--out", ev.out, "output directory");
  e->add_option("--stride", ev.stride)->check(CLI::PositiveNumber);

  std::string validate_path;
  auto* v = app.add_subcommand("validate", "check a scenario file");
  v->add_option("--scenario", validate_path)->required();

  std::string which = "benchmark", export_path;
  auto* x = app.add_subcommand("export-scenario", "write a built-in scenario to a file");
  x->add_option("--which", which, "benchmark or planar");
  x->add_option("--out", export_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*e) return cmd_eval(ev);
    if (*v) return cmd_validate(validate_path);
    if (*x) return cmd_export(which, export_path);
  } catch (const ScenarioError& err) {
    std::cerr << "scenario error: " << err.what() << "\n";
    return kExitInvalid;
  } catch (const std::invalid_argument& err) {
    std::cerr << "invalid input: " << err.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return kExitOk;
}

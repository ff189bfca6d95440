#include "prsynth/report.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace prsynth;

namespace {

py::dict objectives_dict(const ObjectiveVector& o) {
  py::dict d;
  d["f1"] = o.f1;
  d["f2"] = o.f2;
  d["f3"] = o.f3;
  d["f4"] = o.f4;
  d["f5"] = o.f5;
  d["f6"] = o.f6;
  d["position_error"] = o.position_error;
  d["condition"] = o.condition;
  d["stress_utilization"] = o.stress_utilization;
  d["max_power"] = o.max_power;
  d["max_velocity_term"] = o.max_velocity_term;
  return d;
}

py::dict soft_dict(const SoftGates& s) {
  py::dict d;
  d["f1"] = s.f1;
  d["f2"] = s.f2;
  d["f3"] = s.f3;
  d["f5"] = s.f5;
  return d;
}

py::dict eval_dict(const EvalResult& r) {
  py::dict d;
  d["feasible"] = r.feasible;
  d["failed_stage"] = r.feasible ? py::object(py::none()) : py::cast(std::string(stage_name(r.failed_stage)));
  d["severity"] = r.severity;
  d["fitness"] = r.fitness;
  d["message"] = r.message;
  if (r.feasible) {
    d["objectives"] = objectives_dict(r.objectives);
    d["soft_gates_violated"] = soft_dict(r.soft);
    d["tube_diameter"] = r.tube_diameter;
    d["tube_wall"] = r.tube_wall;
  }
  py::list stages;
  for (const StageLog& l : r.log) stages.append(py::make_tuple(std::string(stage_name(l.stage)), l.value, l.passed));
  d["stages"] = stages;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dimensional synthesis of fully parallel robots";

  m.def("families", [] {
    std::vector<std::string> keys;
    for (FamilyId id : all_families()) keys.push_back(family_info(id).key);
    return keys;
  });
  m.def("param_schema", [](const std::string& family) {
    py::list out;
    for (const ParamSpec& s : param_schema(parse_family(family))) {
      py::dict d;
      d["name"] = s.name;
      d["unit"] = std::string(param_unit(s.kind));
      d["lower"] = s.lower;
      d["upper"] = s.upper;
      out.append(d);
    }
    return out;
  });

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_readonly("dof", &Scenario::dof)
      .def_readonly("reference_points", &Scenario::reference_points)
      .def_property_readonly("trajectory_samples", [](const Scenario& s) { return s.trajectory.size(); })
      .def_property_readonly("trajectory_x", [](const Scenario& s) { return s.trajectory.x; })
      .def("to_text", &scenario_to_text);
  m.def("benchmark", &build_benchmark, "pick-and-place benchmark scenario");
  m.def("planar_scenario", &build_planar_scenario);
  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("save_scenario", &save_scenario, py::arg("scenario"), py::arg("path"));
  m.def("scenario_from_text", &scenario_from_text, py::arg("text"));
  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);
  py::register_exception<KinematicsError>(m, "KinematicsError", PyExc_RuntimeError);

  py::class_<RobotModel>(m, "RobotModel")
      .def_property_readonly("family", [](const RobotModel& r) { return family_info(r.family).key; })
      .def_readonly("dof", &RobotModel::dof)
      .def_readonly("coords_per_leg", &RobotModel::coords_per_leg)
      .def_property_readonly("legs", &RobotModel::leg_count)
      .def_readonly("params", &RobotModel::params);
  m.def(
      "make_model",
      [](const std::string& family, const VecX& params) { return make_model(parse_family(family), params); },
      py::arg("family"), py::arg("params"));
  m.def("schema_midpoint", [](const std::string& family) { return schema_midpoint(parse_family(family)); });

  py::class_<KinematicState>(m, "KinematicState")
      .def_readonly("x", &KinematicState::x)
      .def_readonly("q", &KinematicState::q);
  m.def(
      "solve_ik",
      [](const RobotModel& model, const VecX& x, const std::string& modes) {
        return solve_ik(model, x, mode_flags(parse_mode_pattern(modes), model.leg_count()));
      },
      py::arg("model"), py::arg("x"), py::arg("modes") = "uniform-out");
  m.def(
      "solve_ik_from",
      [](const RobotModel& model, const VecX& x, const KinematicState& seed) {
        return solve_ik(model, x, seed);
      },
      py::arg("model"), py::arg("x"), py::arg("seed"));
  m.def("jacobians", [](const RobotModel& model, const KinematicState& state) {
    const JacobianSet j = jacobians(model, state);
    py::dict d;
    d["J_qx"] = j.J_qx;
    d["J_xqa"] = j.J_xqa;
    d["condition"] = j.condition;
    return d;
  });

  m.def(
      "evaluate",
      [](const std::string& family, const VecX& params, const std::string& modes,
         const Scenario& scenario, int stride) {
        EvalConfig cfg;
        cfg.trajectory_stride = stride;
        DesignPoint p{parse_family(family), params, parse_mode_pattern(modes)};
        EvalResult r;
        {
          py::gil_scoped_release release;
          r = evaluate_fitness(p, scenario, cfg);
        }
        return eval_dict(r);
      },
      py::arg("family"), py::arg("params"), py::arg("modes"), py::arg("scenario"),
      py::arg("stride") = 1);

  m.def(
      "synthesize",
      [](const Scenario& scenario, const std::string& family, int particles, int generations,
         std::uint64_t seed, int jobs, int stride) {
        SynthesisConfig cfg;
        cfg.family = parse_family(family);
        cfg.pso.particles = particles;
        cfg.pso.generations = generations;
        cfg.seed = seed;
        cfg.jobs = jobs;
        cfg.eval.trajectory_stride = stride;
        SynthesisResult res{ParetoArchive(), {}, 0, 0.0};
        {
          py::gil_scoped_release release;
          res = run_synthesis(scenario, cfg);
        }
        py::list archive;
        for (const ArchiveRecord& r : res.archive.records()) {
          py::dict d;
          d["params"] = r.point.params;
          d["modes"] = std::string(to_string(r.point.modes));
          d["objectives"] = objectives_dict(r.objectives);
          d["soft_gates_violated"] = soft_dict(r.soft);
          d["tube_diameter"] = r.tube_diameter;
          d["tube_wall"] = r.tube_wall;
          archive.append(d);
        }
        py::dict out;
        out["archive"] = archive;
        out["evaluations"] = res.stats.evaluations;
        out["feasible_evaluations"] = res.stats.feasible;
        out["archive_csv"] = archive_csv(cfg.family, res.archive.records());
        return out;
      },
      py::arg("scenario"), py::arg("family"), py::arg("particles") = 20, py::arg("generations") = 15,
      py::arg("seed") = 1, py::arg("jobs") = 1, py::arg("stride") = 1);

  m.def(
      "dominance",
      [](const std::vector<double>& a, const std::vector<double>& b) -> std::string {
        switch (dominance(a, b)) {
          case Dominance::ADominates: return "a";
          case Dominance::BDominates: return "b";
          case Dominance::Incomparable: break;
        }
        return "incomparable";
      },
      "Pareto dominance of two minimization vectors: 'a', 'b' or 'incomparable'");
  m.def("hypervolume_2d", &hypervolume_2d, py::arg("points"), py::arg("reference"));
  m.def("segment_distance",
        [](const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
          return segment_distance(p0, p1, q0, q1);
        });
}

#include "support/failures.hpp"

#include <doctest.h>

using namespace prsynth;
using namespace prsynth::test;

namespace {

ArchiveRecord record_with(double f4, double f5) {
  ArchiveRecord r;
  r.objectives.f4 = f4;
  r.objectives.f5 = f5;
  return r;
}

const ObjectiveSubset kPair{3, 4};  // f4, f5

std::vector<std::array<double, 2>> pair_points(const ParetoArchive& a) {
  std::vector<std::array<double, 2>> out;
  for (const ArchiveRecord& r : a.records()) out.push_back({r.objectives.f4, r.objectives.f5});
  return out;
}

// Two shifted spheres as f4 and f5 over the unit cube.
std::vector<EvalResult> spheres(const std::vector<VecX>& positions) {
  std::vector<EvalResult> out;
  for (const VecX& x : positions) {
    EvalResult r;
    r.feasible = true;
    r.objectives.f4 = (x.array() - 0.25).square().sum();
    r.objectives.f5 = (x.array() - 0.75).square().sum();
    r.fitness = {r.objectives.f4, r.objectives.f5};
    out.push_back(r);
  }
  return out;
}

ArchiveRecord sphere_record(const VecX& unit, const EvalResult& r, int generation, int particle) {
  ArchiveRecord rec;
  rec.unit = unit;
  rec.objectives = r.objectives;
  rec.generation = generation;
  rec.particle = particle;
  return rec;
}

}  // namespace

TEST_CASE("penalty ladder bands are disjoint and ordered") {
  for (int depth = 1; depth <= 9; ++depth) {
    const double lo = PenaltyLadder::lower(depth), hi = PenaltyLadder::upper(depth);
    CHECK(lo < hi);
    CHECK(PenaltyLadder::penalty(depth, 1e-12) > lo);
    CHECK(PenaltyLadder::penalty(depth, 1.0) == hi);
    CHECK(PenaltyLadder::penalty(depth, 0.2) < PenaltyLadder::penalty(depth, 0.3));
    if (depth > 1) CHECK(PenaltyLadder::upper(depth) < PenaltyLadder::lower(depth - 1));
  }
  CHECK(PenaltyLadder::upper(9) < PenaltyLadder::lower(8));
  for (double v : {-1e6, -3.0, 0.0, 7.5, 1e6}) {
    CHECK(squash_objective(v) > 0.0);
    CHECK(squash_objective(v) < 10.0);
  }
  // atan saturates in double precision; the bound to the ladder still holds
  for (double v : {-1e300, 1e300, std::numeric_limits<double>::infinity()})
    CHECK(squash_objective(v) < PenaltyLadder::penalty(9, 1e-12));
  CHECK(squash_objective(1.0) < squash_objective(2.0));
}

TEST_CASE("stage order validation") {
  CHECK_NOTHROW(validate_stage_order(default_stage_order()));
  auto order = default_stage_order();
  std::swap(order[3], order[4]);  // installation before self-collision
  CHECK_NOTHROW(validate_stage_order(order));
  order = default_stage_order();
  std::swap(order[5], order[6]);  // condition before the trajectory
  CHECK_THROWS_AS(validate_stage_order(order), std::invalid_argument);
  order = default_stage_order();
  order.pop_back();
  CHECK_THROWS_AS(validate_stage_order(order), std::invalid_argument);
  order = default_stage_order();
  order[2] = Stage::Plausibility;
  CHECK_THROWS_AS(validate_stage_order(order), std::invalid_argument);
  for (Stage s : default_stage_order()) CHECK(parse_stage(stage_name(s)) == s);
  CHECK_THROWS_AS(parse_stage("warp-drive"), std::invalid_argument);
}

TEST_CASE("Pareto dominance") {
  CHECK(dominance(std::vector<double>{1, 1}, std::vector<double>{2, 2}) == Dominance::ADominates);
  CHECK(dominance(std::vector<double>{2, 2}, std::vector<double>{1, 1}) == Dominance::BDominates);
  CHECK(dominance(std::vector<double>{1, 2}, std::vector<double>{2, 1}) == Dominance::Incomparable);
  CHECK(dominance(std::vector<double>{1, 2}, std::vector<double>{1, 2}) == Dominance::Incomparable);

  Rng rng(17);
  auto draw = [&] {
    // coarse values so that ties occur
    std::vector<double> v(3);
    for (double& x : v) x = std::floor(rng.uniform(0, 4));
    return v;
  };
  for (int k = 0; k < 10000; ++k) {
    const auto a = draw(), b = draw(), c = draw();
    const Dominance ab = dominance(a, b);
    CHECK((ab == Dominance::ADominates) == (dominance(b, a) == Dominance::BDominates));
    if (ab == Dominance::ADominates && dominance(b, c) == Dominance::ADominates)
      CHECK(dominance(a, c) == Dominance::ADominates);
    CHECK(dominance(a, a) == Dominance::Incomparable);
  }

  // maximized objectives are negated before comparison
  ObjectiveVector x, y;
  x.f1 = 10;
  y.f1 = 5;
  CHECK(dominance(x, y, {0}) == Dominance::ADominates);
}

TEST_CASE("archive keeps only non-dominated records") {
  ParetoArchive a(100, kPair);
  CHECK(a.insert(record_with(1, 3)));
  CHECK(a.insert(record_with(3, 1)));
  CHECK_FALSE(a.insert(record_with(2, 4)));  // dominated
  CHECK_FALSE(a.insert(record_with(1, 3)));  // duplicate
  CHECK(a.size() == 2);
  CHECK(a.insert(record_with(0.5, 0.5)));    // dominates both
  CHECK(a.size() == 1);

  Rng rng(9);
  ParetoArchive b(1000, kPair);
  for (int k = 0; k < 2000; ++k) {
    const auto before = b.records().size();
    const ArchiveRecord r = record_with(rng.uniform(0, 1), rng.uniform(0, 1));
    bool dominated = false;
    for (const ArchiveRecord& m : b.records())
      if (dominance(m.objectives, r.objectives, kPair) == Dominance::ADominates) dominated = true;
    const bool entered = b.insert(r);
    CHECK(entered == !dominated);
    if (!entered) CHECK(b.records().size() == before);
  }
  CHECK(b.is_nondominated());
}

TEST_CASE("archive overflow removes the most crowded record") {
  ParetoArchive a(4, kPair);
  for (double x : {0.0, 1.0, 1.1, 3.0, 4.0}) a.insert(record_with(x, 4.0 - x));
  REQUIRE(a.size() == 4);
  for (const ArchiveRecord& r : a.records()) CHECK(r.objectives.f4 != 1.0);
  // extremes are never pruned
  CHECK(a.records().front().objectives.f4 == 0.0);
}

TEST_CASE("crowding distance and hypervolume on small sets") {
  const auto cd = crowding_distance({{0, 4}, {1, 2}, {2, 1}, {4, 0}});
  CHECK(std::isinf(cd[0]));
  CHECK(std::isinf(cd[3]));
  CHECK(cd[1] == doctest::Approx(2.0 / 4 + 3.0 / 4));
  CHECK(cd[2] == doctest::Approx(3.0 / 4 + 2.0 / 4));
  CHECK(hypervolume_2d({{1, 3}, {2, 2}, {3, 1}}, {4, 4}) == doctest::Approx(6.0));
  CHECK(hypervolume_2d({{1, 3}, {2, 2}, {2.5, 2.5}, {5, 0}}, {4, 4}) == doctest::Approx(5.0));
}

TEST_CASE("latin hypercube initialization") {
  const Swarm s = init_swarm(10, 4, 3);
  for (int d = 0; d < 4; ++d) {
    std::vector<int> strata(10, 0);
    for (const Particle& p : s.particles) ++strata[static_cast<std::size_t>(p.position[d] * 10)];
    for (int n : strata) CHECK(n == 1);
  }
  for (const Particle& p : s.particles) CHECK(p.velocity.isZero());
}

TEST_CASE("swarm without inertia or attraction stays put") {
  Swarm s = init_swarm(8, 3, 5);
  ParetoArchive archive(50, kPair);
  s.generation = 1;
  std::vector<VecX> start;
  for (const Particle& p : s.particles) start.push_back(p.position);
  absorb_evaluations(s, archive, spheres(start), sphere_record);
  PsoSettings st;
  st.inertia = st.cognitive = st.social = 0.0;
  for (int g = 0; g < 5; ++g) pso_step(s, archive, st, spheres, sphere_record);
  for (std::size_t i = 0; i < start.size(); ++i) CHECK(s.particles[i].position == start[i]);
  CHECK(s.generation == 6);
}

TEST_CASE("swarm on two shifted spheres improves the front") {
  Swarm s = init_swarm(20, 3, 11);
  ParetoArchive archive(50, kPair);
  s.generation = 1;
  std::vector<VecX> start;
  for (const Particle& p : s.particles) start.push_back(p.position);
  absorb_evaluations(s, archive, spheres(start), sphere_record);
  PsoSettings st;
  const std::array<double, 2> ref{3.0, 3.0};
  double hv = hypervolume_2d(pair_points(archive), ref);
  const double first = hv;
  for (int g = 0; g < 30; ++g) {
    pso_step(s, archive, st, spheres, sphere_record);
    const double next = hypervolume_2d(pair_points(archive), ref);
    CHECK(next >= hv);
    hv = next;
    CHECK(archive.is_nondominated());
  }
  CHECK(hv > first);
  // optimum front: segment between the two centres, hypervolume near 9 - 0.5
  CHECK(hv > 8.0);
}

TEST_CASE("tube design optimization") {
  const Material mat;
  DesignSettings st;
  SUBCASE("negligible loads give the smallest section") {
    InternalLoads loads;
    loads.records.push_back({0, 0, 1e-6, 1e-6, 0.0});
    const DesignResult r = design_optimization(loads, mat, 9.81, 0.5, st, 0.02, 0.1, 0.1);
    CHECK(r.feasible);
    CHECK(r.diameter == doctest::Approx(std::max(st.min_diameter, st.min_wall / st.max_wall_ratio)));
    CHECK(r.wall == st.min_wall);
  }
  SUBCASE("heavier loads never give a lighter tube") {
    Rng rng(12);
    for (int k = 0; k < 20; ++k) {
      InternalLoads loads;
      for (int i = 0; i < 6; ++i)
        loads.records.push_back({i, 1, rng.uniform(0, 60), rng.uniform(-300, 300), rng.uniform(0, 0.3)});
      InternalLoads doubled = loads;
      for (auto& rec : doubled.records) {
        rec.transmitted_bending *= 2.0;
        rec.axial *= 2.0;
      }
      const DesignResult a = design_optimization(loads, mat, 9.81, 0.5, st, 0.02, 0.05, 0.05);
      const DesignResult b = design_optimization(doubled, mat, 9.81, 0.5, st, 0.02, 0.05, 0.05);
      if (a.feasible) CHECK(a.utilization < 0.5);
      if (b.feasible) {
        CHECK(b.utilization < 0.5);
        REQUIRE(a.feasible);
        CHECK(b.diameter >= a.diameter);
        CHECK(TubeSection{b.diameter, b.wall}.linear_density(mat) >=
              TubeSection{a.diameter, a.wall}.linear_density(mat));
      }
      CHECK(a.max_diameter <= 0.02 + 2 * 0.025 + 1e-15);
    }
  }
  SUBCASE("tight margins cap the diameter") {
    InternalLoads loads;
    loads.records.push_back({0, 0, 200.0, 0.0, 0.0});
    const DesignResult r = design_optimization(loads, mat, 9.81, 0.5, st, 0.02, 0.004, 0.1);
    CHECK(r.max_diameter == doctest::Approx(0.024));
    CHECK(r.diameter <= r.max_diameter);
  }
}

TEST_CASE("heavier payload never gives a lighter designed tube") {
  Rng rng(14);
  const Scenario sc = build_benchmark();
  int compared = 0;
  for (int k = 0; k < 20; ++k) {
    const DesignPoint base = feasible_rus();
    const VecX params = perturbed_params(rng, base, 0.02);
    std::array<double, 2> mass{}, diameter{};
    bool ok = true;
    for (int j = 0; j < 2; ++j) {
      ModelOptions o;
      o.platform_extra_mass = j == 0 ? 2.0 : 4.0;
      const RobotModel model = make_model(base.family, params, o);
      const InertiaModel inertia = InertiaModel::from_model(model);
      Trajectory traj;
      traj.dt = sc.trajectory.dt * 10;
      std::vector<KinematicState> states;
      try {
        for (std::size_t i = 0; i < sc.trajectory.size(); i += 10) {
          traj.x.push_back(sc.trajectory.x[i]);
          traj.xd.push_back(sc.trajectory.xd[i]);
          traj.xdd.push_back(sc.trajectory.xdd[i]);
          states.push_back(states.empty() ? solve_ik(model, traj.x.back(), mode_flags(base.modes, 6))
                                          : solve_ik(model, traj.x.back(), states.back()));
        }
      } catch (const KinematicsError&) {
        ok = false;
        break;
      }
      const InternalLoads loads = internal_load_estimate(model, inertia, traj, states);
      const DesignResult r = design_optimization(loads, Material{}, 9.81, 0.5, DesignSettings{}, 0.02,
                                                 0.05, 0.05);
      if (!r.feasible) {
        ok = false;
        break;
      }
      CHECK(r.utilization < 0.5);
      mass[static_cast<std::size_t>(j)] = TubeSection{r.diameter, r.wall}.linear_density(Material{});
      diameter[static_cast<std::size_t>(j)] = r.diameter;
    }
    if (!ok) continue;
    CHECK(diameter[1] >= diameter[0]);
    CHECK(mass[1] >= mass[0]);
    ++compared;
  }
  CHECK(compared >= 10);
}

TEST_CASE("encode and decode the search vector") {
  const DesignPoint d = feasible_rus();
  const VecX u = encode(d);
  CHECK(u.size() == search_dimension(d.family));
  const DesignPoint back = decode(d.family, u);
  CHECK((back.params - d.params).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(back.modes == d.modes);
  CHECK((u.array() >= 0.0).all());
  CHECK((u.array() <= 1.0).all());
}

TEST_CASE("each engineered failure stops at its stage inside its band") {
  const auto order = default_stage_order();
  for (int depth = 1; depth <= 9; ++depth) {
    const Stage stage = order[static_cast<std::size_t>(depth - 1)];
    for (int variant = 0; variant < 2; ++variant) {
      const FailureCase c = failure_case(stage, variant);
      const EvalResult r = evaluate_fitness(c.point, c.scenario, c.config);
      INFO(stage_name(stage), " variant ", variant, ": ", r.message);
      CHECK_FALSE(r.feasible);
      CHECK(r.failed_stage == stage);
      for (double f : r.fitness) {
        CHECK(f > PenaltyLadder::lower(depth));
        CHECK(f <= PenaltyLadder::upper(depth));
      }
      for (int deeper = depth + 1; deeper <= 9; ++deeper)
        CHECK(r.trace.entries(order[static_cast<std::size_t>(deeper - 1)]) == 0);
      CHECK(r.trace.entries(Stage::Objectives) == 0);
      if (stage == Stage::Plausibility) CHECK(r.trace.ik_solves == 0);
    }
  }
  for (int variant = 0; variant < 2; ++variant) {
    const FailureCase c = base_case(variant);
    const EvalResult r = evaluate_fitness(c.point, c.scenario, c.config);
    CHECK(r.feasible);
    for (double f : r.fitness) CHECK(f < PenaltyLadder::lower(9));
  }
}

TEST_CASE("mismatched family and scenario are rejected") {
  EvalConfig cfg;
  CHECK_THROWS_AS(evaluate_fitness(planar_midpoint(), build_benchmark(), cfg), std::invalid_argument);
  cfg.stage_order.pop_back();
  CHECK_THROWS_AS(evaluate_fitness(feasible_rus(), build_benchmark(), cfg), std::invalid_argument);
}

TEST_CASE("planar synthesis is deterministic and resumable") {
  const Scenario sc = build_planar_scenario();
  SynthesisConfig cfg;
  cfg.family = FamilyId::PlanarRRR;
  cfg.pso.particles = 12;
  cfg.pso.generations = 6;
  cfg.seed = 77;
  cfg.eval.trajectory_stride = 5;
  const SynthesisResult a = run_synthesis(sc, cfg);
  const SynthesisResult b = run_synthesis(sc, cfg);
  CHECK(a.generations_done == 6);
  CHECK(a.stats.evaluations == 72);
  CHECK(archive_csv(cfg.family, a.archive.records()) == archive_csv(cfg.family, b.archive.records()));
  CHECK(a.archive.is_nondominated());
  CHECK(a.stats.feasible >= 1);

  const std::string path = "planar_resume_checkpoint.json";
  SynthesisConfig part = cfg;
  part.pso.generations = 3;
  part.checkpoint_path = path;
  run_synthesis(sc, part);
  SynthesisConfig rest = cfg;
  rest.checkpoint_path = path;
  rest.resume = true;
  const SynthesisResult c = run_synthesis(sc, rest);
  CHECK(archive_csv(cfg.family, c.archive.records()) == archive_csv(cfg.family, a.archive.records()));
  CHECK(c.stats.evaluations == a.stats.evaluations);

  rest.seed = 78;
  CHECK_THROWS_AS(run_synthesis(sc, rest), std::invalid_argument);
  std::remove(path.c_str());
}

TEST_CASE("checkpoint text round trip") {
  Checkpoint cp;
  cp.family = FamilyId::PlanarRRR;
  cp.seed = 0xfedcba9876543210ULL;
  cp.swarm = init_swarm(3, search_dimension(cp.family), 4);
  cp.swarm.rng.discard(17);
  cp.swarm.generation = 9;
  for (Particle& p : cp.swarm.particles) {
    p.fitness = {1.5, std::numeric_limits<double>::infinity()};
    p.best_fitness = {0.25, 3.0};
  }
  ArchiveRecord r;
  r.point = planar_midpoint();
  r.unit = encode(r.point);
  r.objectives.f1 = 0.1;
  r.objectives.f3 = 1.0 / 3.0;
  r.soft.f2 = true;
  r.generation = 4;
  cp.archive.push_back(r);
  cp.stats.evaluations = 27;
  cp.stats.failures[3] = 5;
  const std::string text = checkpoint_to_text(cp);
  const Checkpoint back = checkpoint_from_text(text);
  CHECK(checkpoint_to_text(back) == text);
  CHECK(back.seed == cp.seed);
  CHECK(back.swarm.rng == cp.swarm.rng);
  CHECK(std::isinf(back.swarm.particles[0].fitness[1]));
  CHECK(back.archive[0].objectives.f3 == 1.0 / 3.0);
  CHECK(back.archive[0].soft.f2);
  CHECK_THROWS(checkpoint_from_text("{\"format\": \"other\"}"));
}

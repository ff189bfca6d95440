#include "support/oracles.hpp"

#include <doctest.h>

using namespace prsynth;
using namespace prsynth::test;

namespace {

std::vector<ArchiveRecord> random_records(Rng& rng, int n) {
  std::vector<ArchiveRecord> out;
  for (int i = 0; i < n; ++i) {
    ArchiveRecord r;
    r.point = planar_midpoint();
    r.point.params = perturbed_params(rng, r.point, 0.3);
    r.point.modes = i % 2 ? ModePattern::UniformIn : ModePattern::Alternating;
    r.unit = encode(r.point);
    ObjectiveVector& o = r.objectives;
    o.f1 = rng.uniform(0, 20);
    o.f2 = rng.uniform(0, kPi);
    o.f3 = rng.uniform(0, 0.3);
    o.f4 = rng.uniform(4, 9);
    o.f5 = rng.uniform(1, 40);
    o.f6 = rng.uniform(0.5, 5);
    o.position_error = rng.uniform(1e-5, 5e-4);
    o.condition = rng.uniform(1, 500);
    o.stress_utilization = rng.uniform(0, 0.5);
    o.max_power = rng.uniform(0, 100);
    o.max_velocity_term = rng.uniform(0, 1);
    r.soft = soft_gates(o, Limits{});
    r.tube_diameter = rng.uniform(0.02, 0.1);
    r.tube_wall = 0.0015;
    r.generation = i / 3;
    r.particle = i % 3;
    out.push_back(r);
  }
  return out;
}

double oriented_value(const ObjectiveVector& o, int index) {
  return o.minimization_form()[static_cast<std::size_t>(index)];
}

}  // namespace

TEST_CASE("archive table round trip") {
  Rng rng(40);
  const auto records = random_records(rng, 25);
  const std::string text = archive_csv(FamilyId::PlanarRRR, records);
  const auto header = archive_csv_header(FamilyId::PlanarRRR);
  CHECK(text.substr(0, text.find('\n')).find("f3_m") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 26);
  const auto rows = read_archive_csv(text);
  REQUIRE(rows.size() == records.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].family == FamilyId::PlanarRRR);
    CHECK(rows[i].point.params == records[i].point.params);
    CHECK(rows[i].point.modes == records[i].point.modes);
    CHECK(rows[i].objectives.f3 == records[i].objectives.f3);
    CHECK(rows[i].objectives.position_error == records[i].objectives.position_error);
    CHECK(rows[i].soft.f1 == records[i].soft.f1);
    CHECK(rows[i].tube_diameter == records[i].tube_diameter);
  }
  CHECK_THROWS(read_archive_csv("family,modes\nplanar,sideways\n"));
}

TEST_CASE("front projections are non-dominated and flag soft violators") {
  Rng rng(41);
  const auto records = random_records(rng, 60);
  for (const auto& pair : front_pairs()) {
    const auto front = front_projection(records, pair);
    REQUIRE_FALSE(front.empty());
    for (const FrontPoint& p : front) {
      const ArchiveRecord& r = records[p.record];
      CHECK(p.translucent == r.soft.any());
      for (const FrontPoint& q : front) {
        if (p.translucent != q.translucent) continue;
        const ObjectiveVector& a = records[p.record].objectives;
        const ObjectiveVector& b = records[q.record].objectives;
        const std::vector<double> va{oriented_value(a, pair[0]), oriented_value(a, pair[1])};
        const std::vector<double> vb{oriented_value(b, pair[0]), oriented_value(b, pair[1])};
        CHECK(dominance(va, vb) != Dominance::BDominates);
      }
    }
    // every passing record off the opaque front is dominated by one on it
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].soft.any()) continue;
      const bool on_front = std::any_of(front.begin(), front.end(),
                                        [&](const FrontPoint& p) { return p.record == i; });
      if (on_front) continue;
      const std::vector<double> vi{oriented_value(records[i].objectives, pair[0]),
                                   oriented_value(records[i].objectives, pair[1])};
      bool covered = false;
      for (const FrontPoint& p : front) {
        if (p.translucent) continue;
        const std::vector<double> vp{oriented_value(records[p.record].objectives, pair[0]),
                                     oriented_value(records[p.record].objectives, pair[1])};
        if (dominance(vp, vi) == Dominance::ADominates || vp == vi) covered = true;
      }
      CHECK(covered);
    }
    const std::string svg = front_svg(front, pair, "test");
    CHECK(svg.find("<svg") == 0);
    CHECK(front_csv(front, pair).find(objective_key(pair[0])) != std::string::npos);
  }
  CHECK(objective_key(2) == "f3");
}

TEST_CASE("radar axes map the reference range onto [0, 1]") {
  std::vector<ObjectiveVector> ref(3);
  ref[0].f1 = 2;
  ref[1].f1 = 6;
  ref[2].f1 = 10;
  ref[0].f4 = 5;
  ref[1].f4 = 7;
  ref[2].f4 = 9;
  const auto axes = radar_axes(ref[1], ref);
  REQUIRE(axes.size() == 6);
  CHECK(axes[0].key == "f1");
  CHECK(axes[0].normalized == doctest::Approx(0.5));
  CHECK(axes[3].normalized == doctest::Approx(0.5));
  CHECK(radar_axes(ref[2], ref)[0].normalized == doctest::Approx(1.0));  // larger f1 is better
  CHECK(radar_axes(ref[2], ref)[3].normalized == doctest::Approx(0.0));  // larger f4 is worse
  for (const RadarAxis& a : radar_axes(ref[0], ref)) {
    CHECK(a.normalized >= 0.0);
    CHECK(a.normalized <= 1.0);
  }
  CHECK(radar_json(axes).find("\"f6\"") != std::string::npos);
}

TEST_CASE("sketch has one joint per leg and group") {
  for (const DesignPoint& d : {feasible_rus(), planar_midpoint()}) {
    const RobotModel model = make_model(d.family, d.params);
    const VecX x = model.dof == 6 ? build_benchmark().reference_points[0]
                                  : build_planar_scenario().reference_points[0];
    const KinematicState s = solve_ik(model, x, mode_flags(d.modes, model.leg_count()));
    const Sketch sk = make_sketch(model, s);
    CHECK(sk.joints.size() == static_cast<std::size_t>(model.leg_count()) * model.groups.size());
    for (const SketchJoint& j : sk.joints)
      CHECK(j.axes.size() == static_cast<std::size_t>(joint_mobility(j.type)));
    CHECK(sketch_svg(sk).find("</svg>") != std::string::npos);
    CHECK(sketch_json(model, sk).find("joints_per_leg") != std::string::npos);
  }
}

TEST_CASE("text files are replaced atomically") {
  const std::string path = "report_test_file.txt";
  write_text_file(path, "first");
  write_text_file(path, "second");
  CHECK(read_text_file(path) == "second");
  std::remove(path.c_str());
  CHECK_THROWS(read_text_file(path));
}

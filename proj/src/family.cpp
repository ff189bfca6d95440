#include "prsynth/family.hpp"

#include "prsynth/math.hpp"

#include <array>
#include <stdexcept>

namespace prsynth {

int joint_mobility(JointType type) {
  switch (type) {
    case JointType::Revolute: return 1;
    case JointType::Universal: return 2;
    case JointType::Spherical: return 3;
  }
  return 0;
}

char joint_letter(JointType type) {
  switch (type) {
    case JointType::Revolute: return 'R';
    case JointType::Universal: return 'U';
    case JointType::Spherical: return 'S';
  }
  return '?';
}

int LegChainFamily::mobility() const {
  int m = 0;
  for (JointType t : joint_types) m += joint_mobility(t);
  return m;
}

namespace {

using J = JointType;

const std::array<LegChainFamily, 6>& catalog() {
  static const std::array<LegChainFamily, 6> families = {{
      {FamilyId::RUS, "RUS", "6-RUS", {J::Revolute, J::Universal, J::Spherical}, 0, 6, false},
      {FamilyId::RRRS, "RRRS", "6-RRRS",
       {J::Revolute, J::Revolute, J::Revolute, J::Spherical}, 0, 6, false},
      {FamilyId::RRUU, "RRUU", "6-RRUU",
       {J::Revolute, J::Revolute, J::Universal, J::Universal}, 0, 6, false},
      {FamilyId::RURU, "RURU", "6-RURU",
       {J::Revolute, J::Universal, J::Revolute, J::Universal}, 0, 6, false},
      {FamilyId::RUUR, "RUUR", "6-RUUR",
       {J::Revolute, J::Universal, J::Universal, J::Revolute}, 0, 6, false},
      {FamilyId::PlanarRRR, "planar-RRR", "3-RRR",
       {J::Revolute, J::Revolute, J::Revolute}, 0, 3, true},
  }};
  return families;
}

std::vector<ParamSpec> spatial_common() {
  return {
      {"scale", ParamKind::Scale, 0.8, 1.25},
      {"base_radius", ParamKind::Length, 0.1, 1.0},
      {"platform_radius", ParamKind::Length, 0.05, 0.4},
      {"base_pair_distance", ParamKind::Length, 0.02, 0.4},
      {"platform_pair_distance", ParamKind::Length, 0.02, 0.3},
      {"base_height", ParamKind::AbsoluteLength, 2.1, 2.6},
      {"base_axis_yaw", ParamKind::Angle, -kPi / 2, kPi / 2},
      {"base_axis_incline", ParamKind::Angle, -kPi / 4, kPi / 4},
      {"platform_axis_yaw", ParamKind::Angle, -kPi / 2, kPi / 2},
  };
}

std::vector<ParamSpec> with(std::vector<ParamSpec> base, std::initializer_list<ParamSpec> extra) {
  base.insert(base.end(), extra.begin(), extra.end());
  return base;
}

}  // namespace

const LegChainFamily& family_info(FamilyId id) {
  for (const auto& f : catalog())
    if (f.id == id) return f;
  throw std::invalid_argument("unknown leg-chain family");
}

const std::vector<FamilyId>& all_families() {
  static const std::vector<FamilyId> ids = {FamilyId::RUS,  FamilyId::RRRS, FamilyId::RRUU,
                                            FamilyId::RURU, FamilyId::RUUR, FamilyId::PlanarRRR};
  return ids;
}

FamilyId parse_family(std::string_view text) {
  for (const auto& f : catalog())
    if (text == f.key || text == f.name) return f.id;
  throw std::invalid_argument("unknown leg-chain family '" + std::string(text) + "'");
}

const std::vector<ParamSpec>& param_schema(FamilyId id) {
  static const std::vector<ParamSpec> rus =
      with(spatial_common(), {{"crank_length", ParamKind::Length, 0.1, 1.0},
                              {"rod_length", ParamKind::Length, 0.2, 1.5}});
  // three links with two Denavit-Hartenberg twist angles between consecutive axes
  static const std::vector<ParamSpec> three_link =
      with(spatial_common(), {{"link1_length", ParamKind::Length, 0.1, 1.0},
                              {"link1_twist", ParamKind::Angle, -kPi / 2, kPi / 2},
                              {"link2_length", ParamKind::Length, 0.2, 1.5},
                              {"link2_twist", ParamKind::Angle, -kPi / 2, kPi / 2},
                              {"link3_length", ParamKind::Length, 0.05, 1.0}});
  static const std::vector<ParamSpec> planar = {
      {"scale", ParamKind::Scale, 0.8, 1.25},
      {"base_radius", ParamKind::Length, 0.2, 1.0},
      {"platform_radius", ParamKind::Length, 0.05, 0.3},
      {"link1_length", ParamKind::Length, 0.1, 0.8},
      {"link2_length", ParamKind::Length, 0.1, 0.8},
  };
  switch (id) {
    case FamilyId::RUS: return rus;
    case FamilyId::PlanarRRR: return planar;
    default: return three_link;
  }
}

std::string_view param_unit(ParamKind kind) {
  switch (kind) {
    case ParamKind::Scale: return "-";
    case ParamKind::Length:
    case ParamKind::AbsoluteLength: return "m";
    case ParamKind::Angle: return "rad";
  }
  return "";
}

}  // namespace prsynth

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace prsynth {

enum class JointType { Revolute, Universal, Spherical };

/// Number of rotational coordinates a joint contributes (R = 1, U = 2, S = 3).
int joint_mobility(JointType type);
char joint_letter(JointType type);

enum class FamilyId { RUS, RRRS, RRUU, RURU, RUUR, PlanarRRR };

/// Joint sequence of one leg chain, base-proximal first. Every family is
/// actuated at the first (base) revolute joint.
struct LegChainFamily {
  FamilyId id;
  std::string key;   // "RUS", "planar-RRR"
  std::string name;  // "6-RUS", "3-RRR"
  std::vector<JointType> joint_types;
  int actuated_index = 0;
  int legs = 6;
  bool planar = false;

  int mobility() const;
  int platform_dof() const { return planar ? 3 : 6; }
  int segments_per_leg() const { return static_cast<int>(joint_types.size()) - 1; }
};

const LegChainFamily& family_info(FamilyId id);
const std::vector<FamilyId>& all_families();

/// Accepts "RUS", "6-RUS", "planar-RRR", "3-RRR" (case-sensitive). Throws
/// std::invalid_argument for unknown names.
FamilyId parse_family(std::string_view text);

enum class ParamKind {
  Scale,           // dimensionless multiplier applied to every scaled length
  Length,          // m, multiplied by the scale parameter
  AbsoluteLength,  // m, not scaled
  Angle,           // rad
};

struct ParamSpec {
  std::string name;
  ParamKind kind;
  double lower;
  double upper;
};

/// Geometry parameter vector layout and search bounds of a family.
const std::vector<ParamSpec>& param_schema(FamilyId id);

std::string_view param_unit(ParamKind kind);

}  // namespace prsynth

#pragma once

#include "prsynth/family.hpp"
#include "prsynth/math.hpp"

#include <vector>

namespace prsynth {

/// Structural and inertial settings that are not part of the searched
/// geometry vector.
struct ModelOptions {
  double tube_diameter = 0.02;  // m
  double tube_wall = 0.0015;    // m
  double clearance = 0.005;     // m, added to the tube radius for collision bodies
  double material_density = 2700.0;  // kg/m^3 (aluminum)
  double platform_structural_mass = 2.0;  // kg
  double platform_extra_mass = 2.0;       // kg, gripper and payload
  double platform_thickness = 0.04;       // m, diameter of the platform rim capsules
  double planar_height = 1.2;             // m, plane of planar robots
};

/// One leg as a chain of revolute coordinates. Coordinate j rotates about
/// the local z axis of its joint frame; offsets[j] (j >= 1) maps the body
/// frame after coordinate j-1 to the joint frame of coordinate j.
struct LegChain {
  Iso3 base = Iso3::Identity();  // joint frame of coordinate 0 in world
  std::vector<Iso3> offsets;     // size = coordinates, offsets[0] unused
  std::vector<int> group;        // joint-group index of each coordinate
  Vec3 platform_point = Vec3::Zero();            // coupling point, platform frame
  Mat3 platform_frame = Mat3::Identity();        // coupling orientation, platform frame
};

struct RobotModel {
  FamilyId family = FamilyId::RUS;
  VecX params;
  ModelOptions options;

  int dof = 6;
  int coords_per_leg = 6;
  std::vector<JointType> groups;  // joint groups along every leg
  std::vector<LegChain> legs;

  double base_radius = 0;
  double platform_radius = 0;
  double base_height = 0;

  /// Indices into the six-component pose (p, XYZ Euler) used by x; also the
  /// rows of each leg's constraint (position xyz, rotation-vector xyz).
  std::vector<int> pose_axes;

  int leg_count() const { return static_cast<int>(legs.size()); }
  int nq() const { return leg_count() * coords_per_leg; }
  int segments_per_leg() const { return static_cast<int>(groups.size()) - 1; }
  int translational_dofs() const { return dof == 6 ? 3 : 2; }
  bool planar() const { return dof == 3; }

  /// Index of coordinate j of leg i in the stacked joint vector q.
  int q_index(int leg, int coord) const { return leg * coords_per_leg + coord; }

  double tube_area() const;
  /// Mass per unit length of the leg tubes, kg/m.
  double link_density() const;
  double platform_mass() const {
    return options.platform_structural_mass + options.platform_extra_mass;
  }
};

/// Builds the leg chains for a geometry vector. Throws std::invalid_argument
/// when the vector does not match the family schema or a length is not
/// positive. Geometric plausibility is checked separately.
RobotModel make_model(FamilyId family, const VecX& params, const ModelOptions& options = {});

/// Zero when the geometry vector is plausible, otherwise a positive
/// violation magnitude (relative excess). Does not build the model.
double plausibility_violation(FamilyId family, const VecX& params);

/// Six-component pose (position, XYZ Euler) of a platform coordinate vector.
Vec6 full_pose(const RobotModel& model, const VecX& x);
Iso3 platform_transform(const RobotModel& model, const VecX& x);

/// Param vector at the middle of the search bounds.
VecX schema_midpoint(FamilyId family);

}  // namespace prsynth

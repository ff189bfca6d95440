#include "prsynth/model.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace prsynth {

double RobotModel::tube_area() const {
  const double d = options.tube_diameter;
  const double inner = std::max(0.0, d - 2.0 * options.tube_wall);
  return kPi / 4.0 * (d * d - inner * inner);
}

double RobotModel::link_density() const { return options.material_density * tube_area(); }

namespace {

struct Spatial {
  double scale, rb, rp, db, dp, hb, yaw_b, incline_b, yaw_p;
};

Spatial spatial_common(const VecX& p) {
  const double s = p[0];
  return {s, s * p[1], s * p[2], s * p[3], s * p[4], p[5], p[6], p[7], p[8]};
}

void check_schema(FamilyId family, const VecX& p) {
  const auto& schema = param_schema(family);
  if (p.size() != static_cast<Eigen::Index>(schema.size()))
    throw std::invalid_argument("parameter vector for " + family_info(family).name + " needs " +
                                std::to_string(schema.size()) + " entries, got " +
                                std::to_string(p.size()));
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (!std::isfinite(p[static_cast<Eigen::Index>(i)]))
      throw std::invalid_argument("parameter '" + schema[i].name + "' is not finite");
    const bool must_be_positive =
        schema[i].kind != ParamKind::Angle && schema[i].kind != ParamKind::AbsoluteLength;
    if (must_be_positive && p[static_cast<Eigen::Index>(i)] <= 0.0)
      throw std::invalid_argument("parameter '" + schema[i].name + "' must be positive");
  }
}

// Distal spherical joint: first axis along the incoming link, then two
// mutually orthogonal axes.
void append_spherical(LegChain& leg, int group, double link_length) {
  leg.offsets.push_back(translation(Vec3(link_length, 0, 0)) * rotation(rot_y(kPi / 2)));
  leg.offsets.push_back(rotation(rot_x(-kPi / 2)));
  leg.offsets.push_back(rotation(rot_y(kPi / 2)));
  leg.group.insert(leg.group.end(), {group, group, group});
}

// Universal joint: first axis given by the twist about the incoming link,
// second axis orthogonal to the first.
void append_universal(LegChain& leg, int group, double link_length, double twist) {
  leg.offsets.push_back(translation(Vec3(link_length, 0, 0)) * rotation(rot_x(twist)));
  leg.offsets.push_back(rotation(rot_x(-kPi / 2)));
  leg.group.insert(leg.group.end(), {group, group});
}

void append_revolute(LegChain& leg, int group, double link_length, double twist) {
  leg.offsets.push_back(translation(Vec3(link_length, 0, 0)) * rotation(rot_x(twist)));
  leg.group.push_back(group);
}

LegChain spatial_leg(FamilyId family, const VecX& p, int i) {
  const Spatial c = spatial_common(p);
  const double s = c.scale;
  const int pair = i / 2;
  const bool odd = (i % 2) == 1;
  const double half_b = std::asin(std::min(1.0, c.db / (2.0 * c.rb)));
  const double half_p = std::asin(std::min(1.0, c.dp / (2.0 * c.rp)));
  const double pair_angle = 2.0 * kPi * pair / 3.0;
  const double beta = pair_angle + (odd ? half_b : -half_b);
  const double gamma = pair_angle + (odd ? (kPi / 3.0 - half_p) : -(kPi / 3.0 - half_p));
  // legs of a pair are mirror images about the pair's bisector
  const double mirror = odd ? 1.0 : -1.0;

  LegChain leg;
  const Vec3 base_point(c.rb * std::cos(beta), c.rb * std::sin(beta), c.hb);
  leg.base = translation(base_point) *
             rotation(rot_z(beta + mirror * c.yaw_b) * rot_x(-kPi / 2 + c.incline_b));
  leg.offsets.push_back(Iso3::Identity());
  leg.group.push_back(0);
  leg.platform_point = Vec3(c.rp * std::cos(gamma), c.rp * std::sin(gamma), 0.0);
  leg.platform_frame = rot_z(gamma + mirror * c.yaw_p) * rot_x(-kPi / 2);

  switch (family) {
    case FamilyId::RUS:
      append_universal(leg, 1, s * p[9], 0.0);
      append_spherical(leg, 2, s * p[10]);
      break;
    case FamilyId::RRRS:
      append_revolute(leg, 1, s * p[9], p[10]);
      append_revolute(leg, 2, s * p[11], p[12]);
      append_spherical(leg, 3, s * p[13]);
      break;
    case FamilyId::RRUU:
      append_revolute(leg, 1, s * p[9], p[10]);
      append_universal(leg, 2, s * p[11], p[12]);
      append_universal(leg, 3, s * p[13], 0.0);
      break;
    case FamilyId::RURU:
      append_universal(leg, 1, s * p[9], p[10]);
      append_revolute(leg, 2, s * p[11], p[12]);
      append_universal(leg, 3, s * p[13], 0.0);
      break;
    case FamilyId::RUUR:
      append_universal(leg, 1, s * p[9], p[10]);
      append_universal(leg, 2, s * p[11], p[12]);
      append_revolute(leg, 3, s * p[13], 0.0);
      break;
    case FamilyId::PlanarRRR:
      throw std::logic_error("planar family in spatial builder");
  }
  return leg;
}

LegChain planar_leg(const VecX& p, int i, double height) {
  const double s = p[0];
  const double rb = s * p[1], rp = s * p[2], l1 = s * p[3], l2 = s * p[4];
  const double angle = kPi / 2 + 2.0 * kPi * i / 3.0;
  LegChain leg;
  leg.base = translation(Vec3(rb * std::cos(angle), rb * std::sin(angle), height));
  leg.offsets = {Iso3::Identity(), translation(Vec3(l1, 0, 0)), translation(Vec3(l2, 0, 0))};
  leg.group = {0, 1, 2};
  leg.platform_point = Vec3(rp * std::cos(angle), rp * std::sin(angle), 0.0);
  // x axis of the coupling frame points at the platform centre, so a zero
  // distal coordinate means the last link is aligned with the platform radius
  leg.platform_frame = rot_z(angle + kPi);
  return leg;
}

}  // namespace

RobotModel make_model(FamilyId family, const VecX& params, const ModelOptions& options) {
  check_schema(family, params);
  const LegChainFamily& info = family_info(family);
  RobotModel model;
  model.family = family;
  model.params = params;
  model.options = options;
  model.dof = info.platform_dof();
  model.coords_per_leg = info.mobility();
  model.groups = info.joint_types;
  if (info.planar) {
    model.base_radius = params[0] * params[1];
    model.platform_radius = params[0] * params[2];
    model.base_height = options.planar_height;
    model.pose_axes = {0, 1, 5};
    for (int i = 0; i < info.legs; ++i)
      model.legs.push_back(planar_leg(params, i, options.planar_height));
  } else {
    const Spatial c = spatial_common(params);
    model.base_radius = c.rb;
    model.platform_radius = c.rp;
    model.base_height = c.hb;
    model.pose_axes = {0, 1, 2, 3, 4, 5};
    for (int i = 0; i < info.legs; ++i) model.legs.push_back(spatial_leg(family, params, i));
  }
  return model;
}

double plausibility_violation(FamilyId family, const VecX& p) {
  check_schema(family, p);
  double violation = 0.0;
  auto excess = [&](double value, double limit) {
    if (value >= limit) violation = std::max(violation, (value - limit) / limit + 1e-6);
  };
  if (family == FamilyId::PlanarRRR) {
    excess(p[2], p[1]);  // platform radius below base radius
    return violation;
  }
  excess(p[2], p[1]);
  excess(p[3], 2.0 * p[1]);  // pair distance must fit on the circle
  excess(p[4], 2.0 * p[2]);
  return violation;
}

Vec6 full_pose(const RobotModel& model, const VecX& x) {
  Vec6 pose;
  if (model.planar()) {
    pose << x[0], x[1], model.base_height, 0.0, 0.0, x[2];
  } else {
    pose = x.head<6>();
  }
  return pose;
}

Iso3 platform_transform(const RobotModel& model, const VecX& x) {
  const Vec6 pose = full_pose(model, x);
  Iso3 t = Iso3::Identity();
  t.linear() = euler_xyz(pose.tail<3>());
  t.translation() = pose.head<3>();
  return t;
}

VecX schema_midpoint(FamilyId family) {
  const auto& schema = param_schema(family);
  VecX p(static_cast<Eigen::Index>(schema.size()));
  for (std::size_t i = 0; i < schema.size(); ++i)
    p[static_cast<Eigen::Index>(i)] = 0.5 * (schema[i].lower + schema[i].upper);
  return p;
}

}  // namespace prsynth

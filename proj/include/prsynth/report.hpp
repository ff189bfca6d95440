#pragma once

#include "prsynth/optimizer.hpp"

#include <array>
#include <string>
#include <vector>

namespace prsynth {

// ---------------------------------------------------------------- archive table

/// Fixed column order; units in the header names.
std::vector<std::string> archive_csv_header(FamilyId family);
std::string archive_csv(FamilyId family, const std::vector<ArchiveRecord>& records);

struct ArchiveRow {
  FamilyId family = FamilyId::RUS;
  DesignPoint point;
  ObjectiveVector objectives;
  SoftGates soft;
  double tube_diameter = 0.0;
  double tube_wall = 0.0;
};

/// Parses a table written by archive_csv.
std::vector<ArchiveRow> read_archive_csv(const std::string& text);

// ---------------------------------------------------------------- fronts

/// Objective pairs of the four front diagrams, as indices f1 = 0 ... f6 = 5.
std::vector<std::array<int, 2>> front_pairs();

struct FrontPoint {
  std::size_t record = 0;  // index into the archive
  double x = 0.0;
  double y = 0.0;
  bool translucent = false;  // soft-gate violator
};

/// Opaque points: front of the entries passing every soft gate. Translucent
/// points: soft-gate violators on the front of all entries.
std::vector<FrontPoint> front_projection(const std::vector<ArchiveRecord>& records,
                                         std::array<int, 2> pair);

std::string front_csv(const std::vector<FrontPoint>& front, std::array<int, 2> pair);
std::string front_svg(const std::vector<FrontPoint>& front, std::array<int, 2> pair,
                      const std::string& title);

std::string objective_label(int index);  // "f3 clamping distance [m]"
std::string objective_key(int index);    // "f3"

// ---------------------------------------------------------------- radar

struct RadarAxis {
  std::string key;
  double value = 0.0;       // raw
  double normalized = 0.0;  // 1 best, 0 worst of the reference set
  double best = 0.0;
  double worst = 0.0;
};

/// Min-max normalization of f1..f6 against a reference set, oriented so
/// the best reference value maps to 1.
std::vector<RadarAxis> radar_axes(const ObjectiveVector& v, const std::vector<ObjectiveVector>& reference);
std::string radar_json(const std::vector<RadarAxis>& axes);

// ---------------------------------------------------------------- sketch

struct SketchJoint {
  int leg = 0;
  int group = 0;
  JointType type = JointType::Revolute;
  Vec3 center = Vec3::Zero();
  std::vector<Vec3> axes;
};

struct Sketch {
  std::vector<SketchJoint> joints;
  std::vector<Capsule> capsules;
  std::vector<Vec3> platform_points;
};

Sketch make_sketch(const RobotModel& model, const KinematicState& state,
                   const GeometryOptions& geometry = {});
std::string sketch_json(const RobotModel& model, const Sketch& sketch);
/// Front (x-z) and top (x-y) views side by side.
std::string sketch_svg(const Sketch& sketch);

// ---------------------------------------------------------------- run summaries

std::string run_report_json(const Scenario& scenario, const SynthesisConfig& config,
                            const SynthesisResult& result);

std::string eval_report_json(const DesignPoint& point, const EvalResult& result);

/// Writes text to path via a temporary file and rename.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace prsynth

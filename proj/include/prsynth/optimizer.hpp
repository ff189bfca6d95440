#pragma once

#include "prsynth/scenario.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace prsynth {

// ---------------------------------------------------------------- stages

enum class Stage : int {
  Plausibility = 1,
  ReferenceIK,
  JointLimits,
  SelfCollision,
  Installation,
  TrajectoryIK,
  Condition,
  PositionError,
  DesignStress,
  Objectives,
};
inline constexpr int kStageCount = 10;

std::string_view stage_name(Stage stage);
Stage parse_stage(std::string_view name);

/// Stages 1-9 in their default order; Objectives always runs last.
std::vector<Stage> default_stage_order();

/// Throws std::invalid_argument when a stage is missing, repeated, or
/// placed before a stage whose results it needs.
void validate_stage_order(const std::vector<Stage>& order);

/// Penalty of the stage at 1-based depth k: base 10^(10-k), band width one
/// half decade, log-scaled in the severity s in (0, 1].
struct PenaltyLadder {
  static double lower(int depth);  // exclusive
  static double upper(int depth);  // inclusive
  static double penalty(int depth, double severity);
};

/// Feasible objectives are squashed into [0, 10], below every band.
double squash_objective(double oriented);

// ---------------------------------------------------------------- design point

/// Objectives taking part in dominance, as indices into
/// ObjectiveVector::minimization_form().
using ObjectiveSubset = std::vector<int>;
ObjectiveSubset default_dominance_subset();  // {f1, f3, f4, f5, f6}

struct DesignPoint {
  FamilyId family = FamilyId::RUS;
  VecX params;
  ModePattern modes = ModePattern::UniformOut;
};

/// Normalized search vector: one entry per schema parameter, then the
/// categorical assembly-mode dimension split into thirds.
int search_dimension(FamilyId family);
DesignPoint decode(FamilyId family, const VecX& unit);
VecX encode(const DesignPoint& point);

// ---------------------------------------------------------------- evaluation

struct DesignSettings {
  double min_diameter = 0.02, max_diameter = 0.10;  // m
  double min_wall = 0.0015, max_wall = 0.008;       // m
  double max_wall_ratio = 0.4;                      // wall <= ratio * diameter
  int particles = 12;
  int iterations = 20;
};

struct EvalConfig {
  std::vector<Stage> stage_order = default_stage_order();
  IkOptions ik;
  DynamicsOptions dynamics;
  Material material;
  DesignSettings design;
  double passive_range_limit = deg2rad(170.0);   // R coordinates, U link spread
  double spherical_range_limit = deg2rad(120.0); // S link spread
  int trajectory_stride = 1;
  ObjectiveSubset dominance = default_dominance_subset();

  /// Model options before the design optimization; the tube section is
  /// replaced by the designed one for the objectives.
  ModelOptions model_options(const Scenario& scenario) const;
  ModelOptions base_options;
};

struct EvalTrace {
  std::array<int, kStageCount + 1> stage_entries{};  // indexed by Stage value
  long ik_solves = 0;
  long jacobian_evaluations = 0;

  int entries(Stage s) const { return stage_entries[static_cast<std::size_t>(s)]; }
};

struct SoftGates {
  bool f1 = false;  // true means the gate is violated
  bool f2 = false;
  bool f3 = false;
  bool f5 = false;
  bool any() const { return f1 || f2 || f3 || f5; }
};

SoftGates soft_gates(const ObjectiveVector& obj, const Limits& limits);

struct StageLog {
  Stage stage;
  double value;  // measured quantity compared against the stage threshold
  bool passed;
};

struct EvalResult {
  bool feasible = false;
  Stage failed_stage = Stage::Objectives;  // meaningful when !feasible
  double severity = 0.0;
  std::vector<double> fitness;  // one entry per dominance objective
  ObjectiveVector objectives;
  SoftGates soft;
  double tube_diameter = 0.0;
  double tube_wall = 0.0;
  std::vector<StageLog> log;
  EvalTrace trace;
  std::string message;
};

EvalResult evaluate_fitness(const DesignPoint& point, const Scenario& scenario,
                            const EvalConfig& config);

// ---------------------------------------------------------------- dominance

enum class Dominance { ADominates, BDominates, Incomparable };

Dominance dominance(const std::vector<double>& a, const std::vector<double>& b);
Dominance dominance(const ObjectiveVector& a, const ObjectiveVector& b,
                    const ObjectiveSubset& subset);
std::vector<double> oriented(const ObjectiveVector& v, const ObjectiveSubset& subset);

// ---------------------------------------------------------------- archive

struct ArchiveRecord {
  DesignPoint point;
  VecX unit;  // normalized search vector
  ObjectiveVector objectives;
  SoftGates soft;
  double tube_diameter = 0.0;
  double tube_wall = 0.0;
  int generation = 0;
  int particle = 0;
};

class ParetoArchive {
 public:
  explicit ParetoArchive(std::size_t capacity = 200, ObjectiveSubset subset = default_dominance_subset())
      : capacity_(capacity), subset_(std::move(subset)) {}

  /// Returns true when the record entered the archive. Records dominated by
  /// or equal to a member are rejected; members it dominates are removed;
  /// overflow is pruned by smallest crowding distance.
  bool insert(const ArchiveRecord& record);

  const std::vector<ArchiveRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::size_t capacity() const { return capacity_; }
  const ObjectiveSubset& subset() const { return subset_; }

  std::vector<double> crowding_distances() const;
  /// True when no member dominates another.
  bool is_nondominated() const;

  void restore(std::vector<ArchiveRecord> records) { records_ = std::move(records); }

 private:
  std::size_t capacity_;
  ObjectiveSubset subset_;
  std::vector<ArchiveRecord> records_;
};

/// Crowding distance of a set of objective vectors (infinite at the
/// extremes of every objective).
std::vector<double> crowding_distance(const std::vector<std::vector<double>>& points);

/// Hypervolume of a 2-D minimization front against a reference point.
double hypervolume_2d(std::vector<std::array<double, 2>> points, std::array<double, 2> reference);

// ---------------------------------------------------------------- swarm

struct PsoSettings {
  int particles = 100;
  int generations = 100;
  double inertia = 0.7;
  double cognitive = 1.5;
  double social = 1.5;
  double max_velocity = 0.5;  // per normalized dimension
  int archive_capacity = 200;
};

struct Particle {
  VecX position;
  VecX velocity;
  VecX best_position;
  std::vector<double> best_fitness;
  std::vector<double> fitness;
};

struct Swarm {
  std::vector<Particle> particles;
  std::mt19937_64 rng;
  int generation = 0;
};

/// Evaluates unit vectors; implementations may run in parallel but must
/// return results in input order.
using BatchEvaluator =
    std::function<std::vector<EvalResult>(const std::vector<VecX>& positions)>;

/// Latin hypercube initialization; velocities start at zero.
Swarm init_swarm(int particles, int dimension, std::uint64_t seed);

/// Moves every particle (velocity update, clamping), evaluates them and
/// updates personal bests and the archive.
void pso_step(Swarm& swarm, ParetoArchive& archive, const PsoSettings& settings,
              const BatchEvaluator& evaluate, const std::function<ArchiveRecord(
                  const VecX&, const EvalResult&, int generation, int particle)>& make_record);

/// Personal-best and archive bookkeeping for freshly evaluated positions.
void absorb_evaluations(Swarm& swarm, ParetoArchive& archive, const std::vector<EvalResult>& results,
                        const std::function<ArchiveRecord(const VecX&, const EvalResult&, int, int)>&
                            make_record);

// ---------------------------------------------------------------- design optimization

struct DesignResult {
  double diameter = 0.0;
  double wall = 0.0;
  bool feasible = false;
  double utilization = 0.0;  // at the returned section
  double max_diameter = 0.0; // collision-limited upper diameter bound used
  double pso_mass = 0.0;     // linear density found by the swarm, kg/m
};

/// Lightest tube section with stress utilization below the limit whose
/// inflated capsules keep the recorded collision margins. seg_seg_margin
/// and seg_rim_margin are the smallest distances measured with the model's
/// default tube.
DesignResult design_optimization(const InternalLoads& loads, const Material& material,
                                 double gravity, double max_utilization,
                                 const DesignSettings& settings, double base_diameter,
                                 double seg_seg_margin, double seg_rim_margin);

// ---------------------------------------------------------------- synthesis

struct SynthesisConfig {
  FamilyId family = FamilyId::RUS;
  PsoSettings pso;
  EvalConfig eval;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string checkpoint_path;  // empty disables checkpoints
  bool resume = false;
};

struct StageStats {
  std::array<long, kStageCount + 1> failures{};  // by Stage value, Objectives = feasible
  long evaluations = 0;
  long feasible = 0;
  long soft_violating = 0;
};

struct SynthesisResult {
  ParetoArchive archive;
  StageStats stats;
  int generations_done = 0;
  double seconds = 0.0;
};

using ProgressCallback = std::function<void(int generation, const ParetoArchive&, const StageStats&)>;

SynthesisResult run_synthesis(const Scenario& scenario, const SynthesisConfig& config,
                              const ProgressCallback& progress = {});

/// Evaluates positions with `jobs` worker threads, preserving order.
std::vector<EvalResult> evaluate_batch(FamilyId family, const std::vector<VecX>& positions,
                                       const Scenario& scenario, const EvalConfig& config, int jobs);

// ---------------------------------------------------------------- checkpoint

struct Checkpoint {
  int version = 1;
  FamilyId family = FamilyId::RUS;
  std::uint64_t seed = 0;
  Swarm swarm;
  std::vector<ArchiveRecord> archive;
  StageStats stats;
};

std::string checkpoint_to_text(const Checkpoint& cp);
Checkpoint checkpoint_from_text(const std::string& text);
/// Write-then-rename.
void write_checkpoint(const Checkpoint& cp, const std::string& path);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace prsynth

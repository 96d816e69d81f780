#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "meshblend/correspondence.hpp"
#include "meshblend/dataset.hpp"
#include "meshblend/fusion.hpp"
#include "meshblend/optimizer.hpp"

namespace meshblend {

// Which matrix the correspondence loss is evaluated on: the red-edge weights
// (R^K)^T, or the network's sigmoid output.
enum class CorrespondenceTarget { RedEdges, Sigmoid };

CorrespondenceTarget parse_correspondence_target(const std::string& name);
const char* to_string(CorrespondenceTarget target);

struct TrainConfig {
  std::uint64_t seed = 0;
  OptimizerConfig optimizer;
  std::size_t steps = 100;
  std::size_t checkpoint_every = 0;  // 0 disables periodic checkpoints
  std::filesystem::path checkpoint_path;
  std::array<double, 3> task_weights{1.0, 1.0, 1.0};  // interpolate, future, past
  CorrespondenceTarget corr_target = CorrespondenceTarget::RedEdges;
  double split_ratio = 0.8;

  void validate() const;
};

struct LossRecord {
  std::size_t step = 0;
  std::string task;
  double loss = 0.0;
};

void write_history_csv(std::ostream& out, const std::vector<LossRecord>& history);
void save_history_csv(const std::vector<LossRecord>& history, const std::filesystem::path& path);

class TrainingDiverged : public std::runtime_error {
 public:
  explicit TrainingDiverged(std::size_t step);
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

struct CorrespondenceTraining {
  CorrespondenceParams params;
  std::vector<LossRecord> history;
};

// One permuted pair per step: forward, correspondence loss, backward, update.
CorrespondenceTraining train_correspondence(const Dataset& data, const TrainConfig& cfg,
                                            CorrespondenceParams init);

enum class AlignmentMode { Oracle, Predicted };

struct FusionTraining {
  FusionParams params;
  std::vector<LossRecord> history;
};

// Tasks cycle interpolate, future, past. Oracle mode aligns through the known
// relabeling; predicted mode runs the correspondence network and refinement.
FusionTraining train_blending(const Dataset& data, const TrainConfig& cfg, FusionParams init,
                              AlignmentMode mode, const CorrespondenceParams* corr = nullptr);

// Aligns the triplet's second input into the first input's vertex order.
AlignedPair align_triplet(const TrainingTriplet& triplet, AlignmentMode mode,
                          const CorrespondenceParams* corr);

struct CorrespondenceMetrics {
  std::size_t samples = 0;
  double verified_fraction = 0.0;  // mean share of vertices passing verification
  double matched_fraction = 0.0;   // mean share of vertices matched after refinement
  double exact_rate = 0.0;
  double partial_rate = 0.0;
  double fallback_rate = 0.0;
  double mean_loss = 0.0;
};

CorrespondenceMetrics eval_correspondence(const CorrespondenceParams& params, const Dataset& data,
                                          std::size_t samples, std::uint64_t seed,
                                          CorrespondenceTarget target = CorrespondenceTarget::RedEdges);

void write_metrics(std::ostream& out, const CorrespondenceMetrics& m);

}  // namespace meshblend

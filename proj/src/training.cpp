#include "meshblend/training.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <ostream>

#include "meshblend/checkpoint.hpp"
#include "meshblend/losses.hpp"
#include "meshblend/obj_io.hpp"
#include "meshblend/refinement.hpp"

namespace meshblend {

CorrespondenceTarget parse_correspondence_target(const std::string& name) {
  if (name == "red") return CorrespondenceTarget::RedEdges;
  if (name == "sigmoid") return CorrespondenceTarget::Sigmoid;
  throw std::invalid_argument("unknown correspondence loss target '" + name +
                              "' (expected red or sigmoid)");
}

const char* to_string(CorrespondenceTarget target) {
  return target == CorrespondenceTarget::RedEdges ? "red" : "sigmoid";
}

void TrainConfig::validate() const {
  if (!(optimizer.learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be >= 0");
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw std::invalid_argument("split ratio must be in (0,1)");
  for (double w : task_weights)
    if (!(w >= 0.0)) throw std::invalid_argument("task weights must be >= 0");
}

TrainingDiverged::TrainingDiverged(std::size_t step)
    : std::runtime_error("training diverged: non-finite loss at step " + std::to_string(step)),
      step_(step) {}

void write_history_csv(std::ostream& out, const std::vector<LossRecord>& history) {
  out << "step,task,loss\n";
  for (const auto& r : history) out << r.step << ',' << r.task << ',' << format_double(r.loss) << '\n';
}

void save_history_csv(const std::vector<LossRecord>& history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_history_csv(out, history);
}

CorrespondenceTraining train_correspondence(const Dataset& data, const TrainConfig& cfg,
                                            CorrespondenceParams init) {
  cfg.validate();
  init.validate();
  CorrespondenceTraining out{std::move(init), {}};
  CorrespondenceParams& params = out.params;
  const auto pool = data.training_pool();
  Rng rng(cfg.seed);
  Optimizer opt(cfg.optimizer);
  std::vector<Matrix*> tensors = params.tensors();
  // The mixing weights are the last two tensors.
  auto frozen = std::make_unique<bool[]>(tensors.size());
  if (!params.config.learn_lambdas) {
    frozen[tensors.size() - 1] = true;
    frozen[tensors.size() - 2] = true;
  }

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const CorrespondenceSample s = sample_correspondence_batch(data, pool, rng);
    Tape tape;
    const CorrespondenceVars vars = bind(tape, params);
    const RbmpnnTrace trace = rbmpnn_forward(tape, vars, params.config, s.g0, s.g1);
    const Var p_hat = cfg.corr_target == CorrespondenceTarget::Sigmoid ? trace.soft : trace.red_t;
    const Var loss = correspondence_loss(p_hat, s.g0.adjacency(), s.g1.adjacency());
    const double value = loss.value()(0, 0);
    if (!std::isfinite(value)) throw TrainingDiverged(step);
    const std::vector<Matrix> grads = tape.backward(loss);
    opt.step(tensors, grads, std::span<const bool>(frozen.get(), tensors.size()));
    params.lambda_s(0, 0) = std::max(params.lambda_s(0, 0), 0.0);
    params.lambda_r(0, 0) = std::max(params.lambda_r(0, 0), 0.0);
    out.history.push_back({step, "correspondence", value});
    if (cfg.checkpoint_every > 0 && !cfg.checkpoint_path.empty() &&
        (step + 1) % cfg.checkpoint_every == 0) {
      save_correspondence(params, cfg.checkpoint_path);
    }
  }
  return out;
}

AlignedPair align_triplet(const TrainingTriplet& triplet, AlignmentMode mode,
                          const CorrespondenceParams* corr) {
  if (mode == AlignmentMode::Oracle) {
    return align_with_permutation(triplet.input0, triplet.input1, triplet.input1_perm);
  }
  if (corr == nullptr) throw std::invalid_argument("predicted alignment needs correspondence params");
  const SoftCorrespondence soft = rbmpnn_forward(triplet.input0, triplet.input1, *corr);
  return align(triplet.input0, triplet.input1, conditional_refine(triplet.input0, triplet.input1, soft));
}

FusionTraining train_blending(const Dataset& data, const TrainConfig& cfg, FusionParams init,
                              AlignmentMode mode, const CorrespondenceParams* corr) {
  cfg.validate();
  init.validate();
  FusionTraining out{std::move(init), {}};
  FusionParams& params = out.params;
  const auto pool = data.training_pool();
  Rng rng(cfg.seed);
  Optimizer opt(cfg.optimizer);
  std::vector<Matrix*> tensors = params.tensors();
  constexpr std::array<BlendTask, 3> kTasks{BlendTask::Interpolate, BlendTask::Future,
                                            BlendTask::Past};

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const std::size_t task_index = step % kTasks.size();
    const TrainingTriplet triplet = sample_blend_triplet(data, pool, rng, kTasks[task_index]);
    const AlignedPair aligned = align_triplet(triplet, mode, corr);
    Tape tape;
    const FusionVars vars = bind(tape, params);
    const BlendTrace trace = blend_forward(tape, vars, aligned, triplet.t);
    const Var loss = chamfer_loss(trace.vertices, tape.constant(triplet.target.vertices()));
    const double value = loss.value()(0, 0);
    if (!std::isfinite(value)) throw TrainingDiverged(step);
    const Var weighted = ad::scale(loss, cfg.task_weights[task_index]);
    const std::vector<Matrix> grads = tape.backward(weighted);
    opt.step(tensors, grads);
    out.history.push_back({step, to_string(kTasks[task_index]), value});
    if (cfg.checkpoint_every > 0 && !cfg.checkpoint_path.empty() &&
        (step + 1) % cfg.checkpoint_every == 0) {
      save_fusion(params, cfg.checkpoint_path);
    }
  }
  return out;
}

CorrespondenceMetrics eval_correspondence(const CorrespondenceParams& params, const Dataset& data,
                                          std::size_t samples, std::uint64_t seed,
                                          CorrespondenceTarget target) {
  CorrespondenceMetrics m;
  m.samples = samples;
  if (samples == 0) return m;
  const auto pool = data.testing_pool();
  Rng rng(seed);
  for (std::size_t k = 0; k < samples; ++k) {
    const CorrespondenceSample s = sample_correspondence_batch(data, pool, rng);
    Tape tape;
    const CorrespondenceVars vars = bind(tape, params);
    const RbmpnnTrace trace = rbmpnn_forward(tape, vars, params.config, s.g0, s.g1);
    const Matrix& p_hat = target == CorrespondenceTarget::Sigmoid ? trace.soft.value() : trace.red_t.value();
    m.mean_loss += correspondence_loss(p_hat, s.g0.adjacency(), s.g1.adjacency());
    const RefinementResult r = conditional_refine(s.g0, s.g1, {trace.soft.value()});
    const auto n = static_cast<double>(s.g0.vertex_count());
    m.verified_fraction += static_cast<double>(r.stats.verified) / n;
    m.matched_fraction += static_cast<double>(r.stats.matched) / n;
    switch (r.outcome) {
      case RefinementOutcome::ExactPermutation:
        m.exact_rate += 1.0;
        break;
      case RefinementOutcome::PartialMatch:
        m.partial_rate += 1.0;
        break;
      case RefinementOutcome::Fallback:
        m.fallback_rate += 1.0;
        break;
    }
  }
  const auto count = static_cast<double>(samples);
  m.verified_fraction /= count;
  m.matched_fraction /= count;
  m.exact_rate /= count;
  m.partial_rate /= count;
  m.fallback_rate /= count;
  m.mean_loss /= count;
  return m;
}

void write_metrics(std::ostream& out, const CorrespondenceMetrics& m) {
  out << "{\n"
      << "  \"samples\": " << m.samples << ",\n"
      << "  \"verified_fraction\": " << format_double(m.verified_fraction) << ",\n"
      << "  \"matched_fraction\": " << format_double(m.matched_fraction) << ",\n"
      << "  \"exact_rate\": " << format_double(m.exact_rate) << ",\n"
      << "  \"partial_rate\": " << format_double(m.partial_rate) << ",\n"
      << "  \"fallback_rate\": " << format_double(m.fallback_rate) << ",\n"
      << "  \"mean_loss\": " << format_double(m.mean_loss) << "\n"
      << "}\n";
}

}  // namespace meshblend

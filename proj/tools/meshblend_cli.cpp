// meshblend: dataset generation, training, correspondence, blending and
// validation from the command line. Results go to files or stdout,
// diagnostics to stderr.
//
// Exit codes: 0 success (correspond: exact permutation; validate: pass),
// 1 error, 2 partial match / validation failure, 3 fallback.

#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "meshblend/checkpoint.hpp"
#include "meshblend/config.hpp"
#include "meshblend/dataset.hpp"
#include "meshblend/fusion.hpp"
#include "meshblend/obj_io.hpp"
#include "meshblend/refinement.hpp"
#include "meshblend/training.hpp"

namespace fs = std::filesystem;
using namespace meshblend;

namespace {

constexpr int kExitError = 1;
constexpr int kExitPartial = 2;
constexpr int kExitFallback = 3;
constexpr int kExitInvalid = 2;

struct GenDataArgs {
  std::string out;
  std::size_t sequences = 4;
  std::size_t frames = 10;
  std::string shape = "icosphere";
  int level = 1;
  std::size_t grid = 8;
  double amplitude = 0.3;
  double split_ratio = 0.8;
  std::uint64_t seed = 0;
};

// Flags shared by the two training commands. Unset flags leave the config
// file (or the built-in default) in charge.
struct TrainArgs {
  std::string data;
  std::string out;
  std::string config;
  std::string history;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> steps;
  std::optional<double> lr;
  std::optional<std::size_t> checkpoint_every;
  // train-corr
  std::optional<int> iterations;
  std::optional<int> width;
  // train-blend
  std::string mode = "oracle";
  std::string corr_model;
};

struct CorrespondArgs {
  std::string g0, g1, model, out;
};

struct BlendArgs {
  std::string g0, g1, corr_model, fusion_model, t, out;
};

struct EvalArgs {
  std::string data, model, out;
  std::size_t samples = 100;
  std::uint64_t seed = 0;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void load_config_into(const TrainArgs& a, TrainConfig& train, CorrespondenceConfig* corr,
                      FusionConfig* fusion) {
  if (!a.config.empty()) apply_config(load_config(a.config), &train, corr, fusion);
  if (a.seed) {
    train.seed = *a.seed;
    if (corr) corr->seed = *a.seed;
    if (fusion) fusion->seed = *a.seed;
  }
  if (a.steps) train.steps = *a.steps;
  if (a.lr) train.optimizer.learning_rate = *a.lr;
  if (a.checkpoint_every) train.checkpoint_every = *a.checkpoint_every;
  if (train.checkpoint_every > 0) train.checkpoint_path = a.out;
}

int run_gen_data(const GenDataArgs& a) {
  DatasetSpec spec;
  spec.sequences = a.sequences;
  spec.frames = a.frames;
  spec.shape = parse_base_shape(a.shape);
  spec.level = a.level;
  spec.grid = a.grid;
  spec.amplitude = a.amplitude;
  spec.split_ratio = a.split_ratio;
  Rng rng(a.seed);
  const Dataset data = generate_synthetic_dataset(spec, rng);
  save_dataset(data, a.out);
  std::cerr << "wrote " << data.sequences.size() << " sequences to " << a.out << '\n';
  return 0;
}

int run_train_corr(const TrainArgs& a) {
  TrainConfig train;
  CorrespondenceConfig corr;
  load_config_into(a, train, &corr, nullptr);
  if (a.iterations) corr.iterations = *a.iterations;
  if (a.width) corr.width = *a.width;
  const Dataset data = load_dataset(a.data);
  CorrespondenceTraining result =
      train_correspondence(data, train, CorrespondenceParams::initialize(corr));
  save_correspondence(result.params, a.out);
  if (!a.history.empty()) save_history_csv(result.history, a.history);
  if (!result.history.empty()) {
    std::cerr << "loss " << format_double(result.history.front().loss) << " -> "
              << format_double(result.history.back().loss) << '\n';
  }
  return 0;
}

int run_train_blend(const TrainArgs& a) {
  TrainConfig train;
  FusionConfig fusion;
  load_config_into(a, train, nullptr, &fusion);
  if (a.width) fusion.width = *a.width;
  AlignmentMode mode;
  if (a.mode == "oracle") {
    mode = AlignmentMode::Oracle;
  } else if (a.mode == "predicted") {
    mode = AlignmentMode::Predicted;
  } else {
    throw std::invalid_argument("--mode must be oracle or predicted");
  }
  std::optional<CorrespondenceParams> corr;
  if (mode == AlignmentMode::Predicted) {
    if (a.corr_model.empty()) throw std::invalid_argument("--mode predicted needs --corr-model");
    corr = load_correspondence(a.corr_model);
  }
  const Dataset data = load_dataset(a.data);
  FusionTraining result = train_blending(data, train, FusionParams::initialize(fusion), mode,
                                         corr ? &*corr : nullptr);
  save_fusion(result.params, a.out);
  if (!a.history.empty()) save_history_csv(result.history, a.history);
  return 0;
}

void require_same_size(const TriMesh& g0, const TriMesh& g1) {
  if (g0.vertex_count() != g1.vertex_count()) {
    throw std::invalid_argument("vertex counts differ: g0 has " + std::to_string(g0.vertex_count()) +
                                ", g1 has " + std::to_string(g1.vertex_count()));
  }
}

// One line per G_0 vertex: `i j status`, status the refinement outcome and
// j = -1 where G_0 vertex i has no match. A fallback reports the binarized
// matrix where exactly one G_1 row picks i.
std::string refinement_report(const RefinementResult& r) {
  std::vector<std::size_t> target = r.pairs.target;
  if (r.outcome == RefinementOutcome::Fallback && r.hard) {
    std::vector<std::size_t> hits(target.size(), 0);
    target.assign(target.size(), kUnmatched);
    for (std::size_t u1 = 0; u1 < r.hard->choice.size(); ++u1) {
      const std::size_t u0 = r.hard->choice[u1];
      if (++hits[u0] == 1) target[u0] = u1;
    }
    for (std::size_t u0 = 0; u0 < target.size(); ++u0)
      if (hits[u0] != 1) target[u0] = kUnmatched;
  }
  std::ostringstream out;
  const char* status = to_string(r.outcome);
  for (std::size_t i = 0; i < target.size(); ++i) {
    out << i << ' ';
    if (target[i] == kUnmatched) {
      out << "-1";
    } else {
      out << target[i];
    }
    out << ' ' << status << '\n';
  }
  return out.str();
}

int run_correspond(const CorrespondArgs& a) {
  const TriMesh g0 = load_obj(a.g0);
  const TriMesh g1 = load_obj(a.g1);
  require_same_size(g0, g1);
  const CorrespondenceParams params = load_correspondence(a.model);
  const RefinementResult r = conditional_refine(g0, g1, rbmpnn_forward(g0, g1, params));
  write_text(a.out, refinement_report(r));
  std::cerr << "outcome: " << to_string(r.outcome) << " (verified " << r.stats.verified
            << ", matched " << r.stats.matched << ")\n";
  switch (r.outcome) {
    case RefinementOutcome::ExactPermutation:
      return 0;
    case RefinementOutcome::PartialMatch:
      return kExitPartial;
    case RefinementOutcome::Fallback:
      return kExitFallback;
  }
  return kExitError;
}

std::vector<std::string> split_list(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw std::invalid_argument("--t: empty entry in '" + list + "'");
    out.push_back(item);
  }
  if (out.empty()) throw std::invalid_argument("--t: no values");
  return out;
}

double parse_time(const std::string& token) {
  std::size_t used = 0;
  double t = 0.0;
  try {
    t = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || !std::isfinite(t)) {
    throw std::invalid_argument("--t: '" + token + "' is not a number");
  }
  return t;
}

int run_blend(const BlendArgs& a) {
  const TriMesh g0 = load_obj(a.g0);
  const TriMesh g1 = load_obj(a.g1);
  require_same_size(g0, g1);
  const std::vector<std::string> tokens = split_list(a.t);
  std::vector<double> times;
  for (const auto& tok : tokens) times.push_back(parse_time(tok));
  const CorrespondenceParams corr = load_correspondence(a.corr_model);
  const FusionParams fusion = load_fusion(a.fusion_model);
  const RefinementResult r = conditional_refine(g0, g1, rbmpnn_forward(g0, g1, corr));
  std::cerr << "alignment: " << to_string(r.outcome) << '\n';
  const AlignedPair aligned = align(g0, g1, r);
  fs::create_directories(a.out);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const BlendedMesh out = blend(aligned, times[k], fusion);
    save_obj(out.mesh, fs::path(a.out) / ("blend_t" + tokens[k] + ".obj"));
  }
  return 0;
}

int run_validate(const std::string& path) {
  const TriMesh mesh = load_obj(path);
  const ManifoldReport rep = validate_watertight_manifold(mesh);
  if (rep.ok) {
    std::cout << "pass: " << path << " is a watertight 2-manifold (" << mesh.vertex_count()
              << " vertices, " << mesh.face_count() << " faces)\n";
    return 0;
  }
  std::cout << "fail: " << path << '\n';
  for (const auto& [a, b] : rep.boundary_edges) std::cout << "boundary edge " << a << ' ' << b << '\n';
  for (const auto& [a, b] : rep.nonmanifold_edges) std::cout << "non-manifold edge " << a << ' ' << b << '\n';
  for (std::size_t v : rep.nonmanifold_vertices) std::cout << "non-manifold vertex " << v << '\n';
  for (std::size_t v : rep.isolated_vertices) std::cout << "isolated vertex " << v << '\n';
  return kExitInvalid;
}

int run_eval(const EvalArgs& a) {
  const Dataset data = load_dataset(a.data);
  const CorrespondenceParams params = load_correspondence(a.model);
  const CorrespondenceMetrics m = eval_correspondence(params, data, a.samples, a.seed);
  std::ostringstream out;
  write_metrics(out, m);
  write_text(a.out, out.str());
  return 0;
}

void add_train_flags(CLI::App* cmd, TrainArgs& a) {
  cmd->add_option("--data", a.data, "dataset directory")->required();
  cmd->add_option("--out", a.out, "checkpoint to write")->required();
  cmd->add_option("--config", a.config, "key=value config file");
  cmd->add_option("--history", a.history, "loss history CSV");
  cmd->add_option("--seed", a.seed);
  cmd->add_option("--steps", a.steps);
  cmd->add_option("--lr", a.lr, "learning rate");
  cmd->add_option("--checkpoint-every", a.checkpoint_every, "steps between checkpoints, 0 = off");
  cmd->add_option("--d", a.width, "feature width");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"meshblend: mesh correspondence and temporal blending"};
  app.require_subcommand(1, 1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic motion dataset");
  gen_cmd->add_option("--out", gen.out, "output directory")->required();
  gen_cmd->add_option("--sequences", gen.sequences)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--frames", gen.frames)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--shape", gen.shape)->check(CLI::IsMember({"icosphere", "torus"}));
  gen_cmd->add_option("--level", gen.level, "icosphere subdivision level")->check(CLI::Range(0, 6));
  gen_cmd->add_option("--grid", gen.grid, "torus grid size")->check(CLI::Range(3, 512));
  gen_cmd->add_option("--amplitude", gen.amplitude)->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--split-ratio", gen.split_ratio);
  gen_cmd->add_option("--seed", gen.seed);

  TrainArgs corr_args;
  auto* corr_cmd = app.add_subcommand("train-corr", "train the correspondence network");
  add_train_flags(corr_cmd, corr_args);
  corr_cmd->add_option("--K", corr_args.iterations, "message-passing iterations");

  TrainArgs blend_args;
  auto* blend_train_cmd = app.add_subcommand("train-blend", "train the temporal fusion network");
  add_train_flags(blend_train_cmd, blend_args);
  blend_train_cmd->add_option("--mode", blend_args.mode, "oracle or predicted alignment")
      ->check(CLI::IsMember({"oracle", "predicted"}));
  blend_train_cmd->add_option("--corr-model", blend_args.corr_model);

  CorrespondArgs cor;
  auto* cor_cmd = app.add_subcommand("correspond", "match the vertices of two meshes");
  cor_cmd->add_option("--g0", cor.g0)->required();
  cor_cmd->add_option("--g1", cor.g1)->required();
  cor_cmd->add_option("--model", cor.model)->required();
  cor_cmd->add_option("--out", cor.out, "report file, stdout if omitted");

  BlendArgs bl;
  auto* bl_cmd = app.add_subcommand("blend", "predict meshes at the given times");
  bl_cmd->add_option("--g0", bl.g0)->required();
  bl_cmd->add_option("--g1", bl.g1)->required();
  bl_cmd->add_option("--corr-model", bl.corr_model)->required();
  bl_cmd->add_option("--fusion-model", bl.fusion_model)->required();
  bl_cmd->add_option("--t", bl.t, "comma-separated times")->required();
  bl_cmd->add_option("--out", bl.out, "output directory")->required();

  std::string mesh_path;
  auto* val_cmd = app.add_subcommand("validate", "check that a mesh is a watertight 2-manifold");
  val_cmd->add_option("--mesh", mesh_path)->required();

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "correspondence metrics on the test split");
  eval_cmd->add_option("--data", ev.data)->required();
  eval_cmd->add_option("--model", ev.model)->required();
  eval_cmd->add_option("--samples", ev.samples);
  eval_cmd->add_option("--seed", ev.seed);
  eval_cmd->add_option("--out", ev.out, "metrics file, stdout if omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (*gen_cmd) return run_gen_data(gen);
    if (*corr_cmd) return run_train_corr(corr_args);
    if (*blend_train_cmd) return run_train_blend(blend_args);
    if (*cor_cmd) return run_correspond(cor);
    if (*bl_cmd) return run_blend(bl);
    if (*val_cmd) return run_validate(mesh_path);
    if (*eval_cmd) return run_eval(ev);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

#include "doctest.h"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "meshblend/config.hpp"
#include "meshblend/dataset.hpp"
#include "meshblend/losses.hpp"
#include "meshblend/shapes.hpp"
#include "meshblend/training.hpp"
#include "test_support.hpp"

using namespace meshblend;
using meshblend::testing::random_matrix;

namespace {

Dataset small_dataset(std::uint64_t seed, std::size_t sequences = 3, std::size_t frames = 5) {
  DatasetSpec spec;
  spec.sequences = sequences;
  spec.frames = frames;
  spec.level = 0;
  spec.split_ratio = 0.5;
  Rng rng(seed);
  return generate_synthetic_dataset(spec, rng);
}

CorrespondenceParams small_corr(std::uint64_t seed) {
  CorrespondenceConfig c;
  c.iterations = 2;
  c.width = 6;
  c.hidden1 = 6;
  c.hidden2 = 6;
  c.seed = seed;
  return CorrespondenceParams::initialize(c);
}

FusionParams small_fusion(std::uint64_t seed) {
  FusionConfig c;
  c.width = 6;
  c.seed = seed;
  return FusionParams::initialize(c);
}

bool same_tensors(std::vector<Matrix*> a, std::vector<Matrix*> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(*a[i] == *b[i])) return false;
  return true;
}

}  // namespace

TEST_CASE("correspondence loss") {
  const TriMesh k4 = shapes::tetrahedron();
  const Matrix& a = k4.adjacency();
  // Frozen from tests/oracles/frozen_values.py.
  CHECK(std::abs(correspondence_loss(Matrix(4, 4, 0.25), a, a) - 6.928203230275509) < 1e-12);
  CHECK(std::abs(correspondence_loss(Matrix(4, 4, 0.25), a, a) - 4.0 * std::sqrt(3.0)) < 1e-12);

  Rng rng(2);
  const TriMesh ico = shapes::icosahedron();
  for (int trial = 0; trial < 10; ++trial) {
    const Permutation p = meshblend::testing::random_permutation(12, rng);
    const TriMesh g1 = apply_permutation(ico, p);
    CHECK(correspondence_loss(p.matrix(), ico.adjacency(), g1.adjacency()) == 0.0);
  }
  CHECK(correspondence_loss(Matrix::identity(12), ico.adjacency(), ico.adjacency()) == 0.0);
}

TEST_CASE("chamfer loss") {
  CHECK(chamfer_loss(Matrix{{0, 0, 0}}, Matrix{{1, 0, 0}, {0, 0, 0}}) == 0.5);
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = random_matrix(1 + rng.below(9), 3, rng);
    const Matrix y = random_matrix(1 + rng.below(9), 3, rng);
    CHECK(chamfer_loss(x, x) == 0.0);
    CHECK(chamfer_loss(x, y) == chamfer_loss(y, x));
    CHECK(chamfer_loss(x, y) >= 0.0);
  }
  CHECK_THROWS_AS(chamfer_loss(Matrix(0, 3), Matrix(2, 3)), std::invalid_argument);
}

TEST_CASE("correspondence sampling") {
  const Dataset data = small_dataset(1);
  const auto pool = data.training_pool();
  Rng a(7), b(7);
  for (int k = 0; k < 10; ++k) {
    const CorrespondenceSample x = sample_correspondence_batch(data, pool, a);
    const CorrespondenceSample y = sample_correspondence_batch(data, pool, b);
    CHECK(x.p == y.p);
    CHECK(x.g1.vertices() == y.g1.vertices());
    const Matrix pm = x.p.matrix();
    CHECK(x.g1.adjacency() == matmul(matmul(pm, x.g0.adjacency()), transpose(pm)));
    CHECK(x.g1.vertices() == matmul(pm, x.g0.vertices()));
  }

  // Every permutation of a 4-vertex mesh shows up.
  Dataset tiny;
  MotionSequence seq;
  seq.base = shapes::tetrahedron();
  seq.frames = {seq.base.vertices()};
  seq.frame_indices = {0};
  tiny.sequences.push_back(seq);
  const std::vector<std::size_t> all{0};
  Rng rng(11);
  std::set<std::vector<std::size_t>> seen;
  for (int k = 0; k < 1000; ++k) {
    const Permutation p = sample_correspondence_batch(tiny, all, rng).p;
    std::vector<std::size_t> v(4);
    for (std::size_t i = 0; i < 4; ++i) v[i] = p[i];
    seen.insert(v);
  }
  CHECK(seen.size() == 24);
}

TEST_CASE("task times") {
  CHECK(task_time(BlendTask::Interpolate, 0, 1, 2) == 0.5);
  CHECK(task_time(BlendTask::Future, 0, 1, 2) == 2.0);
  CHECK(task_time(BlendTask::Past, 0, 1, 2) == -1.0);
  CHECK(task_time(BlendTask::Interpolate, 2, 5, 8) == 0.5);
}

TEST_CASE("blend triplets") {
  const Dataset data = small_dataset(2);
  const auto pool = data.training_pool();
  Rng rng(5);
  for (BlendTask task : {BlendTask::Interpolate, BlendTask::Future, BlendTask::Past}) {
    const TrainingTriplet tr = sample_blend_triplet(data, pool, rng, task);
    CHECK(tr.task == task);
    CHECK(tr.frames[0] < tr.frames[1]);
    CHECK(tr.frames[1] < tr.frames[2]);
    CHECK(tr.t == task_time(task, tr.t_a, tr.t_b, tr.t_c));
    CHECK(tr.input1.adjacency() ==
          matmul(matmul(tr.input1_perm.matrix(), tr.input0.adjacency()), transpose(tr.input1_perm.matrix())));
  }
}

TEST_CASE("synthetic dataset contracts") {
  DatasetSpec spec;
  spec.sequences = 5;
  spec.frames = 6;
  spec.level = 1;
  Rng rng(9);
  const Dataset data = generate_synthetic_dataset(spec, rng);
  CHECK(data.train.size() == 4);
  CHECK(data.test.size() == 1);
  for (const MotionSequence& seq : data.sequences) {
    REQUIRE(seq.frame_count() == 6);
    for (std::size_t k = 0; k < seq.frame_count(); ++k) {
      CHECK(validate_watertight_manifold(seq.frame(k)).ok);
      CHECK(all_finite(seq.frames[k]));
      if (k > 0) {
        CHECK(seq.frame_indices[k] > seq.frame_indices[k - 1]);
        for (std::size_t v = 0; v < seq.base.vertex_count(); ++v) {
          double d2 = 0.0;
          for (std::size_t c = 0; c < 3; ++c) {
            const double d = seq.frames[k](v, c) - seq.frames[k - 1](v, c);
            d2 += d * d;
          }
          CHECK(std::sqrt(d2) <= spec.max_step + 1e-12);
        }
      }
    }
  }

  DatasetSpec frozen = spec;
  frozen.amplitude = 0.0;
  const Dataset still = generate_synthetic_dataset(frozen, rng);
  for (const Matrix& f : still.sequences[0].frames) CHECK(f == still.sequences[0].frames[0]);

  DatasetSpec torus = spec;
  torus.shape = BaseShape::Torus;
  torus.sequences = 1;
  torus.split_ratio = 0.2;
  const Dataset t = generate_synthetic_dataset(torus, rng);
  CHECK(t.sequences[0].base.vertex_count() == 64);
  CHECK(t.train.size() == 1);
  CHECK(t.test.empty());
  CHECK(t.testing_pool() == std::vector<std::size_t>{0});
}

TEST_CASE("zero learning rate leaves parameters untouched") {
  const Dataset data = small_dataset(3);
  TrainConfig cfg;
  cfg.steps = 3;
  cfg.optimizer.kind = OptimizerKind::GradientDescent;
  cfg.optimizer.learning_rate = 0.0;
  CorrespondenceParams c0 = small_corr(1);
  CorrespondenceTraining ct = train_correspondence(data, cfg, c0);
  CHECK(same_tensors(ct.params.tensors(), c0.tensors()));
  FusionParams f0 = small_fusion(1);
  FusionTraining ft = train_blending(data, cfg, f0, AlignmentMode::Oracle);
  CHECK(same_tensors(ft.params.tensors(), f0.tensors()));
}

TEST_CASE("training replays exactly") {
  const Dataset data = small_dataset(4);
  TrainConfig cfg;
  cfg.steps = 6;
  cfg.seed = 12;
  cfg.optimizer.learning_rate = 1e-2;
  CorrespondenceTraining a = train_correspondence(data, cfg, small_corr(2));
  CorrespondenceTraining b = train_correspondence(data, cfg, small_corr(2));
  CHECK(same_tensors(a.params.tensors(), b.params.tensors()));
  REQUIRE(a.history.size() == 6);
  for (std::size_t k = 0; k < 6; ++k) CHECK(a.history[k].loss == b.history[k].loss);

  FusionTraining fa = train_blending(data, cfg, small_fusion(2), AlignmentMode::Oracle);
  FusionTraining fb = train_blending(data, cfg, small_fusion(2), AlignmentMode::Oracle);
  CHECK(same_tensors(fa.params.tensors(), fb.params.tensors()));
  CHECK(fa.history[0].task == "interpolate");
  CHECK(fa.history[1].task == "future");
  CHECK(fa.history[2].task == "past");

  FusionTraining fp = train_blending(data, cfg, small_fusion(2), AlignmentMode::Predicted, &a.params);
  CHECK(fp.history.size() == 6);
  CHECK_THROWS_AS(train_blending(data, cfg, small_fusion(2), AlignmentMode::Predicted), std::invalid_argument);

  std::ostringstream m1, m2;
  write_metrics(m1, eval_correspondence(a.params, data, 4, 3));
  write_metrics(m2, eval_correspondence(a.params, data, 4, 3));
  CHECK(m1.str() == m2.str());
}

TEST_CASE("divergence is reported") {
  const Dataset data = small_dataset(5);
  TrainConfig cfg;
  cfg.steps = 20;
  cfg.optimizer.kind = OptimizerKind::GradientDescent;
  cfg.optimizer.learning_rate = 1e300;
  CHECK_THROWS_AS(train_blending(data, cfg, small_fusion(3), AlignmentMode::Oracle), TrainingDiverged);
}

TEST_CASE("history csv") {
  std::ostringstream out;
  write_history_csv(out, {{0, "interpolate", 0.5}, {1, "future", 0.25}});
  CHECK(out.str().find("interpolate") != std::string::npos);
  CHECK(out.str().find("0.25") != std::string::npos);
}

TEST_CASE("config files") {
  std::istringstream in(
      "# toy\nsteps = 40\nlearning_rate = 0.003\nK = 3\nsinkhorn_tau = 0.1\n"
      "learn_lambdas = true\ncorr_loss_target = sigmoid\nfusion_d = 12\noptimizer = gd\n");
  const ConfigMap m = parse_config(in);
  TrainConfig train;
  CorrespondenceConfig corr;
  FusionConfig fusion;
  apply_config(m, &train, &corr, &fusion);
  CHECK(train.steps == 40);
  CHECK(train.optimizer.learning_rate == 0.003);
  CHECK(train.optimizer.kind == OptimizerKind::GradientDescent);
  CHECK(train.corr_target == CorrespondenceTarget::Sigmoid);
  CHECK(corr.iterations == 3);
  CHECK(corr.sinkhorn_tau == 0.1);
  CHECK(corr.learn_lambdas);
  CHECK(fusion.width == 12);

  // Null targets ignore their keys.
  CHECK_NOTHROW(apply_config(m, &train, nullptr, nullptr));

  std::istringstream dup("steps = 1\nsteps = 2\n");
  CHECK_THROWS(parse_config(dup));
  std::istringstream unknown("bogus = 1\n");
  CHECK_THROWS_AS(apply_config(parse_config(unknown), &train, &corr, &fusion), std::invalid_argument);
  std::istringstream bad("steps = many\n");
  CHECK_THROWS_AS(apply_config(parse_config(bad), &train, &corr, &fusion), std::invalid_argument);
}

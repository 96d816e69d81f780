#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "meshblend/mesh.hpp"
#include "meshblend/rng.hpp"

namespace meshblend {

enum class BaseShape { Icosphere, Torus };

BaseShape parse_base_shape(const std::string& name);
const char* to_string(BaseShape shape);

struct DatasetSpec {
  std::size_t sequences = 4;
  std::size_t frames = 10;
  BaseShape shape = BaseShape::Icosphere;
  int level = 1;              // icosphere subdivision level
  std::size_t grid = 8;       // torus grid is grid x grid
  double amplitude = 0.3;     // deformation strength bound, 0 freezes motion
  double max_step = 0.15;     // cap on any vertex's frame-to-frame displacement
  double split_ratio = 0.8;   // fraction of sequences in the training split
};

struct Dataset {
  std::vector<MotionSequence> sequences;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;

  // Training indices, or every sequence when the split is empty.
  std::vector<std::size_t> training_pool() const;
  std::vector<std::size_t> testing_pool() const;
};

TriMesh make_base_shape(const DatasetSpec& spec);

// Smooth bend / twist / anisotropic-scale animation of one base mesh. Time
// steps shrink until the per-frame displacement respects spec.max_step.
MotionSequence generate_sequence(const TriMesh& base, const DatasetSpec& spec, Rng& rng);

Dataset generate_synthetic_dataset(const DatasetSpec& spec, Rng& rng);

// Layout: DIR/seq_%05d/frame_%05d.obj, DIR/seq_%05d/sequence.meta (frame
// count, then one frame index per line), DIR/split.txt (`seq_%05d train|test`).
void save_sequence(const MotionSequence& seq, const std::filesystem::path& dir);
MotionSequence load_sequence(const std::filesystem::path& dir);
void save_dataset(const Dataset& data, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

std::string sequence_dir_name(std::size_t index);

struct CorrespondenceSample {
  TriMesh g0;
  TriMesh g1;  // apply_permutation(g0, p)
  Permutation p;
  std::size_t sequence = 0;
  std::size_t frame = 0;
};

// Uniform sequence from pool, uniform frame, uniform permutation.
CorrespondenceSample sample_correspondence_batch(const Dataset& data,
                                                 std::span<const std::size_t> pool, Rng& rng);

enum class BlendTask { Interpolate, Future, Past };

const char* to_string(BlendTask task);

// Time of the target frame relative to the two input frames:
// interpolate (tb-ta)/(tc-ta), future (tc-ta)/(tb-ta), past (ta-tb)/(tc-tb).
double task_time(BlendTask task, int t_a, int t_b, int t_c);

struct TrainingTriplet {
  std::size_t sequence = 0;
  std::array<std::size_t, 3> frames{};  // positions within the sequence, ascending
  int t_a = 0, t_b = 0, t_c = 0;          // frame indices
  BlendTask task = BlendTask::Interpolate;
  double t = 0.0;
  TriMesh input0;          // first input, at time 0
  TriMesh input1;          // second input at time 1, randomly relabeled
  Permutation input1_perm;  // input1 = apply_permutation(unpermuted, input1_perm)
  TriMesh target;
};

// Three distinct frames of a sequence with at least three frames; sequences
// that are too short are skipped.
TrainingTriplet sample_blend_triplet(const Dataset& data, std::span<const std::size_t> pool,
                                     Rng& rng, BlendTask task);

}  // namespace meshblend

#include "meshblend/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "meshblend/obj_io.hpp"
#include "meshblend/shapes.hpp"

namespace meshblend {

namespace fs = std::filesystem;

BaseShape parse_base_shape(const std::string& name) {
  if (name == "icosphere") return BaseShape::Icosphere;
  if (name == "torus") return BaseShape::Torus;
  throw std::invalid_argument("unknown shape '" + name + "' (expected icosphere or torus)");
}

const char* to_string(BaseShape shape) {
  return shape == BaseShape::Icosphere ? "icosphere" : "torus";
}

std::vector<std::size_t> Dataset::training_pool() const {
  if (!train.empty()) return train;
  std::vector<std::size_t> all(sequences.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return all;
}

std::vector<std::size_t> Dataset::testing_pool() const {
  return test.empty() ? training_pool() : test;
}

TriMesh make_base_shape(const DatasetSpec& spec) {
  return spec.shape == BaseShape::Icosphere ? shapes::icosphere(spec.level)
                                            : shapes::torus_grid(spec.grid, spec.grid);
}

namespace {

struct Wave {
  double amp = 0.0, freq = 1.0, phase = 0.0;
  double at(double s) const { return amp * std::sin(freq * s + phase); }
};

struct Motion {
  std::array<Wave, 3> scale;
  Wave twist;
  Wave bend;
};

Motion draw_motion(double amplitude, Rng& rng) {
  auto wave = [&](double lo, double hi) {
    Wave w;
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    w.amp = sign * amplitude * rng.uniform(lo, hi);
    w.freq = rng.uniform(0.5, 1.5);
    w.phase = rng.uniform(0.0, 2.0 * M_PI);
    return w;
  };
  Motion m;
  for (auto& s : m.scale) s = wave(0.0, 0.5);
  m.twist = wave(0.5 * M_PI / 2.0, M_PI / 2.0);
  m.bend = wave(0.5, 1.0);
  return m;
}

Matrix deform(const Matrix& base, const Motion& m, double s) {
  Matrix out(base.rows(), 3);
  const double sx = 1.0 + m.scale[0].at(s);
  const double sy = 1.0 + m.scale[1].at(s);
  const double sz = 1.0 + m.scale[2].at(s);
  const double twist = m.twist.at(s);
  const double bend = m.bend.at(s);
  for (std::size_t i = 0; i < base.rows(); ++i) {
    double x = base(i, 0) * sx;
    double y = base(i, 1) * sy;
    double z = base(i, 2) * sz;
    const double th = twist * y;
    const double xt = x * std::cos(th) - z * std::sin(th);
    z = x * std::sin(th) + z * std::cos(th);
    x = xt;
    const double g = bend * y;
    const double xb = x * std::cos(g) - y * std::sin(g);
    y = x * std::sin(g) + y * std::cos(g);
    x = xb;
    out(i, 0) = x;
    out(i, 1) = y;
    out(i, 2) = z;
  }
  return out;
}

double max_step(const std::vector<Matrix>& frames) {
  double m = 0.0;
  for (std::size_t k = 1; k < frames.size(); ++k) {
    for (std::size_t i = 0; i < frames[k].rows(); ++i) {
      double s = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double d = frames[k](i, c) - frames[k - 1](i, c);
        s += d * d;
      }
      m = std::max(m, std::sqrt(s));
    }
  }
  return m;
}

}  // namespace

MotionSequence generate_sequence(const TriMesh& base, const DatasetSpec& spec, Rng& rng) {
  if (spec.frames == 0) throw std::invalid_argument("generate_sequence: zero frames");
  if (!(spec.max_step > 0.0)) throw std::invalid_argument("generate_sequence: max_step must be positive");
  const Motion motion = draw_motion(spec.amplitude, rng);
  const double start = rng.uniform(0.0, 2.0 * M_PI);
  double dt = 0.25;
  std::vector<Matrix> frames;
  for (int attempt = 0; attempt < 60; ++attempt) {
    frames.clear();
    for (std::size_t k = 0; k < spec.frames; ++k)
      frames.push_back(deform(base.vertices(), motion, start + dt * static_cast<double>(k)));
    if (max_step(frames) <= spec.max_step) break;
    dt *= 0.5;
  }
  if (max_step(frames) > spec.max_step) {
    throw std::runtime_error("generate_sequence: cannot satisfy displacement cap");
  }
  MotionSequence seq;
  seq.base = base.with_vertices(frames.front());
  seq.frames = std::move(frames);
  seq.frame_indices.resize(spec.frames);
  for (std::size_t k = 0; k < spec.frames; ++k) seq.frame_indices[k] = static_cast<int>(k);
  return seq;
}

Dataset generate_synthetic_dataset(const DatasetSpec& spec, Rng& rng) {
  if (spec.sequences == 0 || spec.frames == 0) {
    throw std::invalid_argument("generate_synthetic_dataset: need at least one sequence and frame");
  }
  if (!(spec.split_ratio > 0.0 && spec.split_ratio < 1.0)) {
    throw std::invalid_argument("generate_synthetic_dataset: split ratio must be in (0,1)");
  }
  const TriMesh base = make_base_shape(spec);
  Dataset data;
  for (std::size_t i = 0; i < spec.sequences; ++i)
    data.sequences.push_back(generate_sequence(base, spec, rng));
  const auto order = rng.permutation(spec.sequences);
  const auto n_train = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(spec.split_ratio * static_cast<double>(spec.sequences))));
  for (std::size_t k = 0; k < order.size(); ++k) (k < n_train ? data.train : data.test).push_back(order[k]);
  std::sort(data.train.begin(), data.train.end());
  std::sort(data.test.begin(), data.test.end());
  return data;
}

std::string sequence_dir_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "seq_%05zu", index);
  return buf;
}

void save_sequence(const MotionSequence& seq, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t k = 0; k < seq.frame_count(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%05d.obj", seq.frame_indices[k]);
    save_obj(seq.frame(k), dir / name);
  }
  std::ofstream meta(dir / "sequence.meta", std::ios::binary);
  if (!meta) throw std::runtime_error("cannot write " + (dir / "sequence.meta").string());
  meta << seq.frame_count() << '\n';
  for (int idx : seq.frame_indices) meta << idx << '\n';
}

MotionSequence load_sequence(const fs::path& dir) {
  std::ifstream meta(dir / "sequence.meta");
  if (!meta) throw std::runtime_error("cannot open " + (dir / "sequence.meta").string());
  std::size_t count = 0;
  if (!(meta >> count) || count == 0) {
    throw std::runtime_error("bad frame count in " + (dir / "sequence.meta").string());
  }
  MotionSequence seq;
  for (std::size_t k = 0; k < count; ++k) {
    int idx = 0;
    if (!(meta >> idx)) throw std::runtime_error("truncated " + (dir / "sequence.meta").string());
    if (!seq.frame_indices.empty() && idx <= seq.frame_indices.back()) {
      throw std::runtime_error("frame indices not increasing in " + (dir / "sequence.meta").string());
    }
    seq.frame_indices.push_back(idx);
  }
  for (std::size_t k = 0; k < count; ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%05d.obj", seq.frame_indices[k]);
    TriMesh m = load_obj(dir / name);
    if (k == 0) {
      seq.base = m;
    } else if (m.vertex_count() != seq.base.vertex_count() || m.faces() != seq.base.faces()) {
      throw std::runtime_error("frame " + std::string(name) + " in " + dir.string() +
                               " does not share the sequence connectivity");
    }
    seq.frames.push_back(m.vertices());
  }
  return seq;
}

void save_dataset(const Dataset& data, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < data.sequences.size(); ++i)
    save_sequence(data.sequences[i], dir / sequence_dir_name(i));
  std::ofstream split(dir / "split.txt", std::ios::binary);
  if (!split) throw std::runtime_error("cannot write " + (dir / "split.txt").string());
  std::map<std::size_t, const char*> role;
  for (std::size_t i : data.train) role[i] = "train";
  for (std::size_t i : data.test) role[i] = "test";
  for (const auto& [i, r] : role) split << sequence_dir_name(i) << ' ' << r << '\n';
}

Dataset load_dataset(const fs::path& dir) {
  std::ifstream split(dir / "split.txt");
  if (!split) throw std::runtime_error("cannot open " + (dir / "split.txt").string());
  Dataset data;
  std::string name;
  std::string role;
  while (split >> name >> role) {
    const std::size_t index = data.sequences.size();
    data.sequences.push_back(load_sequence(dir / name));
    if (role == "train") {
      data.train.push_back(index);
    } else if (role == "test") {
      data.test.push_back(index);
    } else {
      throw std::runtime_error("bad split role '" + role + "' in " + (dir / "split.txt").string());
    }
  }
  if (data.sequences.empty()) throw std::runtime_error("empty dataset at " + dir.string());
  return data;
}

CorrespondenceSample sample_correspondence_batch(const Dataset& data,
                                                 std::span<const std::size_t> pool, Rng& rng) {
  if (pool.empty() || data.sequences.empty()) {
    throw std::invalid_argument("sample_correspondence_batch: empty dataset");
  }
  CorrespondenceSample s;
  s.sequence = pool[rng.below(pool.size())];
  const MotionSequence& seq = data.sequences.at(s.sequence);
  s.frame = rng.below(seq.frame_count());
  s.g0 = seq.frame(s.frame);
  s.p = Permutation(rng.permutation(s.g0.vertex_count()));
  s.g1 = apply_permutation(s.g0, s.p);
  return s;
}

const char* to_string(BlendTask task) {
  switch (task) {
    case BlendTask::Interpolate:
      return "interpolate";
    case BlendTask::Future:
      return "future";
    case BlendTask::Past:
      return "past";
  }
  return "unknown";
}

double task_time(BlendTask task, int t_a, int t_b, int t_c) {
  if (!(t_a < t_b && t_b < t_c)) throw std::invalid_argument("task_time: need t_a < t_b < t_c");
  const auto a = static_cast<double>(t_a);
  const auto b = static_cast<double>(t_b);
  const auto c = static_cast<double>(t_c);
  switch (task) {
    case BlendTask::Interpolate:
      return (b - a) / (c - a);
    case BlendTask::Future:
      return (c - a) / (b - a);
    case BlendTask::Past:
      return (a - b) / (c - b);
  }
  throw std::logic_error("task_time: unknown task");
}

TrainingTriplet sample_blend_triplet(const Dataset& data, std::span<const std::size_t> pool,
                                     Rng& rng, BlendTask task) {
  std::vector<std::size_t> usable;
  for (std::size_t i : pool)
    if (data.sequences.at(i).frame_count() >= 3) usable.push_back(i);
  if (usable.empty()) {
    throw std::invalid_argument("sample_blend_triplet: no sequence with at least 3 frames");
  }
  TrainingTriplet tr;
  tr.sequence = usable[rng.below(usable.size())];
  const MotionSequence& seq = data.sequences[tr.sequence];
  const std::size_t f = seq.frame_count();
  std::array<std::size_t, 3> pick{rng.below(f), 0, 0};
  do pick[1] = rng.below(f);
  while (pick[1] == pick[0]);
  do pick[2] = rng.below(f);
  while (pick[2] == pick[0] || pick[2] == pick[1]);
  std::sort(pick.begin(), pick.end());
  tr.frames = pick;
  tr.t_a = seq.frame_indices[pick[0]];
  tr.t_b = seq.frame_indices[pick[1]];
  tr.t_c = seq.frame_indices[pick[2]];
  tr.task = task;
  tr.t = task_time(task, tr.t_a, tr.t_b, tr.t_c);
  std::size_t first = 0;
  std::size_t second = 0;
  std::size_t target = 0;
  switch (task) {
    case BlendTask::Interpolate:
      first = pick[0], second = pick[2], target = pick[1];
      break;
    case BlendTask::Future:
      first = pick[0], second = pick[1], target = pick[2];
      break;
    case BlendTask::Past:
      first = pick[1], second = pick[2], target = pick[0];
      break;
  }
  tr.input0 = seq.frame(first);
  tr.target = seq.frame(target);
  tr.input1_perm = Permutation(rng.permutation(tr.input0.vertex_count()));
  tr.input1 = apply_permutation(seq.frame(second), tr.input1_perm);
  return tr;
}

}  // namespace meshblend

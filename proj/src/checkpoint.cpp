#include "meshblend/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "json.hpp"

namespace meshblend {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

void write_tensor(std::ostream& out, const Matrix& m) {
  for (double x : m.data()) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
    unsigned char bytes[8];
    for (int k = 0; k < 8; ++k) bytes[k] = static_cast<unsigned char>(bits >> (8 * k));
    out.write(reinterpret_cast<const char*>(bytes), 8);
  }
}

void read_tensor(std::istream& in, Matrix& m, const fs::path& path) {
  for (double& x : m.data()) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
      throw CheckpointError(path.string() + ": truncated tensor data");
    }
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
    x = std::bit_cast<double>(bits);
  }
}

void write_container(const fs::path& path, const char* magic, const json& header,
                     const std::vector<const Matrix*>& tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write " + path.string());
  out << magic << header.dump() << '\n';
  for (const Matrix* m : tensors) write_tensor(out, *m);
  if (!out) throw CheckpointError("write failed: " + path.string());
}

json read_header(std::ifstream& in, const char* magic, const fs::path& path) {
  if (!in) throw CheckpointError("cannot open " + path.string());
  const std::size_t len = std::strlen(magic);
  std::string got(len, '\0');
  if (!in.read(got.data(), static_cast<std::streamsize>(len)) || got != magic) {
    throw CheckpointError(path.string() + ": bad magic, expected " + magic);
  }
  std::string line;
  if (!std::getline(in, line)) throw CheckpointError(path.string() + ": missing header");
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw CheckpointError(path.string() + ": malformed header: " + e.what());
  }
}

void expect_end(std::ifstream& in, const fs::path& path) {
  if (in.peek() != std::char_traits<char>::eof()) {
    throw CheckpointError(path.string() + ": trailing data after tensors (shape mismatch?)");
  }
}

}  // namespace

void save_correspondence(const CorrespondenceParams& params, const fs::path& path) {
  params.validate();
  const auto& c = params.config;
  json h;
  h["K"] = c.iterations;
  h["d"] = c.width;
  h["widths"] = {3, c.hidden1, c.hidden2, c.width};
  h["lambda_s"] = c.lambda_s;
  h["lambda_r"] = c.lambda_r;
  h["learn_lambdas"] = c.learn_lambdas;
  h["sinkhorn_iters"] = c.sinkhorn_iters;
  h["sinkhorn_tau"] = c.sinkhorn_tau;
  h["seed"] = c.seed;
  write_container(path, kCorrespondenceMagic, h, params.tensors());
}

CorrespondenceParams load_correspondence(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  const json h = read_header(in, kCorrespondenceMagic, path);
  CorrespondenceConfig c;
  try {
    c.iterations = h.at("K").get<int>();
    c.width = h.at("d").get<int>();
    const auto widths = h.at("widths").get<std::vector<int>>();
    if (widths.size() != 4 || widths[0] != 3 || widths[3] != c.width) {
      throw CheckpointError(path.string() + ": widths inconsistent with d");
    }
    c.hidden1 = widths[1];
    c.hidden2 = widths[2];
    c.lambda_s = h.at("lambda_s").get<double>();
    c.lambda_r = h.at("lambda_r").get<double>();
    c.learn_lambdas = h.value("learn_lambdas", true);
    c.sinkhorn_iters = h.at("sinkhorn_iters").get<int>();
    c.sinkhorn_tau = h.at("sinkhorn_tau").get<double>();
    c.seed = h.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw CheckpointError(path.string() + ": header field error: " + e.what());
  }
  CorrespondenceParams p = CorrespondenceParams::initialize(c);
  for (Matrix* m : p.tensors()) read_tensor(in, *m, path);
  expect_end(in, path);
  p.validate();
  return p;
}

void save_fusion(const FusionParams& params, const fs::path& path) {
  params.validate();
  json h;
  h["d"] = params.config.width;
  h["residual_layers"] = kResidualLayers;
  h["seed"] = params.config.seed;
  write_container(path, kFusionMagic, h, params.tensors());
}

FusionParams load_fusion(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  const json h = read_header(in, kFusionMagic, path);
  FusionConfig c;
  try {
    c.width = h.at("d").get<int>();
    c.seed = h.at("seed").get<std::uint64_t>();
    if (h.at("residual_layers").get<int>() != kResidualLayers) {
      throw CheckpointError(path.string() + ": unsupported residual layer count");
    }
  } catch (const json::exception& e) {
    throw CheckpointError(path.string() + ": header field error: " + e.what());
  }
  FusionParams p = FusionParams::initialize(c);
  for (Matrix* m : p.tensors()) read_tensor(in, *m, path);
  expect_end(in, path);
  return p;
}

}  // namespace meshblend

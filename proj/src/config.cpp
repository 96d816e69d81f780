#include "meshblend/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <stdexcept>

namespace meshblend {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T x{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw std::invalid_argument("config: bad value '" + value + "' for " + key);
  }
  return x;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("config: bad boolean '" + value + "' for " + key);
}

}  // namespace

ConfigMap parse_config(std::istream& in, const std::string& source) {
  ConfigMap out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(source + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument(source + ":" + std::to_string(lineno) + ": empty key");
    if (!out.emplace(key, value).second) {
      throw std::invalid_argument(source + ":" + std::to_string(lineno) + ": duplicate key " + key);
    }
  }
  return out;
}

ConfigMap load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_config(in, path.string());
}

void apply_config(const ConfigMap& config, TrainConfig* train, CorrespondenceConfig* corr,
                  FusionConfig* fusion) {
  for (const auto& [key, value] : config) {
    bool known = true;
    if (key == "seed") {
      const auto s = parse_number<std::uint64_t>(key, value);
      if (train) train->seed = s;
      if (corr) corr->seed = s;
      if (fusion) fusion->seed = s;
    } else if (key == "steps") {
      if (train) train->steps = parse_number<std::size_t>(key, value);
    } else if (key == "learning_rate") {
      if (train) train->optimizer.learning_rate = parse_number<double>(key, value);
    } else if (key == "optimizer") {
      if (train) train->optimizer.kind = parse_optimizer_kind(value);
    } else if (key == "beta1") {
      if (train) train->optimizer.beta1 = parse_number<double>(key, value);
    } else if (key == "beta2") {
      if (train) train->optimizer.beta2 = parse_number<double>(key, value);
    } else if (key == "epsilon") {
      if (train) train->optimizer.epsilon = parse_number<double>(key, value);
    } else if (key == "checkpoint_every") {
      if (train) train->checkpoint_every = parse_number<std::size_t>(key, value);
    } else if (key == "split_ratio") {
      if (train) train->split_ratio = parse_number<double>(key, value);
    } else if (key == "weight_interpolate") {
      if (train) train->task_weights[0] = parse_number<double>(key, value);
    } else if (key == "weight_future") {
      if (train) train->task_weights[1] = parse_number<double>(key, value);
    } else if (key == "weight_past") {
      if (train) train->task_weights[2] = parse_number<double>(key, value);
    } else if (key == "corr_loss_target") {
      if (train) train->corr_target = parse_correspondence_target(value);
    } else if (key == "K") {
      if (corr) corr->iterations = parse_number<int>(key, value);
    } else if (key == "d") {
      if (corr) corr->width = parse_number<int>(key, value);
    } else if (key == "hidden1") {
      if (corr) corr->hidden1 = parse_number<int>(key, value);
    } else if (key == "hidden2") {
      if (corr) corr->hidden2 = parse_number<int>(key, value);
    } else if (key == "lambda_s") {
      if (corr) corr->lambda_s = parse_number<double>(key, value);
    } else if (key == "lambda_r") {
      if (corr) corr->lambda_r = parse_number<double>(key, value);
    } else if (key == "learn_lambdas") {
      if (corr) corr->learn_lambdas = parse_bool(key, value);
    } else if (key == "sinkhorn_iters") {
      if (corr) corr->sinkhorn_iters = parse_number<int>(key, value);
    } else if (key == "sinkhorn_tau") {
      if (corr) corr->sinkhorn_tau = parse_number<double>(key, value);
    } else if (key == "fusion_d") {
      if (fusion) fusion->width = parse_number<int>(key, value);
    } else {
      known = false;
    }
    if (!known) throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

}  // namespace meshblend

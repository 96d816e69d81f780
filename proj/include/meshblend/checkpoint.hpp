#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "meshblend/correspondence.hpp"
#include "meshblend/fusion.hpp"

namespace meshblend {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kCorrespondenceMagic = "RBMPNN1";
inline constexpr const char* kFusionMagic = "FUSNET1";

// Container: magic, one-line JSON header, newline, then every tensor as
// row-major little-endian float64 in declaration order.
void save_correspondence(const CorrespondenceParams& params, const std::filesystem::path& path);
CorrespondenceParams load_correspondence(const std::filesystem::path& path);

void save_fusion(const FusionParams& params, const std::filesystem::path& path);
FusionParams load_fusion(const std::filesystem::path& path);

}  // namespace meshblend

#pragma once

#include "coae/autoencoder.hpp"

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace coae {

inline constexpr std::string_view checkpoint_magic = "COAE";
inline constexpr std::uint32_t checkpoint_format_version = 1;

// Binary layout, all integers and doubles little-endian:
//   "COAE" | u32 format version | u32 architecture version | u64 N | u8 power normalization
//   | u64 architecture digest | f64 linewidth_hz | f64 symbol_period_s | u64 seed
//   | u32 epochs_run | f64 final_loss | u32 tensor count
//   | tensors: u16 name length, name, u32 rows, u32 cols, rows*cols f64 (row-major)
//   | u64 FNV-1a checksum of every preceding byte
std::vector<std::uint8_t> serialize_model(const AeModel& model);
AeModel deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const AeModel& model, const std::filesystem::path& path);
AeModel load_model(const std::filesystem::path& path);

} // namespace coae

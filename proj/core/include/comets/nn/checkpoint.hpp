#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "comets/nn/layers.hpp"

namespace comets::nn {

inline constexpr char kCheckpointMagic[8] = {'C', 'O', 'M', 'E', 'T', 'S', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Serialises every parameter and buffer in `state` (f64, little-endian) plus
/// an opaque JSON config stored as the u8 entry "__config__".
std::string encode_checkpoint(const StateList& state, const nlohmann::json& config);

/// Reads the config entry without touching any model.
nlohmann::json decode_checkpoint_config(const std::string& bytes);

/// Fills `state` from the bytes. Names and shapes must match exactly; any
/// mismatch, bad magic, unknown version or truncation raises CheckpointError.
/// Returns the stored config.
nlohmann::json decode_checkpoint(const std::string& bytes, StateList& state);

void save_checkpoint(const std::filesystem::path& path, const StateList& state, const nlohmann::json& config);
nlohmann::json load_checkpoint(const std::filesystem::path& path, StateList& state);
nlohmann::json load_checkpoint_config(const std::filesystem::path& path);

/// FNV-1a 64 of a byte string, printed as 16 hex digits.
std::string checksum_hex(const std::string& bytes);

}  // namespace comets::nn

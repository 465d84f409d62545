#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adadata/numerics/tensor.hpp"

namespace adadata::num {

/// Serialized model container.
///
/// Binary layout, all integers and reals little-endian:
///
///     "ADCK"                magic, 4 bytes
///     u32                   format version (kCheckpointVersion)
///     str                   architecture tag ("monolstm" | "simul-lstm")
///     str                   configuration, JSON text
///     u64                   architecture fingerprint
///     u64                   optimizer updates applied so far
///     u32 n, n x str        source vocabulary (ids 4.., reserved ids implicit)
///     u32 n, n x str        target vocabulary
///     u32 n                 parameter count, then per parameter:
///         str name, u32 rank, rank x u64 extents, numel x f64 values
///
/// where str is a u32 byte length followed by the bytes. Parameters appear in
/// the owning model's fixed declaration order.
struct Checkpoint {
    std::string arch;
    std::string config_json;
    std::uint64_t fingerprint = 0;
    std::uint64_t train_steps = 0;
    std::vector<std::string> src_tokens;
    std::vector<std::string> tgt_tokens;
    std::vector<std::pair<std::string, Tensor>> params;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const Checkpoint &ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written checkpoint.
void write_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt);
Checkpoint read_checkpoint(const std::filesystem::path &path);

// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view bytes);

// Writes `contents` to `path` via temporary file + rename.
void write_file_atomic(const std::filesystem::path &path, std::string_view contents);

// Copies stored values into `params` by position, checking names and shapes.
void load_parameters(const std::vector<std::pair<std::string, Tensor>> &params,
                     const std::vector<std::pair<std::string, Tensor>> &stored);

} // namespace adadata::num

#pragma once

#include <iosfwd>
#include <string>

#include "bidd/denoiser/model.hpp"

namespace bidd {

/// Binary model checkpoint, all integers and floats little-endian:
///
///   magic    8 bytes  "BIDDCKPT"
///   version  u32      1
///   config   8 x u64  width, cond_widths[0..2], time_embed_dim, n_res_blocks,
///                     res_expand, t_max
///   count    u64      number of parameters
///   payload  count x f64
///   checksum u64      FNV-1a over every preceding byte
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const DenoiserModel& model, std::ostream& out);
void save_checkpoint(const DenoiserModel& model, const std::string& path);
/// Throws FormatError on bad magic, unknown version, count mismatch,
/// truncation or checksum failure.
DenoiserModel load_checkpoint(std::istream& in);
DenoiserModel load_checkpoint(const std::string& path);

}  // namespace bidd

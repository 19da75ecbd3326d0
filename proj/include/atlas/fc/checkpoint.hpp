#ifndef ATLAS_FC_CHECKPOINT_HPP
#define ATLAS_FC_CHECKPOINT_HPP

#include <filesystem>

#include "atlas/fc/train.hpp"

namespace atlas::fc {

// Single-file container: magic line, 8-byte little-endian JSON length, JSON
// header (format_version, spec, norm, train log, tensor directory), then the
// raw float64 tensor data in directory order. Bit-exact round trip.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace atlas::fc

#endif  // ATLAS_FC_CHECKPOINT_HPP

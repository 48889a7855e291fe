#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "sggv/nn/model.hpp"

namespace sggv::nn {

// Binary model checkpoint, all integers and floats little-endian:
//   "SGGV" | u16 version | u32 descriptor length | descriptor (UTF-8)
//   | u64 K | K x f64 params | K x f64 first moment | K x f64 second moment
//   | u64 step
inline constexpr std::uint16_t kCheckpointVersion = 1;

template <typename Real>
void write_checkpoint(std::ostream& os, const ModelState<Real>& model);
template <typename Real>
void save_checkpoint(const std::filesystem::path& path, const ModelState<Real>& model);

// Throws LoadError on bad magic, unsupported version, truncation or a K that
// does not match the stored architecture.
template <typename Real>
ModelState<Real> read_checkpoint(std::istream& is);
template <typename Real>
ModelState<Real> load_checkpoint(const std::filesystem::path& path);

}  // namespace sggv::nn

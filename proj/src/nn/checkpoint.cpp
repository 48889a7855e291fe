#include "sggv/nn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "sggv/common/error.hpp"

namespace sggv::nn {
namespace {

constexpr std::array<char, 4> kMagic{'S', 'G', 'G', 'V'};

template <typename U>
void put_le(std::ostream& os, U v) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i)
    bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& is) {
  std::array<unsigned char, sizeof(U)> bytes;
  if (!is.read(reinterpret_cast<char*>(bytes.data()), bytes.size()))
    throw LoadError("checkpoint truncated");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
  return v;
}

template <typename Real>
void put_reals(std::ostream& os, const std::vector<Real>& values) {
  for (Real r : values) put_le(os, std::bit_cast<std::uint64_t>(static_cast<double>(r)));
}

template <typename Real>
void get_reals(std::istream& is, std::vector<Real>& values) {
  for (auto& r : values) r = static_cast<Real>(std::bit_cast<double>(get_le<std::uint64_t>(is)));
}

}  // namespace

template <typename Real>
void write_checkpoint(std::ostream& os, const ModelState<Real>& model) {
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint16_t>(os, kCheckpointVersion);
  const std::string desc = model.architecture.descriptor();
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(desc.size()));
  os.write(desc.data(), static_cast<std::streamsize>(desc.size()));
  put_le<std::uint64_t>(os, model.parameter_count());
  put_reals(os, model.params);
  put_reals(os, model.first_moment);
  put_reals(os, model.second_moment);
  put_le<std::uint64_t>(os, model.step);
  if (!os) throw Error("failed writing checkpoint");
}

template <typename Real>
void save_checkpoint(const std::filesystem::path& path, const ModelState<Real>& model) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  write_checkpoint(os, model);
}

template <typename Real>
ModelState<Real> read_checkpoint(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic)
    throw LoadError("not a checkpoint: bad magic bytes");
  const auto version = get_le<std::uint16_t>(is);
  if (version != kCheckpointVersion)
    throw LoadError("unsupported checkpoint version " + std::to_string(version));
  const auto len = get_le<std::uint32_t>(is);
  std::string desc(len, '\0');
  if (!is.read(desc.data(), len)) throw LoadError("checkpoint truncated");
  Architecture arch = [&] {
    try {
      return Architecture::parse(desc);
    } catch (const ConfigError& e) {
      throw LoadError(std::string("checkpoint architecture invalid: ") + e.what());
    }
  }();
  const auto k = get_le<std::uint64_t>(is);
  if (k != arch.parameter_count())
    throw LoadError("checkpoint parameter count " + std::to_string(k) +
                    " does not match its architecture (" +
                    std::to_string(arch.parameter_count()) + ")");
  ModelState<Real> model(std::move(arch));
  get_reals(is, model.params);
  get_reals(is, model.first_moment);
  get_reals(is, model.second_moment);
  model.step = get_le<std::uint64_t>(is);
  return model;
}

template <typename Real>
ModelState<Real> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw LoadError("cannot open checkpoint " + path.string());
  return read_checkpoint<Real>(is);
}

template void write_checkpoint<float>(std::ostream&, const ModelState<float>&);
template void write_checkpoint<double>(std::ostream&, const ModelState<double>&);
template void save_checkpoint<float>(const std::filesystem::path&, const ModelState<float>&);
template void save_checkpoint<double>(const std::filesystem::path&, const ModelState<double>&);
template ModelState<float> read_checkpoint<float>(std::istream&);
template ModelState<double> read_checkpoint<double>(std::istream&);
template ModelState<float> load_checkpoint<float>(const std::filesystem::path&);
template ModelState<double> load_checkpoint<double>(const std::filesystem::path&);

}  // namespace sggv::nn

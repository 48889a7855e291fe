#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sggv/agg/aggregation.hpp"
#include "sggv/data/synthetic.hpp"
#include "sggv/nn/model.hpp"
#include "sggv/shape/edges.hpp"
#include "sggv/shape/jitter.hpp"

namespace sggv::harness {

enum class Pairing { Paired, Unpaired };
enum class Precision { Double, Float };

std::string to_string(Pairing p);
Pairing parse_pairing(const std::string& s);
std::string to_string(Precision p);
Precision parse_precision(const std::string& s);

// Either a generated synthetic dataset or a PACS-style folder on disk.
struct DatasetSource {
  data::DatasetSpec synthetic;
  std::filesystem::path folder;  // empty: use `synthetic`
  int image_size = 32;           // folder images are resized to this

  bool is_folder() const { return !folder.empty(); }
};

struct ExperimentConfig {
  DatasetSource dataset;
  int target_domain = 0;
  std::vector<agg::InputKind> inputs{agg::InputKind::Raw};
  shape::ShapeOp shape_op = shape::ShapeOp::Sobel;
  shape::JitterParams jitter;
  Pairing pairing = Pairing::Paired;
  agg::Strategy strategy = agg::DeepAll{};
  int iterations = 1000;
  int val_interval = 20;
  int batch_size = 16;
  nn::AdamConfig optimizer;
  std::uint64_t seed = 0;
  std::string architecture;  // descriptor; empty selects the default classifier
  Precision precision = Precision::Double;

  // L = (#domains - 1) x (#input kinds).
  std::size_t bundle_size(int domain_count) const;

  // Throws ConfigError for any inconsistency, including the voting threshold
  // against L. Checked before any training starts.
  void validate(int domain_count) const;
};

}  // namespace sggv::harness

#pragma once

#include <cstdint>
#include <filesystem>

#include "sggv/data/dataset.hpp"

namespace sggv::data {

struct FolderOptions {
  int image_size = 32;
  std::uint64_t seed = 0;
};

// Loads root/<domain>/<class>/<image>. Domains and classes are indexed by
// sorted directory name; every domain must have the same class set. Images
// are resized to image_size and split 70/10/20 with `seed`.
MultiDomainDataset load_image_folder(const std::filesystem::path& root,
                                     const FolderOptions& options);

// Writes the dataset as root/<domain>/<class>/<nnnnn>.png plus a
// manifest.csv with columns path,domain,class,split.
void export_dataset(const MultiDomainDataset& dataset, const std::filesystem::path& root);

}  // namespace sggv::data

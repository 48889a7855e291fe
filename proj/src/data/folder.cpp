#include "sggv/data/folder.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "sggv/common/error.hpp"
#include "sggv/common/rng.hpp"
#include "sggv/data/image_io.hpp"

namespace sggv::data {
namespace fs = std::filesystem;

namespace {

std::vector<std::string> sorted_subdirs(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory()) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".bmp";
}

}  // namespace

MultiDomainDataset load_image_folder(const fs::path& root, const FolderOptions& options) {
  if (!fs::is_directory(root)) throw LoadError("dataset root " + root.string() + " is not a directory");
  if (options.image_size < 1) throw ConfigError("image size must be positive");
  MultiDomainDataset ds;
  const auto domains = sorted_subdirs(root);
  if (domains.empty()) throw LoadError("no domain directories under " + root.string());

  for (std::size_t d = 0; d < domains.size(); ++d) {
    const fs::path ddir = root / domains[d];
    const auto classes = sorted_subdirs(ddir);
    if (d == 0) {
      ds.class_names = classes;
      if (classes.empty()) throw LoadError("domain " + domains[d] + " has no class directories");
    } else {
      for (const auto& c : ds.class_names)
        if (!std::binary_search(classes.begin(), classes.end(), c))
          throw LoadError("domain '" + domains[d] + "' is missing class '" + c + "'");
      for (const auto& c : classes)
        if (!std::binary_search(ds.class_names.begin(), ds.class_names.end(), c))
          throw LoadError("domain '" + domains[d] + "' has extra class '" + c +
                          "' not present in domain '" + domains[0] + "'");
    }
    DomainDataset dom;
    dom.domain = static_cast<int>(d);
    dom.name = domains[d];
    for (std::size_t c = 0; c < ds.class_names.size(); ++c) {
      const fs::path cdir = ddir / ds.class_names[c];
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(cdir))
        if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
      std::sort(files.begin(), files.end());
      if (files.empty()) throw LoadError("empty class directory " + cdir.string());
      for (const auto& f : files) {
        Example ex;
        ex.image = resize_bilinear(read_image(f), options.image_size, options.image_size);
        ex.label = static_cast<int>(c);
        dom.examples.push_back(std::move(ex));
      }
    }
    Rng split_rng = make_rng(options.seed, {0x5911, d});
    const auto splits = assign_splits(dom.examples.size(), split_rng);
    for (std::size_t i = 0; i < splits.size(); ++i) dom.examples[i].split = splits[i];
    ds.domains.push_back(std::move(dom));
  }
  return ds;
}

void export_dataset(const MultiDomainDataset& dataset, const fs::path& root) {
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw Error("cannot create " + root.string() + ": " + ec.message());
  std::ofstream manifest(root / "manifest.csv", std::ios::trunc);
  if (!manifest) throw Error("cannot write " + (root / "manifest.csv").string());
  manifest << "path,domain,class,split\n";
  for (const auto& dom : dataset.domains) {
    std::vector<int> counters(dataset.class_names.size(), 0);
    for (const auto& cls : dataset.class_names) {
      fs::create_directories(root / dom.name / cls, ec);
      if (ec) throw Error("cannot create " + (root / dom.name / cls).string() + ": " + ec.message());
    }
    for (const auto& ex : dom.examples) {
      const auto& cls = dataset.class_names[ex.label];
      char name[32];
      std::snprintf(name, sizeof(name), "%05d.png", counters[ex.label]++);
      const fs::path rel = fs::path(dom.name) / cls / name;
      write_png(root / rel, ex.image);
      manifest << rel.generic_string() << ',' << dom.name << ',' << cls << ','
               << to_string(ex.split) << '\n';
    }
  }
  if (!manifest) throw Error("failed writing manifest.csv");
}

}  // namespace sggv::data

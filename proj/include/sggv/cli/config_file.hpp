#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sggv/harness/config.hpp"

namespace sggv::cli {

// Flat key/value settings. Every key has a default; a config file or a flag
// may only set known keys, with a value of the default's JSON type.
using Settings = nlohmann::ordered_json;

Settings default_settings();

// Overlays `overrides` onto `base`. Throws ConfigError naming the first
// unknown key or mistyped value.
void merge_settings(Settings& base, const Settings& overrides, const std::string& origin);

// Reads a JSON object from `path` (ConfigError if unreadable or not an object).
Settings read_settings_file(const std::filesystem::path& path);

// "key=value": the value is parsed as JSON when possible, otherwise taken as
// a plain string.
Settings parse_assignment(const std::string& text);

data::DatasetSpec dataset_spec(const Settings& s);

// Everything except the target domain and tau resolution, which need the
// loaded dataset.
harness::ExperimentConfig experiment_config(const Settings& s);

// Resolves the "target" setting ("all", a domain name or an index) to domain
// indices.
std::vector<int> resolve_targets(const Settings& s, const data::MultiDomainDataset& dataset);

// Fills in the default tau (ceil(2L/3)) when the strategy votes and tau is 0.
void resolve_tau(Settings& s, int domain_count);

std::vector<agg::InputKind> parse_inputs(const std::string& csv);
std::vector<int> parse_int_list(const std::string& csv);

}  // namespace sggv::cli

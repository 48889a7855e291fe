#include "sggv/cli/config_file.hpp"

#include <fstream>
#include <sstream>

#include "sggv/common/error.hpp"

namespace sggv::cli {
namespace {

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  return out;
}

bool same_kind(const nlohmann::ordered_json& expected, const nlohmann::ordered_json& value) {
  if (expected.is_boolean()) return value.is_boolean();
  if (expected.is_string()) return value.is_string();
  if (expected.is_number_float()) return value.is_number();
  if (expected.is_number_integer()) return value.is_number_integer();
  return false;
}

std::string kind_name(const nlohmann::ordered_json& v) {
  if (v.is_boolean()) return "a boolean";
  if (v.is_string()) return "a string";
  if (v.is_number_float()) return "a number";
  return "an integer";
}

}  // namespace

Settings default_settings() {
  Settings s;
  // dataset
  s["data_folder"] = "";
  s["image_size"] = 32;
  s["classes"] = "circle,square,triangle";
  s["domains"] = "solid-color,stripes,checker,speckle-noise";
  s["examples_per_cell"] = 200;
  s["data_seed"] = 0;
  s["label_noise"] = 0.0;
  // experiment
  s["target"] = "all";
  s["inputs"] = "raw";
  s["shape_op"] = "sobel";
  s["pairing"] = "paired";
  s["strategy"] = "deep_all";
  s["tau"] = 0;
  s["taus"] = "";  // sweep-tau only
  s["vote_rule"] = "strict";
  s["agr_rand_sigma"] = 0.01;
  s["agr_rand_sigma_policy"] = "relative";
  s["pcgrad_shuffle"] = true;
  s["jitter_brightness"] = 0.8;
  s["jitter_contrast"] = 0.8;
  s["jitter_saturation"] = 0.8;
  s["jitter_hue"] = 0.5;
  s["iterations"] = 1000;
  s["val_interval"] = 20;
  s["batch_size"] = 16;
  s["lr"] = 1e-5;
  s["beta1"] = 0.9;
  s["beta2"] = 0.999;
  s["epsilon"] = 1e-8;
  s["weight_decay"] = 5e-5;
  s["seed"] = 0;
  s["architecture"] = "";
  s["precision"] = "double";
  return s;
}

void merge_settings(Settings& base, const Settings& overrides, const std::string& origin) {
  if (!overrides.is_object()) throw ConfigError(origin + ": expected a JSON object");
  for (auto it = overrides.begin(); it != overrides.end(); ++it) {
    if (!base.contains(it.key()))
      throw ConfigError(origin + ": unknown config key '" + it.key() + "'");
    if (!same_kind(base[it.key()], it.value()))
      throw ConfigError(origin + ": config key '" + it.key() + "' expects " +
                        kind_name(base[it.key()]) + ", got " + it.value().dump());
    if (it.value().is_number_integer() && !it.value().is_number_unsigned() &&
        it.value().get<long long>() < 0 && base[it.key()].is_number_integer())
      throw ConfigError(origin + ": config key '" + it.key() + "' must be non-negative");
    if (base[it.key()].is_number_float())
      base[it.key()] = it.value().get<double>();
    else
      base[it.key()] = it.value();
  }
}

Settings read_settings_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  try {
    auto j = Settings::parse(is);
    if (!j.is_object()) throw ConfigError(path.string() + ": expected a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

Settings parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("expected key=value, got '" + text + "'");
  const std::string key = text.substr(0, eq), raw = text.substr(eq + 1);
  Settings out;
  const auto parsed = Settings::parse(raw, nullptr, false);
  out[key] = parsed.is_discarded() ? Settings(raw) : parsed;
  return out;
}

std::vector<agg::InputKind> parse_inputs(const std::string& csv) {
  std::vector<agg::InputKind> out;
  for (const auto& item : split_csv(csv)) out.push_back(agg::parse_input_kind(item));
  return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  if (csv.find_first_not_of(" \t") == std::string::npos) return out;
  for (const auto& item : split_csv(csv)) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size())
      throw ConfigError("'" + item + "' is not an integer");
    out.push_back(v);
  }
  return out;
}

data::DatasetSpec dataset_spec(const Settings& s) {
  data::DatasetSpec spec;
  spec.classes.clear();
  for (const auto& c : split_csv(s["classes"].get<std::string>()))
    spec.classes.push_back(data::parse_shape_class(c));
  spec.domains.clear();
  for (const auto& d : split_csv(s["domains"].get<std::string>()))
    spec.domains.push_back(data::parse_texture_style(d));
  spec.image_size = s["image_size"].get<int>();
  spec.examples_per_cell = s["examples_per_cell"].get<int>();
  spec.seed = s["data_seed"].get<std::uint64_t>();
  spec.label_noise = s["label_noise"].get<double>();
  spec.validate();
  return spec;
}

harness::ExperimentConfig experiment_config(const Settings& s) {
  harness::ExperimentConfig c;
  const auto folder = s["data_folder"].get<std::string>();
  if (folder.empty())
    c.dataset.synthetic = dataset_spec(s);
  else
    c.dataset.folder = folder;
  c.dataset.image_size = s["image_size"].get<int>();
  c.inputs = parse_inputs(s["inputs"].get<std::string>());
  c.shape_op = shape::parse_shape_op(s["shape_op"].get<std::string>());
  c.pairing = harness::parse_pairing(s["pairing"].get<std::string>());
  c.jitter = {s["jitter_brightness"].get<double>(), s["jitter_contrast"].get<double>(),
              s["jitter_saturation"].get<double>(), s["jitter_hue"].get<double>()};

  const auto name = s["strategy"].get<std::string>();
  if (name == "deep_all") {
    c.strategy = agg::DeepAll{};
  } else if (name == "agr_sum") {
    c.strategy = agg::AgrSum{};
  } else if (name == "agr_rand") {
    const auto policy = s["agr_rand_sigma_policy"].get<std::string>();
    if (policy != "relative" && policy != "fixed")
      throw ConfigError("agr_rand_sigma_policy must be relative or fixed, got '" + policy + "'");
    c.strategy = agg::AgrRand{s["agr_rand_sigma"].get<double>(),
                              policy == "fixed" ? agg::SigmaPolicy::Fixed
                                                : agg::SigmaPolicy::Relative};
  } else if (name == "pcgrad") {
    c.strategy = agg::PCGrad{s["pcgrad_shuffle"].get<bool>()};
  } else if (name == "sggv") {
    const auto rule = s["vote_rule"].get<std::string>();
    if (rule != "strict" && rule != "literal")
      throw ConfigError("vote_rule must be strict or literal, got '" + rule + "'");
    c.strategy = agg::Sggv{s["tau"].get<int>(),
                           rule == "literal" ? agg::VoteRule::Literal : agg::VoteRule::Strict};
  } else {
    throw ConfigError("unknown strategy '" + name +
                      "' (expected deep_all, agr_sum, agr_rand, pcgrad or sggv)");
  }

  c.iterations = s["iterations"].get<int>();
  c.val_interval = s["val_interval"].get<int>();
  c.batch_size = s["batch_size"].get<int>();
  c.optimizer.learning_rate = s["lr"].get<double>();
  c.optimizer.beta1 = s["beta1"].get<double>();
  c.optimizer.beta2 = s["beta2"].get<double>();
  c.optimizer.epsilon = s["epsilon"].get<double>();
  c.optimizer.weight_decay = s["weight_decay"].get<double>();
  c.seed = s["seed"].get<std::uint64_t>();
  c.architecture = s["architecture"].get<std::string>();
  c.precision = harness::parse_precision(s["precision"].get<std::string>());
  return c;
}

std::vector<int> resolve_targets(const Settings& s, const data::MultiDomainDataset& dataset) {
  const auto target = s["target"].get<std::string>();
  std::vector<int> out;
  if (target == "all") {
    for (int d = 0; d < dataset.domain_count(); ++d) out.push_back(d);
    return out;
  }
  for (int d = 0; d < dataset.domain_count(); ++d)
    if (dataset.domains[d].name == target) return {d};
  if (!target.empty() && target.find_first_not_of("0123456789") == std::string::npos) {
    const int d = std::stoi(target);
    if (d < dataset.domain_count()) return {d};
  }
  std::string names;
  for (const auto& dom : dataset.domains) names += (names.empty() ? "" : ", ") + dom.name;
  throw ConfigError("unknown target domain '" + target + "' (available: " + names + ", all)");
}

void resolve_tau(Settings& s, int domain_count) {
  if (s["strategy"].get<std::string>() != "sggv" || s["tau"].get<int>() != 0) return;
  const std::size_t l = static_cast<std::size_t>(std::max(domain_count - 1, 0)) *
                        parse_inputs(s["inputs"].get<std::string>()).size();
  s["tau"] = agg::default_tau(l);
}

}  // namespace sggv::cli

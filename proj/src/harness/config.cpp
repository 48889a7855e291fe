#include "sggv/harness/config.hpp"

#include <algorithm>
#include <set>

#include "sggv/common/error.hpp"

namespace sggv::harness {

std::string to_string(Pairing p) { return p == Pairing::Paired ? "paired" : "unpaired"; }

Pairing parse_pairing(const std::string& s) {
  if (s == "paired") return Pairing::Paired;
  if (s == "unpaired") return Pairing::Unpaired;
  throw ConfigError("unknown pairing '" + s + "' (expected paired or unpaired)");
}

std::string to_string(Precision p) { return p == Precision::Double ? "double" : "float"; }

Precision parse_precision(const std::string& s) {
  if (s == "double") return Precision::Double;
  if (s == "float") return Precision::Float;
  throw ConfigError("unknown precision '" + s + "' (expected double or float)");
}

std::size_t ExperimentConfig::bundle_size(int domain_count) const {
  return static_cast<std::size_t>(std::max(domain_count - 1, 0)) * inputs.size();
}

void ExperimentConfig::validate(int domain_count) const {
  if (!dataset.is_folder()) dataset.synthetic.validate();
  if (domain_count < 2) throw ConfigError("need at least two domains for leave-one-domain-out");
  if (target_domain < 0 || target_domain >= domain_count)
    throw ConfigError("target domain " + std::to_string(target_domain) + " out of range");
  if (inputs.empty() || std::find(inputs.begin(), inputs.end(), agg::InputKind::Raw) == inputs.end())
    throw ConfigError("input kinds must include raw");
  if (std::set<agg::InputKind>(inputs.begin(), inputs.end()).size() != inputs.size())
    throw ConfigError("duplicate input kind");
  shape::validate(jitter);
  if (iterations < 0) throw ConfigError("iterations must be non-negative");
  if (val_interval < 1) throw ConfigError("validation interval must be at least 1");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (!(optimizer.learning_rate > 0)) throw ConfigError("learning rate must be positive");
  if (optimizer.beta1 < 0 || optimizer.beta1 >= 1 || optimizer.beta2 < 0 || optimizer.beta2 >= 1)
    throw ConfigError("Adam betas must lie in [0, 1)");
  if (optimizer.weight_decay < 0) throw ConfigError("weight decay must be non-negative");
  agg::validate_strategy(strategy, bundle_size(domain_count));
}

}  // namespace sggv::harness

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sggv/common/rng.hpp"
#include "sggv/nn/model.hpp"

namespace sggv::agg {

using nn::GradientVector;

enum class InputKind { Raw, Shape, Texture };

std::string to_string(InputKind kind);
InputKind parse_input_kind(const std::string& s);

// Identifies one gradient in a bundle: which source domain, which input kind.
struct SourceTag {
  int domain = 0;
  InputKind kind = InputKind::Raw;

  // "d<domain>:<kind>", e.g. "d2:shape".
  std::string str() const;
  bool operator==(const SourceTag&) const = default;
};

// L per-source gradients of equal length K with unique tags.
template <typename Real>
struct GradientBundle {
  std::vector<GradientVector<Real>> grads;
  std::vector<SourceTag> tags;

  std::size_t size() const { return grads.size(); }
  std::size_t dimension() const { return grads.empty() ? 0 : grads.front().size(); }

  // Throws InputError if empty, lengths differ, or tags are missing/duplicated.
  void validate() const;
};

template <typename Real>
struct AggregationOutcome {
  GradientVector<Real> combined;
  std::vector<std::uint8_t> retained;  // 1 where the dimension was kept
  double retained_proportion = 1.0;    // count(retained) / K
};

// ---- strategies ----------------------------------------------------------

struct DeepAll {};
struct AgrSum {};

enum class SigmaPolicy {
  Fixed,     // noise std = sigma
  Relative,  // noise std = sigma * mean_l |g_l(k)| (mean floored at 1e-12)
};

struct AgrRand {
  double sigma = 0.01;
  SigmaPolicy policy = SigmaPolicy::Relative;
};

struct PCGrad {
  bool shuffle = true;  // false: project in bundle order
};

enum class VoteRule {
  Strict,   // negative branch fires when n >= tau
  Literal,  // negative branch fires when m <= L - tau
};

struct Sggv {
  int tau = 0;
  VoteRule rule = VoteRule::Strict;
};

using Strategy = std::variant<DeepAll, AgrSum, AgrRand, PCGrad, Sggv>;

// "deep_all", "agr_sum", "agr_rand", "pcgrad" or "sggv".
std::string strategy_name(const Strategy& s);

// Smallest and largest valid voting threshold for L gradients: L/2 < tau <= L.
std::pair<int, int> valid_tau_range(std::size_t bundle_size);
// ceil(2L / 3).
int default_tau(std::size_t bundle_size);

// Throws ConfigError if the strategy cannot be applied to L gradients.
void validate_strategy(const Strategy& s, std::size_t bundle_size);

// ---- aggregators ---------------------------------------------------------
// Per-dimension work is split across OpenMP threads. Each dimension's result
// depends only on that dimension's entries, summed in bundle order, so the
// output is independent of the thread count.

// combined(k) = sum_l g_l(k); every dimension retained.
template <typename Real>
AggregationOutcome<Real> deep_all(const GradientBundle<Real>& bundle);

// Keeps the sum where no two entries have strictly opposite signs (zeros
// count as neither sign); otherwise 0 and not retained.
template <typename Real>
AggregationOutcome<Real> agr_sum(const GradientBundle<Real>& bundle);

// As agr_sum, but conflicting dimensions get Gaussian noise drawn from `rng`
// in increasing dimension order. No draws happen when nothing conflicts.
template <typename Real>
AggregationOutcome<Real> agr_rand(const GradientBundle<Real>& bundle, const AgrRand& params,
                                  Rng& rng);

// Gradient surgery: each g_i is projected off every other g_j (original,
// unprojected) with which it has a negative inner product, visiting the others
// in an order shuffled by `shuffle_rng` (bundle order when null). Zero-norm
// g_j are skipped. combined = sum of projected gradients; all retained.
template <typename Real>
AggregationOutcome<Real> pcgrad(const GradientBundle<Real>& bundle, Rng* shuffle_rng);

// Sign voting with threshold tau. With m strictly positive and n strictly
// negative entries: m >= tau keeps the sum of positive entries, n >= tau keeps
// the sum of negative entries, otherwise the dimension is zeroed.
template <typename Real>
AggregationOutcome<Real> sggv_vote(const GradientBundle<Real>& bundle, int tau,
                                   VoteRule rule = VoteRule::Strict);

template <typename Real>
AggregationOutcome<Real> aggregate(const GradientBundle<Real>& bundle, const Strategy& strategy,
                                   Rng& rng);

template <typename Real>
double retained_proportion(const AggregationOutcome<Real>& outcome);

// Fraction of (pair l < l', dimension k) combinations whose entries have the
// same sign class (+, -, 0). 1.0 for single-gradient bundles.
template <typename Real>
double sign_agreement_rate(const GradientBundle<Real>& bundle);

}  // namespace sggv::agg

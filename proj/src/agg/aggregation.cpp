#include "sggv/agg/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "sggv/common/error.hpp"
#include "sggv/common/reduce.hpp"

namespace sggv::agg {

std::string to_string(InputKind kind) {
  switch (kind) {
    case InputKind::Raw: return "raw";
    case InputKind::Shape: return "shape";
    case InputKind::Texture: return "texture";
  }
  return "?";
}

InputKind parse_input_kind(const std::string& s) {
  if (s == "raw") return InputKind::Raw;
  if (s == "shape") return InputKind::Shape;
  if (s == "texture") return InputKind::Texture;
  throw ConfigError("unknown input kind '" + s + "' (expected raw, shape or texture)");
}

std::string SourceTag::str() const { return "d" + std::to_string(domain) + ":" + to_string(kind); }

template <typename Real>
void GradientBundle<Real>::validate() const {
  if (grads.empty()) throw InputError("gradient bundle is empty");
  if (tags.size() != grads.size()) throw InputError("gradient bundle needs one tag per gradient");
  const std::size_t k = grads.front().size();
  for (const auto& g : grads)
    if (g.size() != k)
      throw InputError("gradient lengths differ within bundle (" + std::to_string(g.size()) +
                       " vs " + std::to_string(k) + ")");
  std::set<std::string> seen;
  for (const auto& t : tags)
    if (!seen.insert(t.str()).second) throw InputError("duplicate bundle tag " + t.str());
}

std::string strategy_name(const Strategy& s) {
  static const char* names[] = {"deep_all", "agr_sum", "agr_rand", "pcgrad", "sggv"};
  return names[s.index()];
}

std::pair<int, int> valid_tau_range(std::size_t bundle_size) {
  const int l = static_cast<int>(bundle_size);
  return {l / 2 + 1, l};
}

int default_tau(std::size_t bundle_size) {
  return static_cast<int>((2 * bundle_size + 2) / 3);
}

void validate_strategy(const Strategy& s, std::size_t bundle_size) {
  if (bundle_size == 0) throw ConfigError("aggregation needs at least one gradient");
  if (const auto* v = std::get_if<Sggv>(&s)) {
    auto [lo, hi] = valid_tau_range(bundle_size);
    if (v->tau < lo || v->tau > hi)
      throw ConfigError("voting threshold tau=" + std::to_string(v->tau) + " invalid for L=" +
                        std::to_string(bundle_size) + "; valid range " + std::to_string(lo) +
                        ".." + std::to_string(hi));
  }
  if (const auto* r = std::get_if<AgrRand>(&s))
    if (!(r->sigma > 0)) throw ConfigError("agr_rand sigma must be positive");
}

namespace {

template <typename Real>
AggregationOutcome<Real> make_outcome(std::size_t k) {
  AggregationOutcome<Real> out;
  out.combined = GradientVector<Real>(k);
  out.retained.assign(k, 1);
  return out;
}

template <typename Real>
void finish(AggregationOutcome<Real>& out) {
  out.retained_proportion = retained_proportion(out);
}

// Column pointers so the per-dimension loops read one entry per gradient.
template <typename Real>
std::vector<const Real*> columns(const GradientBundle<Real>& b) {
  std::vector<const Real*> cols;
  for (const auto& g : b.grads) cols.push_back(g.values.data());
  return cols;
}

// Writes the full sum on sign-agreeing dimensions; conflicting dimensions get
// 0 and are marked not retained.
template <typename Real>
void agreement_pass(const GradientBundle<Real>& bundle, AggregationOutcome<Real>& out) {
  const auto cols = columns(bundle);
  const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(bundle.dimension());
  const std::size_t l_n = cols.size();
  Real* combined = out.combined.values.data();
  std::uint8_t* keep = out.retained.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t d = 0; d < k; ++d) {
    bool pos = false, neg = false;
    Real sum = 0;
    for (std::size_t l = 0; l < l_n; ++l) {
      const Real v = cols[l][d];
      pos |= v > Real(0);
      neg |= v < Real(0);
      sum += v;
    }
    const bool agree = !(pos && neg);
    combined[d] = agree ? sum : Real(0);
    keep[d] = agree ? 1 : 0;
  }
}

template <typename Real>
double dot(const Real* a, const Real* b, std::size_t n) {
  return lane_dot<double>(a, b, n);
}

}  // namespace

template <typename Real>
AggregationOutcome<Real> deep_all(const GradientBundle<Real>& bundle) {
  bundle.validate();
  auto out = make_outcome<Real>(bundle.dimension());
  const auto cols = columns(bundle);
  const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(bundle.dimension());
  Real* combined = out.combined.values.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t d = 0; d < k; ++d) {
    Real sum = 0;
    for (const Real* c : cols) sum += c[d];
    combined[d] = sum;
  }
  finish(out);
  return out;
}

template <typename Real>
AggregationOutcome<Real> agr_sum(const GradientBundle<Real>& bundle) {
  bundle.validate();
  auto out = make_outcome<Real>(bundle.dimension());
  agreement_pass(bundle, out);
  finish(out);
  return out;
}

template <typename Real>
AggregationOutcome<Real> agr_rand(const GradientBundle<Real>& bundle, const AgrRand& params,
                                  Rng& rng) {
  bundle.validate();
  validate_strategy(params, bundle.size());
  auto out = make_outcome<Real>(bundle.dimension());
  agreement_pass(bundle, out);
  // Draws happen serially in dimension order so the sampled values do not
  // depend on how the agreement pass was partitioned.
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t l_n = bundle.size();
  for (std::size_t d = 0; d < bundle.dimension(); ++d) {
    if (out.retained[d]) continue;
    double std_dev = params.sigma;
    if (params.policy == SigmaPolicy::Relative) {
      double abs_sum = 0;
      for (const auto& g : bundle.grads) abs_sum += std::abs(static_cast<double>(g[d]));
      std_dev = params.sigma * std::max(abs_sum / static_cast<double>(l_n), 1e-12);
    }
    out.combined[d] = static_cast<Real>(std_dev * normal(rng));
  }
  finish(out);
  return out;
}

template <typename Real>
AggregationOutcome<Real> pcgrad(const GradientBundle<Real>& bundle, Rng* shuffle_rng) {
  bundle.validate();
  const std::size_t l_n = bundle.size();
  const std::size_t k = bundle.dimension();

  std::vector<std::vector<std::size_t>> orders(l_n);
  for (std::size_t i = 0; i < l_n; ++i) {
    for (std::size_t j = 0; j < l_n; ++j)
      if (j != i) orders[i].push_back(j);
    if (shuffle_rng) std::shuffle(orders[i].begin(), orders[i].end(), *shuffle_rng);
  }
  std::vector<double> sq_norm(l_n);
  for (std::size_t j = 0; j < l_n; ++j) {
    const Real* g = bundle.grads[j].values.data();
    sq_norm[j] = dot(g, g, k);
  }

  std::vector<std::vector<Real>> projected(l_n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(l_n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    std::vector<Real> gi = bundle.grads[i].values;
    for (std::size_t j : orders[i]) {
      if (sq_norm[j] == 0) continue;
      const Real* gj = bundle.grads[j].values.data();
      const double d = dot(gi.data(), gj, k);
      if (d < 0) {
        const Real coef = static_cast<Real>(d / sq_norm[j]);
        for (std::size_t c = 0; c < k; ++c) gi[c] -= coef * gj[c];
      }
    }
    projected[i] = std::move(gi);
  }

  auto out = make_outcome<Real>(k);
  for (std::size_t d = 0; d < k; ++d) {
    Real sum = 0;
    for (std::size_t i = 0; i < l_n; ++i) sum += projected[i][d];
    out.combined[d] = sum;
  }
  finish(out);
  return out;
}

template <typename Real>
AggregationOutcome<Real> sggv_vote(const GradientBundle<Real>& bundle, int tau, VoteRule rule) {
  bundle.validate();
  validate_strategy(Sggv{tau, rule}, bundle.size());
  auto out = make_outcome<Real>(bundle.dimension());
  const auto cols = columns(bundle);
  const std::size_t l_n = cols.size();
  const int lower = static_cast<int>(l_n) - tau;
  const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(bundle.dimension());
  Real* combined = out.combined.values.data();
  std::uint8_t* keep = out.retained.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t d = 0; d < k; ++d) {
    int m = 0, n = 0;
    Real pos_sum = 0, neg_sum = 0;
    for (std::size_t l = 0; l < l_n; ++l) {
      const Real v = cols[l][d];
      if (v > Real(0)) {
        ++m;
        pos_sum += v;
      } else if (v < Real(0)) {
        ++n;
        neg_sum += v;
      }
    }
    const bool negative_wins = rule == VoteRule::Strict ? n >= tau : m <= lower;
    if (m >= tau) {
      combined[d] = pos_sum;
      keep[d] = 1;
    } else if (negative_wins) {
      combined[d] = neg_sum;
      keep[d] = 1;
    } else {
      combined[d] = 0;
      keep[d] = 0;
    }
  }
  finish(out);
  return out;
}

template <typename Real>
AggregationOutcome<Real> aggregate(const GradientBundle<Real>& bundle, const Strategy& strategy,
                                   Rng& rng) {
  validate_strategy(strategy, bundle.size());
  if (std::holds_alternative<DeepAll>(strategy)) return deep_all(bundle);
  if (std::holds_alternative<AgrSum>(strategy)) return agr_sum(bundle);
  if (const auto* r = std::get_if<AgrRand>(&strategy)) return agr_rand(bundle, *r, rng);
  if (const auto* p = std::get_if<PCGrad>(&strategy))
    return pcgrad(bundle, p->shuffle ? &rng : nullptr);
  const auto& v = std::get<Sggv>(strategy);
  return sggv_vote(bundle, v.tau, v.rule);
}

template <typename Real>
double retained_proportion(const AggregationOutcome<Real>& outcome) {
  if (outcome.retained.empty()) return 1.0;
  const auto kept = std::count(outcome.retained.begin(), outcome.retained.end(), 1);
  return static_cast<double>(kept) / static_cast<double>(outcome.retained.size());
}

template <typename Real>
double sign_agreement_rate(const GradientBundle<Real>& bundle) {
  bundle.validate();
  const std::size_t l_n = bundle.size();
  if (l_n < 2) return 1.0;
  const auto cols = columns(bundle);
  const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(bundle.dimension());
  long long agree = 0;
#pragma omp parallel for schedule(static) reduction(+ : agree)
  for (std::ptrdiff_t d = 0; d < k; ++d) {
    int pos = 0, neg = 0;
    for (const Real* c : cols) {
      pos += c[d] > Real(0);
      neg += c[d] < Real(0);
    }
    const int zero = static_cast<int>(l_n) - pos - neg;
    agree += pos * (pos - 1) / 2 + neg * (neg - 1) / 2 + zero * (zero - 1) / 2;
  }
  const double pairs = static_cast<double>(l_n * (l_n - 1) / 2) * static_cast<double>(k);
  return static_cast<double>(agree) / pairs;
}

#define SGGV_INSTANTIATE(Real)                                                                  \
  template struct GradientBundle<Real>;                                                         \
  template AggregationOutcome<Real> deep_all<Real>(const GradientBundle<Real>&);                \
  template AggregationOutcome<Real> agr_sum<Real>(const GradientBundle<Real>&);                 \
  template AggregationOutcome<Real> agr_rand<Real>(const GradientBundle<Real>&, const AgrRand&, \
                                                   Rng&);                                       \
  template AggregationOutcome<Real> pcgrad<Real>(const GradientBundle<Real>&, Rng*);            \
  template AggregationOutcome<Real> sggv_vote<Real>(const GradientBundle<Real>&, int,           \
                                                    VoteRule);                                  \
  template AggregationOutcome<Real> aggregate<Real>(const GradientBundle<Real>&,                \
                                                    const Strategy&, Rng&);                     \
  template double retained_proportion<Real>(const AggregationOutcome<Real>&);                   \
  template double sign_agreement_rate<Real>(const GradientBundle<Real>&);

SGGV_INSTANTIATE(float)
SGGV_INSTANTIATE(double)

}  // namespace sggv::agg

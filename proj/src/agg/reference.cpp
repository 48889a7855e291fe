#include "sggv/agg/reference.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sggv::agg::reference {
namespace {

template <typename Real>
std::vector<Real> column(const GradientBundle<Real>& b, std::size_t k) {
  std::vector<Real> col;
  col.reserve(b.size());
  for (std::size_t l = 0; l < b.size(); ++l) col.push_back(b.grads[l].values[k]);
  return col;
}

template <typename Real>
int sign(Real v) {
  return v > 0 ? 1 : (v < 0 ? -1 : 0);
}

template <typename Real>
AggregationOutcome<Real> blank(const GradientBundle<Real>& b) {
  AggregationOutcome<Real> out;
  out.combined = GradientVector<Real>(b.dimension());
  out.retained.assign(b.dimension(), 0);
  return out;
}

template <typename Real>
bool signs_agree(const std::vector<Real>& col) {
  for (std::size_t a = 0; a < col.size(); ++a)
    for (std::size_t c = a + 1; c < col.size(); ++c)
      if (sign(col[a]) * sign(col[c]) < 0) return false;
  return true;
}

template <typename Real>
Real plain_sum(const std::vector<Real>& col) {
  Real s = 0;
  for (Real v : col) s += v;
  return s;
}

}  // namespace

template <typename Real>
double retained_proportion(const AggregationOutcome<Real>& outcome) {
  std::size_t kept = 0;
  for (auto flag : outcome.retained)
    if (flag) ++kept;
  return outcome.retained.empty() ? 1.0
                                  : static_cast<double>(kept) / outcome.retained.size();
}

template <typename Real>
AggregationOutcome<Real> deep_all(const GradientBundle<Real>& bundle) {
  bundle.validate();
  auto out = blank(bundle);
  for (std::size_t k = 0; k < bundle.dimension(); ++k) {
    out.combined[k] = plain_sum(column(bundle, k));
    out.retained[k] = 1;
  }
  out.retained_proportion = reference::retained_proportion(out);
  return out;
}

template <typename Real>
AggregationOutcome<Real> agr_sum(const GradientBundle<Real>& bundle) {
  bundle.validate();
  auto out = blank(bundle);
  for (std::size_t k = 0; k < bundle.dimension(); ++k) {
    const auto col = column(bundle, k);
    if (signs_agree(col)) {
      out.combined[k] = plain_sum(col);
      out.retained[k] = 1;
    }
  }
  out.retained_proportion = reference::retained_proportion(out);
  return out;
}

template <typename Real>
AggregationOutcome<Real> agr_rand(const GradientBundle<Real>& bundle, const AgrRand& params,
                                  Rng& rng) {
  bundle.validate();
  auto out = blank(bundle);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t k = 0; k < bundle.dimension(); ++k) {
    const auto col = column(bundle, k);
    if (signs_agree(col)) {
      out.combined[k] = plain_sum(col);
      out.retained[k] = 1;
      continue;
    }
    double scale = params.sigma;
    if (params.policy == SigmaPolicy::Relative) {
      double mean_abs = 0;
      for (Real v : col) mean_abs += std::abs(static_cast<double>(v));
      mean_abs /= static_cast<double>(col.size());
      scale = params.sigma * std::max(mean_abs, 1e-12);
    }
    out.combined[k] = static_cast<Real>(scale * normal(rng));
  }
  out.retained_proportion = reference::retained_proportion(out);
  return out;
}

template <typename Real>
AggregationOutcome<Real> pcgrad(const GradientBundle<Real>& bundle, Rng* shuffle_rng) {
  bundle.validate();
  const std::size_t n = bundle.size();
  const std::size_t dim = bundle.dimension();
  auto inner = [dim](const std::vector<Real>& a, const std::vector<Real>& b) {
    double s = 0;
    for (std::size_t k = 0; k < dim; ++k) s += static_cast<double>(a[k]) * b[k];
    return s;
  };
  std::vector<std::vector<std::size_t>> orders(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) orders[i].push_back(j);
    if (shuffle_rng) std::shuffle(orders[i].begin(), orders[i].end(), *shuffle_rng);
  }
  auto out = blank(bundle);
  std::vector<std::vector<Real>> surgery;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Real> g = bundle.grads[i].values;
    for (std::size_t j : orders[i]) {
      const auto& other = bundle.grads[j].values;
      const double norm2 = inner(other, other);
      if (norm2 == 0) continue;
      const double d = inner(g, other);
      if (d >= 0) continue;
      const Real coef = static_cast<Real>(d / norm2);
      for (std::size_t k = 0; k < dim; ++k) g[k] -= coef * other[k];
    }
    surgery.push_back(std::move(g));
  }
  for (std::size_t k = 0; k < dim; ++k) {
    Real s = 0;
    for (std::size_t i = 0; i < n; ++i) s += surgery[i][k];
    out.combined[k] = s;
    out.retained[k] = 1;
  }
  out.retained_proportion = reference::retained_proportion(out);
  return out;
}

template <typename Real>
AggregationOutcome<Real> sggv_vote(const GradientBundle<Real>& bundle, int tau, VoteRule rule) {
  bundle.validate();
  validate_strategy(Sggv{tau, rule}, bundle.size());
  auto out = blank(bundle);
  const int total = static_cast<int>(bundle.size());
  for (std::size_t k = 0; k < bundle.dimension(); ++k) {
    const auto col = column(bundle, k);
    const auto positives = std::count_if(col.begin(), col.end(), [](Real v) { return v > 0; });
    const auto negatives = std::count_if(col.begin(), col.end(), [](Real v) { return v < 0; });
    int winner = 0;
    if (positives >= tau)
      winner = 1;
    else if (rule == VoteRule::Strict ? negatives >= tau : positives <= total - tau)
      winner = -1;
    if (winner == 0) continue;
    Real s = 0;
    for (Real v : col)
      if (sign(v) == winner) s += v;
    out.combined[k] = s;
    out.retained[k] = 1;
  }
  out.retained_proportion = reference::retained_proportion(out);
  return out;
}

#define SGGV_INSTANTIATE(Real)                                                                  \
  template AggregationOutcome<Real> deep_all<Real>(const GradientBundle<Real>&);                \
  template AggregationOutcome<Real> agr_sum<Real>(const GradientBundle<Real>&);                 \
  template AggregationOutcome<Real> agr_rand<Real>(const GradientBundle<Real>&, const AgrRand&, \
                                                   Rng&);                                       \
  template AggregationOutcome<Real> pcgrad<Real>(const GradientBundle<Real>&, Rng*);            \
  template AggregationOutcome<Real> sggv_vote<Real>(const GradientBundle<Real>&, int,           \
                                                    VoteRule);                                  \
  template double retained_proportion<Real>(const AggregationOutcome<Real>&);

SGGV_INSTANTIATE(float)
SGGV_INSTANTIATE(double)

}  // namespace sggv::agg::reference

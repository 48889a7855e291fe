#pragma once

// Serial, per-dimension reference versions of the aggregators. They share no
// code with the OpenMP kernels and exist to check them (tests, benchmark).

#include "sggv/agg/aggregation.hpp"

namespace sggv::agg::reference {

template <typename Real>
AggregationOutcome<Real> deep_all(const GradientBundle<Real>& bundle);
template <typename Real>
AggregationOutcome<Real> agr_sum(const GradientBundle<Real>& bundle);
template <typename Real>
AggregationOutcome<Real> agr_rand(const GradientBundle<Real>& bundle, const AgrRand& params,
                                  Rng& rng);
template <typename Real>
AggregationOutcome<Real> pcgrad(const GradientBundle<Real>& bundle, Rng* shuffle_rng);
template <typename Real>
AggregationOutcome<Real> sggv_vote(const GradientBundle<Real>& bundle, int tau,
                                   VoteRule rule = VoteRule::Strict);

// Counts retained flags one by one.
template <typename Real>
double retained_proportion(const AggregationOutcome<Real>& outcome);

}  // namespace sggv::agg::reference

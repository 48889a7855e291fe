#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sggv/agg/aggregation.hpp"
#include "sggv/data/dataset.hpp"
#include "sggv/harness/config.hpp"
#include "sggv/harness/sampler.hpp"
#include "sggv/nn/network.hpp"

namespace sggv::harness {

// Example indices drawn from one source domain for one step. `companion`
// holds the images the shape/texture inputs are derived from: the raw
// indices themselves when paired, an independent draw when unpaired.
struct SourceDraw {
  int domain = 0;
  std::vector<int> raw;
  std::vector<int> companion;
};

// How many shape/texture companions were built per domain. The target
// domain's count must stay zero.
struct GuidanceCounters {
  std::vector<long long> companions_per_domain;
};

template <typename Real>
struct TaggedBatch {
  agg::SourceTag tag;
  nn::Batch<Real> batch;
};

// One batch per (source domain, input kind), ordered kind-major: all raw
// batches, then all shape batches, then all texture batches. Texture jitter
// for image j of domain d at `step` uses its own sub-stream of `seed`.
template <typename Real>
std::vector<TaggedBatch<Real>> build_bundles(const data::MultiDomainDataset& dataset,
                                             std::span<const SourceDraw> draws,
                                             const ExperimentConfig& config, std::uint64_t step,
                                             GuidanceCounters* counters = nullptr);

struct StepMetrics {
  std::vector<std::string> tags;
  std::vector<double> losses;
  double retained_proportion = 1.0;
  double agreement_rate = 1.0;
};

// Observer for every training step: sees the gradient bundle and the
// aggregation outcome before the optimizer step. Float runs hand over exact
// double copies.
using StepObserver = std::function<void(int iteration, const agg::GradientBundle<double>&,
                                        const agg::AggregationOutcome<double>&)>;

template <typename Real>
struct StepResult {
  StepMetrics metrics;
  agg::AggregationOutcome<Real> outcome;
};

// loss_and_grad for every batch (in parallel), aggregation, one Adam step
// with the combined gradient. Throws NumericalError naming `iteration` when
// any backward pass fails; the model is left untouched in that case.
template <typename Real>
StepResult<Real> train_step(nn::ModelState<Real>& model,
                            std::span<const TaggedBatch<Real>> batches,
                            const agg::Strategy& strategy, const nn::AdamConfig& optimizer,
                            Rng& rng, int iteration = 0,
                            agg::GradientBundle<Real>* bundle_out = nullptr);

// Argmax accuracy on raw images of `split` of one domain; ties go to the
// lowest class. Throws EvaluationError on an empty split.
template <typename Real>
double evaluate(const nn::ModelState<Real>& model, const data::DomainDataset& domain,
                data::Split split);
// Pooled accuracy over several domains' splits.
template <typename Real>
double evaluate(const nn::ModelState<Real>& model, const data::MultiDomainDataset& dataset,
                std::span<const int> domains, data::Split split);

struct StepRecord {
  int iteration = 0;
  StepMetrics metrics;
};

struct ValidationRecord {
  int iteration = 0;
  double source_val_accuracy = 0;
  double target_accuracy = 0;  // diagnostics only; never used for selection
};

struct RunReport {
  std::string target;
  int target_domain = 0;
  std::string strategy;
  int tau = 0;  // 0 unless the strategy votes
  std::uint64_t seed = 0;
  std::size_t bundle_size = 0;
  std::vector<StepRecord> steps;
  std::vector<ValidationRecord> validations;
  int selected_iteration = 0;
  double test_accuracy = 0;
  double mean_retained_proportion = 1.0;
  std::size_t modified_parameters = 0;  // retained at least once over the run
  std::size_t parameter_count = 0;
  GuidanceCounters counters;
  std::string best_checkpoint;  // serialized checkpoint of the selected model
};

// Streams metrics rows as the run progresses, so an aborted run leaves a
// partial CSV behind.
class MetricsWriter {
 public:
  explicit MetricsWriter(std::ostream& os, bool header = true);
  void step(int iteration, const StepMetrics& m);
  void validation(const ValidationRecord& v);

 private:
  std::ostream& os_;
};

struct RunOptions {
  MetricsWriter* metrics = nullptr;
  StepObserver observer;
};

// Leave-one-domain-out training: all domains except config.target_domain are
// sources. Validates at iteration 0 and every val_interval steps (and at the
// last step), keeps the model with the best pooled source-validation accuracy
// (earliest on ties), and reports its accuracy on the target test split using
// raw images only.
RunReport run_experiment(const ExperimentConfig& config, const data::MultiDomainDataset& dataset,
                         const RunOptions& options = {});

// One run per tau (strategy forced to Sggv with that threshold).
std::vector<RunReport> sweep_tau(const ExperimentConfig& config,
                                 const data::MultiDomainDataset& dataset,
                                 std::span<const int> taus,
                                 const std::function<RunOptions(int tau)>& options_for = {});

// Synthetic generation or folder loading, according to config.dataset.
data::MultiDomainDataset load_dataset(const ExperimentConfig& config);

}  // namespace sggv::harness

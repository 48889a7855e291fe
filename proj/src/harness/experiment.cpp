#include "sggv/harness/experiment.hpp"

#include <algorithm>
#include <exception>
#include <iostream>
#include <sstream>
#include <type_traits>

#include "sggv/common/error.hpp"
#include "sggv/data/folder.hpp"
#include "sggv/nn/checkpoint.hpp"
#include "sggv/shape/edges.hpp"
#include "sggv/shape/jitter.hpp"

namespace sggv::harness {
namespace {

// Stream identifiers under the run seed.
enum StreamId : std::uint64_t {
  kInitStream = 1,
  kRawSampler = 2,
  kCompanionSampler = 3,
  kAggregation = 4,
  kTextureJitter = 5,
};

std::vector<agg::InputKind> canonical_kinds(const std::vector<agg::InputKind>& kinds) {
  std::vector<agg::InputKind> out;
  for (auto k : {agg::InputKind::Raw, agg::InputKind::Shape, agg::InputKind::Texture})
    if (std::find(kinds.begin(), kinds.end(), k) != kinds.end()) out.push_back(k);
  return out;
}

bool needs_companions(const ExperimentConfig& config) {
  return std::any_of(config.inputs.begin(), config.inputs.end(),
                     [](agg::InputKind k) { return k != agg::InputKind::Raw; });
}

template <typename Real>
void append_image(nn::Batch<Real>& batch, const shape::Image& img) {
  for (double v : img.pixels) batch.images.push_back(static_cast<Real>(v));
}

nn::Architecture resolve_architecture(const ExperimentConfig& config,
                                      const data::MultiDomainDataset& dataset) {
  const auto& first = dataset.domains.front().examples.front().image;
  const nn::InputSpec input{first.channels, first.height, first.width};
  if (config.architecture.empty())
    return nn::Architecture::default_classifier(input, dataset.class_count());
  auto arch = nn::Architecture::parse(config.architecture);
  if (arch.input().channels != input.channels || arch.input().height != input.height ||
      arch.input().width != input.width)
    throw ConfigError("architecture input " + arch.descriptor() +
                      " does not match dataset images");
  if (arch.classes() != dataset.class_count())
    throw ConfigError("architecture has " + std::to_string(arch.classes()) +
                      " outputs but the dataset has " + std::to_string(dataset.class_count()) +
                      " classes");
  return arch;
}

}  // namespace

template <typename Real>
std::vector<TaggedBatch<Real>> build_bundles(const data::MultiDomainDataset& dataset,
                                             std::span<const SourceDraw> draws,
                                             const ExperimentConfig& config, std::uint64_t step,
                                             GuidanceCounters* counters) {
  std::vector<TaggedBatch<Real>> out;
  for (auto kind : canonical_kinds(config.inputs)) {
    for (const auto& draw : draws) {
      if (draw.domain < 0 || draw.domain >= dataset.domain_count())
        throw InputError("draw refers to unknown domain " + std::to_string(draw.domain));
      const auto& dom = dataset.domains[draw.domain];
      const auto& indices = kind == agg::InputKind::Raw ? draw.raw : draw.companion;
      if (indices.empty()) throw InputError("empty draw for domain " + dom.name);
      TaggedBatch<Real> tb;
      tb.tag = {draw.domain, kind};
      tb.batch.domain = draw.domain;
      const auto& first = dom.examples.at(indices.front()).image;
      tb.batch.channels = first.channels;
      tb.batch.height = first.height;
      tb.batch.width = first.width;
      for (std::size_t j = 0; j < indices.size(); ++j) {
        const auto& ex = dom.examples.at(indices[j]);
        tb.batch.labels.push_back(ex.label);
        switch (kind) {
          case agg::InputKind::Raw:
            append_image(tb.batch, ex.image);
            break;
          case agg::InputKind::Shape:
            append_image(tb.batch, shape::shape_distill(ex.image, config.shape_op));
            break;
          case agg::InputKind::Texture: {
            Rng rng = make_rng(config.seed, {kTextureJitter, step,
                                             static_cast<std::uint64_t>(draw.domain), j});
            append_image(tb.batch, shape::color_jitter(ex.image, config.jitter, rng));
            break;
          }
        }
        if (kind != agg::InputKind::Raw && counters) {
          if (counters->companions_per_domain.size() < dataset.domains.size())
            counters->companions_per_domain.resize(dataset.domains.size(), 0);
          counters->companions_per_domain[draw.domain] += 1;
        }
      }
      out.push_back(std::move(tb));
    }
  }
  return out;
}

template <typename Real>
StepResult<Real> train_step(nn::ModelState<Real>& model,
                            std::span<const TaggedBatch<Real>> batches,
                            const agg::Strategy& strategy, const nn::AdamConfig& optimizer,
                            Rng& rng, int iteration, agg::GradientBundle<Real>* bundle_out) {
  const std::size_t l_n = batches.size();
  if (l_n == 0) throw InputError("train_step needs at least one batch");
  agg::GradientBundle<Real> bundle;
  bundle.grads.resize(l_n);
  std::vector<double> losses(l_n);
  std::vector<std::exception_ptr> errors(l_n);
  for (const auto& b : batches) bundle.tags.push_back(b.tag);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t l = 0; l < static_cast<std::ptrdiff_t>(l_n); ++l) {
    try {
      auto lg = nn::loss_and_grad(model, batches[l].batch);
      losses[l] = static_cast<double>(lg.loss);
      bundle.grads[l] = std::move(lg.grad);
    } catch (...) {
      errors[l] = std::current_exception();
    }
  }
  for (std::size_t l = 0; l < l_n; ++l) {
    if (!errors[l]) continue;
    try {
      std::rethrow_exception(errors[l]);
    } catch (const NumericalError& e) {
      throw NumericalError("iteration " + std::to_string(iteration) + ", source " +
                           bundle.tags[l].str() + ": " + e.what());
    }
  }

  StepResult<Real> result;
  result.outcome = agg::aggregate(bundle, strategy, rng);
  result.metrics.losses = std::move(losses);
  for (const auto& t : bundle.tags) result.metrics.tags.push_back(t.str());
  result.metrics.retained_proportion = result.outcome.retained_proportion;
  result.metrics.agreement_rate = agg::sign_agreement_rate(bundle);
  nn::adam_step(model, std::span<const Real>(result.outcome.combined.values), optimizer);
  if (bundle_out) *bundle_out = std::move(bundle);
  return result;
}

template <typename Real>
double evaluate(const nn::ModelState<Real>& model, const data::MultiDomainDataset& dataset,
                std::span<const int> domains, data::Split split) {
  constexpr int kChunk = 128;
  long long correct = 0, total = 0;
  for (int d : domains) {
    const auto& dom = dataset.domains.at(d);
    const auto idx = dom.indices(split);
    for (std::size_t start = 0; start < idx.size(); start += kChunk) {
      const std::size_t end = std::min(idx.size(), start + kChunk);
      nn::Batch<Real> batch;
      const auto& first = dom.examples[idx[start]].image;
      batch.channels = first.channels;
      batch.height = first.height;
      batch.width = first.width;
      batch.domain = d;
      for (std::size_t i = start; i < end; ++i) {
        append_image(batch, dom.examples[idx[i]].image);
        batch.labels.push_back(dom.examples[idx[i]].label);
      }
      const auto pred = nn::predict(model, batch);
      for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == batch.labels[i];
      total += static_cast<long long>(pred.size());
    }
  }
  if (total == 0) throw EvaluationError("evaluation split is empty");
  return static_cast<double>(correct) / static_cast<double>(total);
}

template <typename Real>
double evaluate(const nn::ModelState<Real>& model, const data::DomainDataset& domain,
                data::Split split) {
  const auto idx = domain.indices(split);
  if (idx.empty()) throw EvaluationError("split " + data::to_string(split) + " of domain " +
                                         domain.name + " is empty");
  constexpr int kChunk = 128;
  long long correct = 0;
  for (std::size_t start = 0; start < idx.size(); start += kChunk) {
    const std::size_t end = std::min(idx.size(), start + kChunk);
    nn::Batch<Real> batch;
    const auto& first = domain.examples[idx[start]].image;
    batch.channels = first.channels;
    batch.height = first.height;
    batch.width = first.width;
    batch.domain = domain.domain;
    for (std::size_t i = start; i < end; ++i) {
      append_image(batch, domain.examples[idx[i]].image);
      batch.labels.push_back(domain.examples[idx[i]].label);
    }
    const auto pred = nn::predict(model, batch);
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == batch.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(idx.size());
}

namespace {

agg::GradientBundle<double> widen(const agg::GradientBundle<float>& b) {
  agg::GradientBundle<double> out;
  out.tags = b.tags;
  for (const auto& g : b.grads)
    out.grads.emplace_back(std::vector<double>(g.values.begin(), g.values.end()));
  return out;
}

agg::AggregationOutcome<double> widen(const agg::AggregationOutcome<float>& o) {
  return {nn::GradientVector<double>(
              std::vector<double>(o.combined.values.begin(), o.combined.values.end())),
          o.retained, o.retained_proportion};
}

template <typename Real>
RunReport run_typed(const ExperimentConfig& config, const data::MultiDomainDataset& dataset,
                    const RunOptions& options) {
  config.validate(dataset.domain_count());
  const nn::Architecture arch = resolve_architecture(config, dataset);
  nn::ModelState<Real> model =
      nn::init_params<Real>(arch, derive_seed(config.seed, {kInitStream}));
  const std::size_t k = arch.parameter_count();

  std::vector<int> sources;
  for (int d = 0; d < dataset.domain_count(); ++d)
    if (d != config.target_domain) sources.push_back(d);

  const bool companions = needs_companions(config);
  std::vector<EpochSampler> raw_samplers, companion_samplers;
  for (int d : sources) {
    auto pool = dataset.domains[d].indices(data::Split::Train);
    if (pool.empty())
      throw ConfigError("source domain " + dataset.domains[d].name + " has no training examples");
    if (pool.size() < static_cast<std::size_t>(config.batch_size))
      std::cerr << "warning: domain " << dataset.domains[d].name << " has " << pool.size()
                << " training examples, fewer than batch size " << config.batch_size
                << "; sampling with replacement\n";
    raw_samplers.emplace_back(pool, make_rng(config.seed, {kRawSampler, static_cast<std::uint64_t>(d)}));
    companion_samplers.emplace_back(
        pool, make_rng(config.seed, {kCompanionSampler, static_cast<std::uint64_t>(d)}));
  }
  Rng agg_rng = make_rng(config.seed, {kAggregation});

  RunReport report;
  report.target = dataset.domains[config.target_domain].name;
  report.target_domain = config.target_domain;
  report.strategy = agg::strategy_name(config.strategy);
  if (const auto* v = std::get_if<agg::Sggv>(&config.strategy)) report.tau = v->tau;
  report.seed = config.seed;
  report.bundle_size = config.bundle_size(dataset.domain_count());
  report.parameter_count = k;
  report.counters.companions_per_domain.assign(dataset.domains.size(), 0);

  nn::ModelState<Real> best = model;
  double best_val = -1;
  auto validate_at = [&](int iteration) {
    ValidationRecord v;
    v.iteration = iteration;
    v.source_val_accuracy = evaluate(model, dataset, sources, data::Split::Val);
    v.target_accuracy = evaluate(model, dataset.domains[config.target_domain], data::Split::Test);
    report.validations.push_back(v);
    if (options.metrics) options.metrics->validation(v);
    if (v.source_val_accuracy > best_val) {
      best_val = v.source_val_accuracy;
      best = model;
      report.selected_iteration = iteration;
    }
  };

  validate_at(0);
  std::vector<std::uint8_t> touched(k, 0);
  double retained_sum = 0;
  agg::GradientBundle<Real> bundle;
  const bool observe = static_cast<bool>(options.observer);
  for (int it = 1; it <= config.iterations; ++it) {
    std::vector<SourceDraw> draws;
    for (std::size_t s = 0; s < sources.size(); ++s) {
      SourceDraw draw;
      draw.domain = sources[s];
      draw.raw = raw_samplers[s].draw(config.batch_size);
      if (companions)
        draw.companion = config.pairing == Pairing::Paired
                             ? draw.raw
                             : companion_samplers[s].draw(config.batch_size);
      draws.push_back(std::move(draw));
    }
    const auto batches = build_bundles<Real>(dataset, draws, config,
                                             static_cast<std::uint64_t>(it), &report.counters);
    auto step = train_step<Real>(model, batches, config.strategy, config.optimizer, agg_rng, it,
                                 observe ? &bundle : nullptr);
    for (std::size_t i = 0; i < k; ++i) touched[i] |= step.outcome.retained[i];
    retained_sum += step.metrics.retained_proportion;
    if (options.metrics) options.metrics->step(it, step.metrics);
    if (observe) {
      if constexpr (std::is_same_v<Real, double>) {
        options.observer(it, bundle, step.outcome);
      } else {
        // Float values widen to double exactly.
        options.observer(it, widen(bundle), widen(step.outcome));
      }
    }
    report.steps.push_back({it, std::move(step.metrics)});
    if (it % config.val_interval == 0 || it == config.iterations) validate_at(it);
  }

  report.modified_parameters =
      static_cast<std::size_t>(std::count(touched.begin(), touched.end(), 1));
  report.mean_retained_proportion =
      config.iterations > 0 ? retained_sum / config.iterations : 1.0;
  report.test_accuracy =
      evaluate(best, dataset.domains[config.target_domain], data::Split::Test);
  std::ostringstream ckpt;
  nn::write_checkpoint(ckpt, best);
  report.best_checkpoint = ckpt.str();
  return report;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config, const data::MultiDomainDataset& dataset,
                         const RunOptions& options) {
  if (dataset.domains.empty() || dataset.domains.front().examples.empty())
    throw ConfigError("dataset is empty");
  return config.precision == Precision::Double ? run_typed<double>(config, dataset, options)
                                               : run_typed<float>(config, dataset, options);
}

std::vector<RunReport> sweep_tau(const ExperimentConfig& config,
                                 const data::MultiDomainDataset& dataset,
                                 std::span<const int> taus,
                                 const std::function<RunOptions(int tau)>& options_for) {
  if (taus.empty()) throw ConfigError("tau list is empty");
  agg::VoteRule rule = agg::VoteRule::Strict;
  if (const auto* v = std::get_if<agg::Sggv>(&config.strategy)) rule = v->rule;
  std::vector<ExperimentConfig> configs;
  for (int tau : taus) {
    ExperimentConfig c = config;
    c.strategy = agg::Sggv{tau, rule};
    c.validate(dataset.domain_count());
    configs.push_back(std::move(c));
  }
  std::vector<RunReport> reports;
  for (std::size_t i = 0; i < configs.size(); ++i)
    reports.push_back(
        run_experiment(configs[i], dataset, options_for ? options_for(taus[i]) : RunOptions{}));
  return reports;
}

data::MultiDomainDataset load_dataset(const ExperimentConfig& config) {
  if (config.dataset.is_folder())
    return data::load_image_folder(config.dataset.folder,
                                   {config.dataset.image_size, config.seed});
  return data::generate_dataset(config.dataset.synthetic);
}

#define SGGV_INSTANTIATE(Real)                                                                 \
  template std::vector<TaggedBatch<Real>> build_bundles<Real>(                                 \
      const data::MultiDomainDataset&, std::span<const SourceDraw>, const ExperimentConfig&,   \
      std::uint64_t, GuidanceCounters*);                                                       \
  template StepResult<Real> train_step<Real>(nn::ModelState<Real>&,                            \
                                             std::span<const TaggedBatch<Real>>,               \
                                             const agg::Strategy&, const nn::AdamConfig&,      \
                                             Rng&, int, agg::GradientBundle<Real>*);           \
  template double evaluate<Real>(const nn::ModelState<Real>&, const data::DomainDataset&,      \
                                 data::Split);                                                 \
  template double evaluate<Real>(const nn::ModelState<Real>&, const data::MultiDomainDataset&, \
                                 std::span<const int>, data::Split);

SGGV_INSTANTIATE(float)
SGGV_INSTANTIATE(double)

}  // namespace sggv::harness

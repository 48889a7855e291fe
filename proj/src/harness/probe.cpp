#include "sggv/harness/probe.hpp"

#include <sstream>

#include "sggv/harness/experiment.hpp"
#include "sggv/nn/checkpoint.hpp"

namespace sggv::harness {

ProbeReport probe_domain_gap(const data::MultiDomainDataset& dataset,
                             const ProbeOptions& options) {
  const auto& first = dataset.domains.at(0).examples.at(0).image;
  const auto arch = nn::Architecture::linear_classifier(
      {first.channels, first.height, first.width}, dataset.class_count());

  ProbeReport report;
  for (std::uint64_t seed : options.seeds) {
    for (int target = 0; target < dataset.domain_count(); ++target) {
      ExperimentConfig config;
      config.target_domain = target;
      config.strategy = agg::DeepAll{};
      config.iterations = options.iterations;
      config.batch_size = options.batch_size;
      config.optimizer.learning_rate = options.lr;
      config.seed = seed;
      config.architecture = arch.descriptor();
      const RunReport run = run_experiment(config, dataset);

      std::istringstream is(run.best_checkpoint);
      const auto model = nn::read_checkpoint<double>(is);
      std::vector<int> sources;
      for (int d = 0; d < dataset.domain_count(); ++d)
        if (d != target) sources.push_back(d);

      ProbeFold fold;
      fold.target = run.target;
      fold.seed = seed;
      fold.source_accuracy = evaluate(model, dataset, sources, data::Split::Test);
      fold.target_accuracy = run.test_accuracy;
      report.mean_source_accuracy += fold.source_accuracy;
      report.mean_target_accuracy += fold.target_accuracy;
      report.folds.push_back(fold);
    }
  }
  if (!report.folds.empty()) {
    report.mean_source_accuracy /= static_cast<double>(report.folds.size());
    report.mean_target_accuracy /= static_cast<double>(report.folds.size());
  }
  report.certified =
      report.mean_source_accuracy >= options.min_source_accuracy &&
      report.mean_source_accuracy - report.mean_target_accuracy >= options.min_gap;
  return report;
}

}  // namespace sggv::harness

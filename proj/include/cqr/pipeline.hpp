#pragma once

#include <iosfwd>
#include <string>

#include "cqr/synth.hpp"

namespace cqr {

struct PipelineConfig {
  SynthConfig synth;
  SplitOptions split{0.15, 9, false, 2};
  int pool_size = 10;

  WalkConfig walk;
  EndColdConfig endcold;
  RegressorHyper seq_hyper;
  RegressorKind seq_kind = RegressorKind::Mlp;
  double pair_margin = 1.0;
  double pair_l2 = 1e-4;

  int threads = 1;

  PipelineConfig();  // desk-scale defaults tuned for the synthetic suite
};

struct ModelMetrics {
  std::string name;
  MetricReport existing_asker;
  MetricReport new_asker;
};

struct PipelineReport {
  std::vector<ModelMetrics> models;  // endcold, seq-pointwise-*, seq-pairwise
  size_t train_questions = 0;
  size_t test_existing = 0;
  size_t test_new = 0;
  double train_seconds = 0.0;
  double endcold_loss_first = 0.0;
  double endcold_loss_last = 0.0;

  const ModelMetrics& model(const std::string& name) const;
};

// Full synthetic benchmark: generate, split, train every pipeline
// (embeddings + pointwise ablations + pairwise + end-to-end), evaluate on
// both test splits with latent truth and padded candidate pools.
PipelineReport reproduce_synthetic(const PipelineConfig& cfg, std::ostream* log = nullptr);

void write_report_json(const PipelineReport& report, std::ostream& out);

}  // namespace cqr

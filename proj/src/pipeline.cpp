#include "cqr/pipeline.hpp"

#include <chrono>
#include <ostream>

#include <json.hpp>

#include "cqr/graph.hpp"
#include "cqr/skipgram.hpp"

namespace cqr {

PipelineConfig::PipelineConfig() {
  synth.seed = 9;
  synth.noise_sd = 0.5;

  walk.dim = 64;
  walk.walk_length = 40;
  walk.walks_per_node = 10;
  walk.window = 5;
  walk.negatives = 5;
  walk.epochs = 2;
  walk.step_size = 0.025;
  walk.seed = 9;

  endcold.d0 = 64;
  endcold.d1 = 64;
  endcold.d2 = 64;
  endcold.h1 = 128;
  endcold.h2 = 64;
  endcold.h3 = 32;
  endcold.step_size = 3e-3;
  endcold.epochs = 25;
  endcold.batch = 1024;
  endcold.seed = 9;

  seq_hyper.step_size = 3e-3;
  seq_hyper.epochs = 40;
  seq_hyper.batch = 256;
  seq_hyper.seed = 9;
  seq_hyper.mlp_h1 = 128;
  seq_hyper.mlp_h2 = 64;
  seq_hyper.mlp_h3 = 32;
}

const ModelMetrics& PipelineReport::model(const std::string& name) const {
  for (const auto& m : models)
    if (m.name == name) return m;
  throw DataError("no model " + name + " in report");
}

namespace {

Tensor assemble_matrix(const EmbeddingTable& table, const std::vector<TrainingCase>& cases,
                       const FeatureSpec& spec) {
  Tensor f(int(cases.size()), spec.feature_len());
  for (size_t i = 0; i < cases.size(); ++i) {
    std::vector<double> x = assemble(table, cases[i], spec);
    std::copy(x.begin(), x.end(), f.row(int(i)));
  }
  return f;
}

}  // namespace

PipelineReport reproduce_synthetic(const PipelineConfig& cfg, std::ostream* log) {
  set_threads(cfg.threads);
  auto say = [&](const std::string& msg) {
    if (log) *log << msg << std::endl;
  };
  auto now = [] { return std::chrono::steady_clock::now(); };
  auto t0 = now();

  say("generating synthetic community");
  SynthCorpus corpus = generate(cfg.synth);
  Dataset ds = make_splits({std::move(corpus.ids), std::move(corpus.records), {}}, cfg.split);

  PipelineReport report;
  report.test_existing = ds.questions_in(Split::TestExistingAsker).size();
  report.test_new = ds.questions_in(Split::TestNewAsker).size();
  report.train_questions =
      ds.count(NodeKind::Question) - report.test_existing - report.test_new;
  say("splits: " + std::to_string(report.train_questions) + " train, " +
      std::to_string(report.test_existing) + " test-existing, " +
      std::to_string(report.test_new) + " test-new");

  // everything trainable lives in the id space of the train records
  ParsedRecords tv = reintern_records(ds.ids(), ds.train_records());
  std::vector<TrainingCase> cases;
  cases.reserve(tv.records.size());
  for (const auto& r : tv.records) cases.push_back(to_case(r));
  CqaGraph graph = build_graph(tv.records);
  SparseMatrix ahat = normalize(graph).ahat;
  IdTranslation bridge = interner_translation(ds.ids(), tv.ids);

  say("training node embeddings (" + std::to_string(graph.node_count()) + " nodes)");
  std::vector<std::vector<int>> walks = generate_walks(graph, cfg.walk, cfg.threads);
  WalkConfig sg = cfg.walk;
  sg.parallel_updates = cfg.threads > 1;
  EmbeddingTable table = train_skipgram(walks, graph, sg, cfg.threads);
  walks.clear();
  walks.shrink_to_fit();

  std::vector<double> targets;
  targets.reserve(cases.size());
  for (const auto& c : cases) targets.push_back(c.target);

  std::vector<RegressorModel> pointwise;
  for (SeqVariant v : {SeqVariant::TA, SeqVariant::A, SeqVariant::T, SeqVariant::Un}) {
    FeatureSpec spec{v, table.dim()};
    say(std::string("training seq-pointwise-") + variant_name(v));
    Tensor features = assemble_matrix(table, cases, spec);
    pointwise.push_back(train_pointwise(features, targets, cfg.seq_kind, spec, cfg.seq_hyper));
  }

  say("training seq-pairwise");
  std::vector<PairConstraint> pairs = derive_pairs(cases);
  say("  " + std::to_string(pairs.size()) + " pair constraints from " +
      std::to_string(cases.size()) + " cases");
  FeatureSpec pair_spec{SeqVariant::TA, table.dim()};
  RegressorModel pairwise =
      train_pairwise(pairs, table, pair_spec, cfg.pair_margin, cfg.pair_l2, cfg.seq_hyper);

  say("training endcold");
  std::vector<CaseRef> refs;
  refs.reserve(cases.size());
  for (const auto& c : cases) refs.push_back(to_case_ref(graph, c));
  EndColdModel endcold = EndColdModel::init(graph.node_count(), cfg.endcold);
  TrainReport tr = train(endcold, ahat, refs, targets);
  report.endcold_loss_first = tr.epoch_loss.front();
  report.endcold_loss_last = tr.epoch_loss.back();
  say("  endcold loss " + std::to_string(tr.epoch_loss.front()) + " -> " +
      std::to_string(tr.epoch_loss.back()));

  report.train_seconds = std::chrono::duration<double>(now() - t0).count();
  say("training done in " + std::to_string(report.train_seconds) + " s");

  CandidatePools pools = build_candidate_pools(ds, Split::TestExistingAsker, cfg.pool_size,
                                               cfg.synth.seed);
  CandidatePools pools_new =
      build_candidate_pools(ds, Split::TestNewAsker, cfg.pool_size, cfg.synth.seed);
  pools.insert(pools_new.begin(), pools_new.end());

  EvalOptions opt;
  opt.pools = &pools;
  opt.truth = &corpus.truth;
  opt.threads = cfg.threads;

  auto run = [&](const std::string& name, const ColdScorer& scorer) {
    ModelMetrics m;
    m.name = name;
    m.existing_asker = evaluate(scorer, ds, Split::TestExistingAsker, opt);
    m.new_asker = evaluate(scorer, ds, Split::TestNewAsker, opt);
    say(name + ": existing acc " + std::to_string(m.existing_asker.accuracy) + " p@3 " +
        std::to_string(m.existing_asker.precision_at_3) + " | new acc " +
        std::to_string(m.new_asker.accuracy) + " p@3 " +
        std::to_string(m.new_asker.precision_at_3));
    report.models.push_back(std::move(m));
  };

  run("endcold", EndColdScorer(endcold, graph, bridge));
  const char* names[] = {"seq-pointwise-ta", "seq-pointwise-a", "seq-pointwise-t",
                         "seq-pointwise-un"};
  for (size_t i = 0; i < pointwise.size(); ++i)
    run(names[i], SeqScorer(table, pointwise[i], bridge));
  run("seq-pairwise", SeqScorer(table, pairwise, bridge));

  return report;
}

namespace {

nlohmann::json metrics_json(const MetricReport& r) {
  return {{"precision_at_1", r.precision_at_1},
          {"precision_at_3", r.precision_at_3},
          {"accuracy", r.accuracy},
          {"mrr", r.mrr},
          {"questions", r.questions},
          {"skipped", r.skipped}};
}

}  // namespace

void write_report_json(const PipelineReport& report, std::ostream& out) {
  nlohmann::json j;
  j["train_questions"] = report.train_questions;
  j["test_existing"] = report.test_existing;
  j["test_new"] = report.test_new;
  j["train_seconds"] = report.train_seconds;
  j["endcold_loss_first"] = report.endcold_loss_first;
  j["endcold_loss_last"] = report.endcold_loss_last;
  nlohmann::json models = nlohmann::json::object();
  for (const auto& m : report.models) {
    models[m.name] = {{"existing-asker", metrics_json(m.existing_asker)},
                      {"new-asker", metrics_json(m.new_asker)}};
  }
  j["models"] = std::move(models);
  out << j.dump(2) << '\n';
}

}  // namespace cqr

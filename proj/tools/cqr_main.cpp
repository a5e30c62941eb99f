// cqr: cold-question routing toolkit.
//
// One binary, one subcommand per pipeline stage. Data flows through the
// canonical JSON-lines record format; all model artifacts are plain text.
// stdin/stdout take over wherever a path is "-".

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cqr/eval.hpp"
#include "cqr/ingest.hpp"
#include "cqr/pipeline.hpp"
#include "cqr/textio.hpp"

using namespace cqr;

namespace {

struct InputStream {
  std::ifstream file;
  std::istream& get(const std::string& path) {
    if (path == "-") return std::cin;
    file.open(path);
    if (!file) throw DataError("cannot open " + path);
    return file;
  }
};

struct OutputStream {
  std::ofstream file;
  std::ostream& get(const std::string& path) {
    if (path == "-") return std::cout;
    file.open(path);
    if (!file) throw DataError("cannot open " + path + " for writing");
    return file;
  }
};

// Training artifacts live in the id space interned from the train records
// alone; entities seen only in test splits resolve to "unknown".
struct TrainView {
  ParsedRecords view;
  std::vector<TrainingCase> cases;
};

TrainView train_view_of(const Dataset& ds) {
  TrainView tv;
  tv.view = reintern_records(ds.ids(), ds.train_records());
  tv.cases.reserve(tv.view.records.size());
  for (const auto& r : tv.view.records) tv.cases.push_back(to_case(r));
  return tv;
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string sniff_model_kind(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string first;
  std::getline(in, first);
  if (first.rfind("endcold", 0) == 0) return "endcold";
  if (first.rfind("seqmodel", 0) == 0) return "seq";
  throw DataError(path + " is neither an endcold checkpoint nor a seq model");
}

struct LoadedScorer {
  // owns everything a scorer borrows
  std::unique_ptr<Dataset> dataset;
  TrainView tv;
  std::unique_ptr<CqaGraph> graph;
  std::unique_ptr<EndColdModel> endcold;
  std::unique_ptr<EmbeddingTable> table;
  std::unique_ptr<RegressorModel> regressor;
  std::unique_ptr<ColdScorer> scorer;
};

LoadedScorer load_scorer(const std::string& model_path, const std::string& emb_path,
                         const std::string& data_path, double test_fraction,
                         uint64_t seed) {
  LoadedScorer ls;
  {
    std::ifstream in(data_path);
    if (!in) throw DataError("cannot open " + data_path);
    ParsedRecords parsed = parse_canonical(in);
    if (parsed.splits.empty() && test_fraction > 0.0) {
      SplitOptions opt;
      opt.test_fraction = test_fraction;
      opt.seed = seed;
      ls.dataset = std::make_unique<Dataset>(make_splits(std::move(parsed), opt));
    } else {
      ls.dataset = std::make_unique<Dataset>(dataset_from_parsed(std::move(parsed)));
    }
  }
  ls.tv = train_view_of(*ls.dataset);
  IdTranslation bridge = interner_translation(ls.dataset->ids(), ls.tv.view.ids);

  std::string kind = sniff_model_kind(model_path);
  std::ifstream min(model_path);
  if (kind == "endcold") {
    ls.graph = std::make_unique<CqaGraph>(build_graph(ls.tv.view.records));
    ls.endcold = std::make_unique<EndColdModel>(EndColdModel::read(min));
    if (ls.endcold->n_nodes != ls.graph->node_count())
      throw DataError("checkpoint was trained on a different graph (" +
                      std::to_string(ls.endcold->n_nodes) + " vs " +
                      std::to_string(ls.graph->node_count()) + " nodes)");
    ls.scorer = std::make_unique<EndColdScorer>(*ls.endcold, *ls.graph, bridge);
  } else {
    if (emb_path.empty()) throw DataError("seq models need --emb");
    std::ifstream ein(emb_path);
    if (!ein) throw DataError("cannot open " + emb_path);
    ls.table = std::make_unique<EmbeddingTable>(EmbeddingTable::read(ein));
    ls.regressor = std::make_unique<RegressorModel>(RegressorModel::read(min));
    ls.scorer = std::make_unique<SeqScorer>(*ls.table, *ls.regressor, bridge);
  }
  return ls;
}

nlohmann::json metrics_json(const MetricReport& r) {
  return {{"precision_at_1", r.precision_at_1}, {"precision_at_3", r.precision_at_3},
          {"accuracy", r.accuracy},             {"mrr", r.mrr},
          {"questions", r.questions},           {"skipped", r.skipped}};
}

int run(int argc, char** argv) {
  CLI::App app{"cold-question routing toolkit"};
  app.require_subcommand(1);
  app.set_config("--config")->description("key=value config file; flags override it");
  app.allow_config_extras(false);

  int threads = 1;
  app.add_option("--threads", threads, "worker threads; 1 is bit-reproducible")
      ->capture_default_str();

  // ---- ingest ----
  auto* c_ingest = app.add_subcommand("ingest", "convert raw data to canonical records");
  std::string ingest_format = "jsonl", ingest_in, ingest_out;
  c_ingest->add_option("--format", ingest_format, "jsonl or se-xml")
      ->check(CLI::IsMember({"jsonl", "se-xml"}))
      ->capture_default_str();
  c_ingest->add_option("--input", ingest_in)->required();
  c_ingest->add_option("--output", ingest_out)->required();

  // ---- build-graph ----
  auto* c_graph = app.add_subcommand("build-graph", "build the interaction graph");
  std::string graph_in, graph_out;
  double graph_fraction = 0.0;
  uint64_t graph_split_seed = 1;
  bool graph_time_split = false;
  c_graph->add_option("--input", graph_in)->required();
  c_graph->add_option("--output", graph_out)->required();
  c_graph->add_option("--test-fraction", graph_fraction,
                      "hold out a test split first (same flags as the train steps)");
  c_graph->add_option("--split-seed", graph_split_seed)->capture_default_str();
  c_graph->add_flag("--time-split", graph_time_split,
                    "hold out the most recent questions instead of sampling");

  // ---- train-embed ----
  auto* c_embed = app.add_subcommand("train-embed", "random-walk node embeddings");
  std::string embed_graph, embed_out;
  WalkConfig walk;
  c_embed->add_option("--graph", embed_graph)->required();
  c_embed->add_option("--out", embed_out)->required();
  c_embed->add_option("--p", walk.p)->capture_default_str();
  c_embed->add_option("--q", walk.q)->capture_default_str();
  c_embed->add_option("--dim", walk.dim)->capture_default_str();
  c_embed->add_option("--walk-length", walk.walk_length)->capture_default_str();
  c_embed->add_option("--walks-per-node", walk.walks_per_node)->capture_default_str();
  c_embed->add_option("--window", walk.window)->capture_default_str();
  c_embed->add_option("--negatives", walk.negatives)->capture_default_str();
  c_embed->add_option("--epochs", walk.epochs)->capture_default_str();
  c_embed->add_option("--step-size", walk.step_size)->capture_default_str();
  c_embed->add_option("--seed", walk.seed)->capture_default_str();

  // ---- train-seq ----
  auto* c_seq = app.add_subcommand("train-seq", "regressor on fixed embeddings");
  std::string seq_emb, seq_cases, seq_out, seq_variant = "ta", seq_mode = "pointwise",
                                           seq_kind = "mlp";
  RegressorHyper hyper;
  double pair_margin = 1.0, pair_l2 = 1e-4;
  double seq_fraction = 0.0;
  uint64_t seq_split_seed = 1;
  c_seq->add_option("--emb", seq_emb)->required();
  c_seq->add_option("--cases", seq_cases)->required();
  c_seq->add_option("--out", seq_out)->required();
  c_seq->add_option("--variant", seq_variant)->check(CLI::IsMember({"un", "t", "a", "ta"}))
      ->capture_default_str();
  c_seq->add_option("--mode", seq_mode)->check(CLI::IsMember({"pointwise", "pairwise"}))
      ->capture_default_str();
  c_seq->add_option("--kind", seq_kind)->check(CLI::IsMember({"linear", "mlp"}))
      ->capture_default_str();
  c_seq->add_option("--step-size", hyper.step_size)->capture_default_str();
  c_seq->add_option("--epochs", hyper.epochs)->capture_default_str();
  c_seq->add_option("--batch", hyper.batch)->capture_default_str();
  c_seq->add_option("--seed", hyper.seed)->capture_default_str();
  c_seq->add_option("--eps-insensitive", hyper.eps_insensitive)->capture_default_str();
  c_seq->add_option("--l2", hyper.l2)->capture_default_str();
  c_seq->add_option("--margin", pair_margin, "pairwise hinge margin")->capture_default_str();
  c_seq->add_option("--pair-l2", pair_l2)->capture_default_str();
  c_seq->add_option("--test-fraction", seq_fraction,
                    "derive splits first when the file carries none");
  c_seq->add_option("--split-seed", seq_split_seed)->capture_default_str();

  // ---- train-endcold ----
  auto* c_end = app.add_subcommand("train-endcold", "joint encoder + regressor");
  std::string end_graph, end_cases, end_out;
  EndColdConfig ecfg;
  bool end_hinge = false;
  double end_fraction = 0.0;
  uint64_t end_split_seed = 1;
  c_end->add_option("--graph", end_graph)->required();
  c_end->add_option("--cases", end_cases)->required();
  c_end->add_option("--out", end_out)->required();
  c_end->add_option("--dim", ecfg.d0, "width of every encoder layer")->capture_default_str();
  c_end->add_option("--epochs", ecfg.epochs)->capture_default_str();
  c_end->add_option("--batch", ecfg.batch)->capture_default_str();
  c_end->add_option("--step-size", ecfg.step_size)->capture_default_str();
  c_end->add_option("--seed", ecfg.seed)->capture_default_str();
  c_end->add_flag("--hinge", end_hinge, "train on answerer-pair ranking instead of MSE");
  c_end->add_option("--margin", ecfg.hinge_margin)->capture_default_str();
  c_end->add_option("--test-fraction", end_fraction,
                    "derive splits first when the file carries none");
  c_end->add_option("--split-seed", end_split_seed)->capture_default_str();

  // ---- route ----
  auto* c_route = app.add_subcommand("route", "score candidates for one cold question");
  std::string route_model, route_emb, route_data, route_tags, route_asker, route_cands,
      route_batch_file;
  int route_top = 0;
  double route_fraction = 0.0;
  uint64_t route_split_seed = 1;
  c_route->add_option("--model", route_model)->required();
  c_route->add_option("--data", route_data, "training records (defines the id space)")
      ->required();
  c_route->add_option("--test-fraction", route_fraction,
                      "apply the same held-out split the model was trained with");
  c_route->add_option("--split-seed", route_split_seed)->capture_default_str();
  c_route->add_option("--emb", route_emb, "embeddings (seq models)");
  c_route->add_option("--tags", route_tags, "comma-separated tag ids");
  c_route->add_option("--asker", route_asker);
  c_route->add_option("--candidates", route_cands, "comma-separated user ids");
  c_route->add_option("--top", route_top, "print only the best K");
  c_route->add_option("--batch", route_batch_file,
                      "JSON-lines file of {tags, asker?, candidates} queries");

  // ---- evaluate ----
  auto* c_eval = app.add_subcommand("evaluate", "metrics over a test split");
  std::string eval_model, eval_emb, eval_data, eval_split = "existing", eval_report,
                                               eval_truth;
  double eval_fraction = 0.15;
  uint64_t eval_seed = 1;
  int eval_pool = 0;
  c_eval->add_option("--model", eval_model)->required();
  c_eval->add_option("--data", eval_data)->required();
  c_eval->add_option("--emb", eval_emb, "embeddings (seq models)");
  c_eval->add_option("--split", eval_split)->check(CLI::IsMember({"existing", "new"}))
      ->capture_default_str();
  c_eval->add_option("--report", eval_report, "where to write the JSON report")
      ->required();
  c_eval->add_option("--test-fraction", eval_fraction,
                     "used only when the file carries no split tags")
      ->capture_default_str();
  c_eval->add_option("--split-seed", eval_seed)->capture_default_str();
  c_eval->add_option("--pool-size", eval_pool,
                     "pad candidate pools with distractors to this size");
  c_eval->add_option("--truth", eval_truth, "JSON map question id -> best answerer id");

  // ---- synth-gen ----
  auto* c_synth = app.add_subcommand("synth-gen", "generate a synthetic community");
  SynthConfig scfg;
  std::string synth_out, synth_truth;
  c_synth->add_option("--users", scfg.n_users)->capture_default_str();
  c_synth->add_option("--questions", scfg.n_questions)->capture_default_str();
  c_synth->add_option("--tags", scfg.n_tags)->capture_default_str();
  c_synth->add_option("--topic-dim", scfg.topic_dim)->capture_default_str();
  c_synth->add_option("--tags-mean", scfg.tags_per_question_mean)->capture_default_str();
  c_synth->add_option("--answers-mean", scfg.answers_per_question_mean)
      ->capture_default_str();
  c_synth->add_option("--noise", scfg.noise_sd)->capture_default_str();
  c_synth->add_option("--fresh-fraction", scfg.fresh_asker_fraction)->capture_default_str();
  c_synth->add_option("--seed", scfg.seed)->capture_default_str();
  c_synth->add_option("--out", synth_out)->required();
  c_synth->add_option("--truth", synth_truth, "JSON truth map output");

  // ---- reproduce-synthetic ----
  auto* c_repro = app.add_subcommand("reproduce-synthetic",
                                     "full benchmark on a seeded synthetic community");
  PipelineConfig pcfg;
  std::string repro_out = "report.json";
  c_repro->add_option("--seed", pcfg.synth.seed)->capture_default_str();
  c_repro->add_option("--users", pcfg.synth.n_users)->capture_default_str();
  c_repro->add_option("--questions", pcfg.synth.n_questions)->capture_default_str();
  c_repro->add_option("--tags", pcfg.synth.n_tags)->capture_default_str();
  c_repro->add_option("--noise", pcfg.synth.noise_sd)->capture_default_str();
  c_repro->add_option("--pool-size", pcfg.pool_size)->capture_default_str();
  c_repro->add_option("--test-fraction", pcfg.split.test_fraction)->capture_default_str();
  c_repro->add_option("--dim", pcfg.walk.dim, "embedding width for both pipelines")
      ->capture_default_str();
  c_repro->add_option("--embed-epochs", pcfg.walk.epochs)->capture_default_str();
  c_repro->add_option("--endcold-epochs", pcfg.endcold.epochs)->capture_default_str();
  c_repro->add_option("--seq-epochs", pcfg.seq_hyper.epochs)->capture_default_str();
  std::string repro_seq_kind = "mlp";
  c_repro->add_option("--seq-kind", repro_seq_kind)->check(CLI::IsMember({"linear", "mlp"}))
      ->capture_default_str();
  c_repro->add_option("--out", repro_out)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;  // 0 covers --help and --version
  }
  set_threads(threads);

  if (*c_ingest) {
    InputStream is;
    OutputStream os;
    std::istream& in = is.get(ingest_in);
    ParsedRecords parsed;
    if (ingest_format == "jsonl") {
      parsed = parse_canonical(in);
    } else {
      StackExchangeStats stats;
      parsed = parse_stackexchange(in, &stats);
      std::cerr << "questions=" << stats.questions << " answers=" << stats.answers
                << " skipped_missing_owner=" << stats.skipped_missing_owner
                << " skipped_no_tags=" << stats.skipped_no_tags
                << " skipped_orphan_answers=" << stats.skipped_orphan_answers << "\n";
    }
    serialize_canonical(parsed.ids, parsed.records, os.get(ingest_out));
    std::cerr << "wrote " << parsed.records.size() << " records\n";
    return 0;
  }

  if (*c_graph) {
    InputStream is;
    OutputStream os;
    ParsedRecords parsed = parse_canonical(is.get(graph_in));
    Dataset ds = [&] {
      if (parsed.splits.empty() && graph_fraction > 0.0) {
        SplitOptions opt;
        opt.test_fraction = graph_fraction;
        opt.seed = graph_split_seed;
        opt.time_ordered = graph_time_split;
        return make_splits(std::move(parsed), opt);
      }
      return dataset_from_parsed(std::move(parsed));
    }();
    TrainView tv = train_view_of(ds);
    CqaGraph g = build_graph(tv.view.records);
    write_graph(g, os.get(graph_out));
    std::cerr << "graph: " << g.questions() << " questions, " << g.users() << " users, "
              << g.tags() << " tags, " << g.edges().size() << " edges\n";
    return 0;
  }

  if (*c_embed) {
    InputStream is;
    OutputStream os;
    CqaGraph g = read_graph(is.get(embed_graph));
    walk.parallel_updates = threads > 1;
    auto walks = generate_walks(g, walk, threads);
    EmbeddingTable table = train_skipgram(walks, g, walk, threads);
    table.write(os.get(embed_out));
    std::cerr << "embedded " << table.count() << " nodes at dim " << table.dim() << "\n";
    return 0;
  }

  if (*c_seq) {
    InputStream is;
    std::ifstream ein(seq_emb);
    if (!ein) throw DataError("cannot open " + seq_emb);
    EmbeddingTable table = EmbeddingTable::read(ein);

    ParsedRecords parsed = parse_canonical(is.get(seq_cases));
    Dataset ds = [&] {
      if (parsed.splits.empty() && seq_fraction > 0.0) {
        SplitOptions opt;
        opt.test_fraction = seq_fraction;
        opt.seed = seq_split_seed;
        return make_splits(std::move(parsed), opt);
      }
      return dataset_from_parsed(std::move(parsed));
    }();
    TrainView tv = train_view_of(ds);

    auto variant = *variant_from_name(seq_variant);
    FeatureSpec spec{variant, table.dim()};
    RegressorModel model;
    if (seq_mode == "pointwise") {
      Tensor features(int(tv.cases.size()), spec.feature_len());
      std::vector<double> targets;
      for (size_t i = 0; i < tv.cases.size(); ++i) {
        auto x = assemble(table, tv.cases[i], spec);
        std::copy(x.begin(), x.end(), features.row(int(i)));
        targets.push_back(tv.cases[i].target);
      }
      RegressorKind kind =
          seq_kind == "linear" ? RegressorKind::LinearEps : RegressorKind::Mlp;
      model = train_pointwise(features, targets, kind, spec, hyper);
    } else {
      auto pairs = derive_pairs(tv.cases);
      std::cerr << pairs.size() << " pair constraints\n";
      model = train_pairwise(pairs, table, spec, pair_margin, pair_l2, hyper);
    }
    OutputStream os;
    model.write(os.get(seq_out));
    return 0;
  }

  if (*c_end) {
    InputStream is, cs;
    CqaGraph g = read_graph(is.get(end_graph));
    ParsedRecords parsed = parse_canonical(cs.get(end_cases));
    Dataset ds = [&] {
      if (parsed.splits.empty() && end_fraction > 0.0) {
        SplitOptions opt;
        opt.test_fraction = end_fraction;
        opt.seed = end_split_seed;
        return make_splits(std::move(parsed), opt);
      }
      return dataset_from_parsed(std::move(parsed));
    }();
    TrainView tv = train_view_of(ds);
    if (g.node_count() != build_graph(tv.view.records).node_count())
      throw DataError("--graph does not match the train records in --cases");

    ecfg.d1 = ecfg.d2 = ecfg.d0;
    SparseMatrix ahat = normalize(g).ahat;
    EndColdModel model = EndColdModel::init(g.node_count(), ecfg);
    std::vector<CaseRef> refs;
    std::vector<double> targets;
    for (const auto& c : tv.cases) {
      refs.push_back(to_case_ref(g, c));
      targets.push_back(c.target);
    }
    TrainReport rep;
    if (end_hinge) {
      auto pairs = derive_pairs(tv.cases);
      std::vector<PairCaseRef> pair_refs;
      for (const auto& p : pairs) {
        TrainingCase plus{p.question, p.preferred, p.asker, p.tags, 0.0};
        TrainingCase minus{p.question, p.other, p.asker, p.tags, 0.0};
        pair_refs.push_back({to_case_ref(g, plus), to_case_ref(g, minus)});
      }
      rep = train_hinge(model, ahat, pair_refs);
    } else {
      rep = train(model, ahat, refs, targets);
    }
    std::cerr << "loss " << g9(rep.epoch_loss.front()) << " -> "
              << g9(rep.epoch_loss.back()) << "\n";
    OutputStream os;
    model.write(os.get(end_out));
    return 0;
  }

  if (*c_route) {
    LoadedScorer ls =
        load_scorer(route_model, route_emb, route_data, route_fraction, route_split_seed);
    const Interner& ids = ls.tv.view.ids;

    auto resolve_user = [&](const std::string& name, uint32_t fallback) {
      if (auto u = ids.find(NodeKind::User, name)) return *u;
      return NodeId{NodeKind::User, fallback};
    };

    auto run_query = [&](const std::vector<std::string>& tags, const std::string& asker,
                         const std::vector<std::string>& cands, std::ostream& out) {
      RoutingQuery q;
      for (const auto& t : tags) {
        if (auto tag = ids.find(NodeKind::Tag, t)) q.tags.push_back(*tag);
        else {
          std::cerr << "warning: dropping unknown tag " << t << "\n";
          q.tags.push_back({NodeKind::Tag, kUnknownLocal});
        }
      }
      if (!asker.empty()) q.asker = resolve_user(asker, kUnknownLocal);
      // unseen candidates get fresh locals past the trained range, in input
      // order, so ties resolve deterministically
      uint32_t next_unseen = ids.count(NodeKind::User);
      std::vector<std::string> names;
      for (const auto& c : cands) {
        q.candidates.push_back(resolve_user(c, next_unseen++));
        names.push_back(c);
      }
      RoutingResult r = route(*ls.scorer, q);
      int shown = 0;
      for (size_t i = 0; i < r.ranked.size(); ++i) {
        if (route_top > 0 && shown >= route_top) break;
        // map back to the caller's name
        std::string name;
        for (size_t k = 0; k < q.candidates.size(); ++k)
          if (q.candidates[k] == r.ranked[i].candidate) name = names[k];
        out << (i + 1) << ' ' << name << ' ' << g9(r.ranked[i].score) << '\n';
        ++shown;
      }
    };

    if (!route_batch_file.empty()) {
      InputStream is;
      std::istream& in = is.get(route_batch_file);
      std::string line;
      size_t lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded()) throw ParseError(lineno, "bad JSON query");
        std::vector<std::string> tags = obj.at("tags").get<std::vector<std::string>>();
        std::string asker = obj.value("asker", std::string());
        std::vector<std::string> cands =
            obj.at("candidates").get<std::vector<std::string>>();
        std::cout << "# query " << lineno << "\n";
        run_query(tags, asker, cands, std::cout);
      }
    } else {
      if (route_tags.empty() || route_cands.empty())
        throw DataError("route needs --tags and --candidates (or --batch)");
      run_query(split_csv(route_tags), route_asker, split_csv(route_cands), std::cout);
    }
    return 0;
  }

  if (*c_eval) {
    LoadedScorer ls = load_scorer(eval_model, eval_emb, eval_data, eval_fraction, eval_seed);
    Split split = eval_split == "existing" ? Split::TestExistingAsker : Split::TestNewAsker;

    EvalOptions opt;
    opt.threads = threads;
    CandidatePools pools;
    if (eval_pool > 0) {
      pools = build_candidate_pools(*ls.dataset, split, eval_pool, eval_seed);
      opt.pools = &pools;
    }
    TruthMap truth;
    if (!eval_truth.empty()) {
      std::ifstream tin(eval_truth);
      if (!tin) throw DataError("cannot open " + eval_truth);
      nlohmann::json tj;
      tin >> tj;
      for (auto& [k, v] : tj.items()) {
        auto q = ls.dataset->ids().find(NodeKind::Question, k);
        auto u = ls.dataset->ids().find(NodeKind::User, v.get<std::string>());
        if (q && u) truth[q->local] = *u;
      }
      opt.truth = &truth;
    }

    MetricReport r = evaluate(*ls.scorer, *ls.dataset, split, opt);
    nlohmann::json out = metrics_json(r);
    out["split"] = eval_split;
    OutputStream os;
    os.get(eval_report) << out.dump(2) << '\n';
    std::cout << "split=" << eval_split << " questions=" << r.questions
              << " p@1=" << g9(r.precision_at_1) << " p@3=" << g9(r.precision_at_3)
              << " accuracy=" << g9(r.accuracy) << " mrr=" << g9(r.mrr) << '\n';
    return 0;
  }

  if (*c_synth) {
    SynthCorpus corpus = generate(scfg);
    OutputStream os;
    serialize_canonical(corpus.ids, corpus.records, os.get(synth_out));
    if (!synth_truth.empty()) {
      nlohmann::json tj = nlohmann::json::object();
      for (const auto& [q, u] : corpus.truth)
        tj[corpus.ids.name(question_id(q))] = corpus.ids.name(u);
      OutputStream ts;
      ts.get(synth_truth) << tj.dump(2) << '\n';
    }
    std::cerr << "wrote " << corpus.records.size() << " records\n";
    return 0;
  }

  if (*c_repro) {
    pcfg.threads = threads;
    pcfg.walk.seed = pcfg.synth.seed;
    pcfg.endcold.seed = pcfg.synth.seed;
    pcfg.seq_hyper.seed = pcfg.synth.seed;
    pcfg.split.seed = pcfg.synth.seed;
    pcfg.seq_kind =
        repro_seq_kind == "linear" ? RegressorKind::LinearEps : RegressorKind::Mlp;
    PipelineReport rep = reproduce_synthetic(pcfg, &std::cerr);
    OutputStream os;
    write_report_json(rep, os.get(repro_out));
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

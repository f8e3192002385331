// hub: command-line front end over the lithub library.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lithub/citation.hpp"
#include "lithub/corpus_store.hpp"
#include "lithub/datasets.hpp"
#include "lithub/entities.hpp"
#include "lithub/error.hpp"
#include "lithub/eval.hpp"
#include "lithub/hub_service.hpp"
#include "lithub/insights.hpp"
#include "lithub/longcovid.hpp"
#include "lithub/pipeline.hpp"
#include "lithub/search_index.hpp"
#include "lithub/topics.hpp"
#include "lithub/triage.hpp"

using namespace lithub;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config;
  std::string data_dir;
};

HubConfig resolve_config(const Globals& g) {
  HubConfig c = g.config.empty() ? HubConfig::from_env() : HubConfig::load(g.config);
  if (!g.data_dir.empty()) c.data_dir = g.data_dir;
  return c;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::BadInput, "cannot write " + path);
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::stringstream ss(line);
  std::string col;
  while (std::getline(ss, col, '\t')) cols.push_back(col);
  return cols;
}

bool looks_like_mentions(const fs::path& path) {
  for (const auto& line : read_lines(path))
    if (!line.empty() && line.front() != '#') return split_tabs(line).size() == 7;
  return false;
}

std::set<std::string> item_set(const fs::path& path) {
  std::set<std::string> out;
  for (const auto& line : read_lines(path)) {
    auto t = trim(line);
    if (!t.empty() && t.front() != '#') out.emplace(t);
  }
  return out;
}

std::shared_ptr<const CollectionSnapshot> require_snapshot(const HubConfig& c) {
  auto snap = SnapshotDirectory(c.data_dir).load_current();
  if (!snap) throw Error(Errc::NotFound, "no snapshot published under " + c.data_dir.string() + " (run `hub run` first)");
  return snap;
}

TrainHyper hyper_from(double lr, int epochs, double l2) { return TrainHyper{lr, epochs, l2}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lithub: literature curation hub"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "hub config file (JSON)");
  app.add_option("--data-dir", g.data_dir, "data directory (default: $HUB_DATA_DIR or ./hub-data)");

  int exit_code = 0;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "ingest a corpus file into the store");
  std::string ingest_path;
  bool dry_run = false;
  ingest->add_option("path", ingest_path)->required();
  ingest->add_flag("--dry-run", dry_run);
  ingest->callback([&] {
    auto c = resolve_config(g);
    auto store = dry_run ? CorpusStore() : CorpusStore::open(HubPaths{c.data_dir}.store());
    if (dry_run && fs::exists(HubPaths{c.data_dir}.store())) store = CorpusStore::open(HubPaths{c.data_dir}.store());
    auto report = store.ingest_batch(read_lines(ingest_path), Timestamp::now(), dry_run);
    std::cout << report.summary_line() << '\n';
    for (const auto& r : report.rejects) std::cout << "reject\tline " << r.line_number << '\t' << r.reason << '\n';
    for (const auto& w : report.warnings) std::cout << "warning\tline " << w.line_number << '\t' << w.reason << '\n';
  });

  // train
  auto* train = app.add_subcommand("train", "train a model");
  train->require_subcommand(1);
  double lr = 0.05, l2 = 1e-4;
  int epochs = 300;
  std::string data, out_path, labels, topics_file;
  auto* train_triage_cmd = train->add_subcommand("triage", "train the triage classifier");
  train_triage_cmd->add_option("--data", data, "labeled corpus (JSON lines with a relevant key)")->required();
  train_triage_cmd->add_option("--out", out_path)->required();
  train_triage_cmd->add_option("--lr", lr);
  train_triage_cmd->add_option("--epochs", epochs);
  train_triage_cmd->add_option("--l2", l2);
  train_triage_cmd->callback([&] {
    auto examples = read_labeled_records(data);
    auto fit = train_triage(examples, hyper_from(lr, epochs, l2));
    fit.model.save(out_path);
    std::printf("examples=%zu vocabulary=%zu final_loss=%.6f\n", examples.size(), fit.model.vocab.size(),
                fit.loss_history.back());
  });
  auto* train_topics_cmd = train->add_subcommand("topics", "train the multi-label topic model");
  train_topics_cmd->add_option("--data", data, "corpus file")->required();
  train_topics_cmd->add_option("--labels", labels, "pmid<TAB>comma-separated topics")->required();
  train_topics_cmd->add_option("--out", out_path)->required();
  train_topics_cmd->add_option("--topics", topics_file, "topic names, one per line");
  train_topics_cmd->add_option("--lr", lr);
  train_topics_cmd->add_option("--epochs", epochs);
  train_topics_cmd->add_option("--l2", l2);
  train_topics_cmd->callback([&] {
    auto topics = topics_file.empty() ? TopicSet::defaults() : TopicSet::load(topics_file);
    auto label_map = read_topic_labels(labels);
    std::vector<TopicExample> examples;
    for (auto& rec : read_corpus(data)) {
      auto it = label_map.find(rec.pmid);
      if (it == label_map.end()) continue;
      examples.push_back({std::move(rec), it->second});
    }
    auto fit = train_topics(examples, topics, hyper_from(lr, epochs, l2));
    fit.model.save(out_path);
    std::printf("examples=%zu topics=%zu final_loss=%.6f\n", examples.size(), topics.size(), fit.loss_history.back());
  });

  // triage
  auto* triage_cmd = app.add_subcommand("triage", "classify a corpus for relevance");
  std::string model_path, in_path;
  triage_cmd->add_option("--model", model_path)->required();
  triage_cmd->add_option("--in", in_path)->required();
  triage_cmd->add_option("--out", out_path)->required();
  triage_cmd->callback([&] {
    auto model = LinearModel::load(model_path);
    auto out = open_out(out_path);
    std::size_t relevant = 0, n = 0;
    for (const auto& rec : read_corpus(in_path)) {
      auto d = triage(rec, &model);
      char score[32];
      std::snprintf(score, sizeof score, "%.6f", d.score);
      out << rec.pmid << '\t' << (d.relevant ? 1 : 0) << '\t' << score << '\t' << static_cast<int>(d.category) << '\n';
      relevant += d.relevant;
      ++n;
    }
    std::printf("records=%zu relevant=%zu excluded=%zu\n", n, relevant, n - relevant);
  });

  // annotate
  auto* annotate = app.add_subcommand("annotate", "annotate a corpus");
  annotate->require_subcommand(1);
  bool all_scores = false;
  std::string lexicon_path;
  auto* annotate_topics_cmd = annotate->add_subcommand("topics", "assign topics");
  annotate_topics_cmd->add_option("--model", model_path)->required();
  annotate_topics_cmd->add_option("--in", in_path)->required();
  annotate_topics_cmd->add_option("--out", out_path)->required();
  annotate_topics_cmd->add_flag("--all-scores", all_scores);
  annotate_topics_cmd->callback([&] {
    auto model = MultiLabelModel::load(model_path);
    auto out = open_out(out_path);
    for (const auto& rec : read_corpus(in_path)) {
      auto a = annotate_topics(rec, &model);
      for (std::size_t k = 0; k < model.topics.size(); ++k) {
        const bool assigned = std::find(a.assigned.begin(), a.assigned.end(), model.topics[k]) != a.assigned.end();
        if (!assigned && !all_scores) continue;
        char score[32];
        std::snprintf(score, sizeof score, "%.6f", a.scores[k]);
        out << rec.pmid << '\t' << model.topics[k] << '\t' << score << '\n';
      }
    }
  });
  auto* annotate_entities_cmd = annotate->add_subcommand("entities", "recognize and normalize entities");
  annotate_entities_cmd->add_option("--lexicon", lexicon_path)->required();
  annotate_entities_cmd->add_option("--in", in_path)->required();
  annotate_entities_cmd->add_option("--out", out_path)->required();
  annotate_entities_cmd->callback([&] {
    auto lexicon = Lexicon::load(lexicon_path);
    auto out = open_out(out_path);
    std::size_t n = 0;
    for (const auto& rec : read_corpus(in_path)) {
      auto mentions = annotate_entities(rec, lexicon);
      n += mentions.size();
      write_mentions(out, mentions);
    }
    std::printf("mentions=%zu\n", n);
  });

  // loop
  auto* loop_cmd = app.add_subcommand("loop", "Long COVID review loop");
  loop_cmd->require_subcommand(1);
  std::string seeds_path, curator, label_text;
  std::size_t k = 10;
  Pmid pmid = 0;
  auto* loop_init = loop_cmd->add_subcommand("init", "install seed labels");
  loop_init->add_option("--seeds", seeds_path)->required();
  loop_init->callback([&] {
    auto c = resolve_config(g);
    auto seeds = read_seed_labels(seeds_path);
    const HubPaths paths{c.data_dir};
    fs::create_directories(paths.seeds().parent_path());
    fs::copy_file(seeds_path, paths.seeds(), fs::copy_options::overwrite_existing);
    std::printf("seeds=%zu\n", seeds.size());
  });
  auto* loop_signals = loop_cmd->add_subcommand("signals", "print the signal vector of every pool article");
  loop_signals->callback([&] {
    auto c = resolve_config(g);
    auto loop = open_loop(*require_snapshot(c), c);
    std::cout << "pmid";
    for (std::size_t i = 0; i < kSignalCount; ++i) std::cout << '\t' << signal_name(i);
    std::cout << "\tp\tstatus\n";
    for (const auto& [id, item] : loop->state()->items) {
      std::cout << id;
      for (double s : item.signals) std::printf("\t%.6f", s);
      std::printf("\t%.6f\t", item.p);
      std::cout << review_status_name(item.status) << '\n';
    }
  });
  auto* loop_queue = loop_cmd->add_subcommand("queue", "next review batch");
  loop_queue->add_option("-k", k);
  loop_queue->callback([&] {
    auto c = resolve_config(g);
    auto snap = require_snapshot(c);
    auto loop = open_loop(*snap, c);
    std::printf("iteration=%zu\n", loop->iteration());
    for (const auto& item : loop->next_review_batch(k))
      std::printf("%lld\t%.6f\t%.6f\t%s\n", static_cast<long long>(item.pmid), item.p, item.priority,
                  snap->records.at(item.pmid).title.c_str());
  });
  auto* loop_decide = loop_cmd->add_subcommand("decide", "record a curator decision");
  loop_decide->add_option("pmid", pmid)->required();
  loop_decide->add_option("label", label_text)->required()->check(CLI::IsMember({"accept", "reject"}));
  loop_decide->add_option("--curator", curator)->required();
  loop_decide->callback([&] {
    auto c = resolve_config(g);
    auto loop = open_loop(*require_snapshot(c), c);
    const auto now = Timestamp::now();
    auto item = loop->record_decision(pmid, label_text == "accept", curator, now);
    const HubPaths paths{c.data_dir};
    fs::create_directories(paths.decisions().parent_path());
    append_decision(paths.decisions(), Decision{pmid, label_text == "accept", curator, now, item.iteration});
    std::printf("%lld\t%s\t%s\n", static_cast<long long>(pmid), std::string(review_status_name(item.status)).c_str(),
                curator.c_str());
  });
  auto* loop_iterate = loop_cmd->add_subcommand("iterate", "retrain on all decisions so far");
  loop_iterate->callback([&] {
    auto c = resolve_config(g);
    auto loop = open_loop(*require_snapshot(c), c);
    loop->run_iteration();
    const HubPaths paths{c.data_dir};
    append_iteration_mark(paths.decisions(), DecisionLog::read(paths.decisions()).decisions.size(), loop->iteration());
    auto m = loop->collection_membership();
    std::printf("iteration=%zu members=%zu provisional=%zu\n", loop->iteration(), m.members.size(),
                m.provisional.size());
  });

  // eval
  auto* eval = app.add_subcommand("eval", "evaluation harness");
  eval->require_subcommand(1);
  std::string gold, pred, a_path, b_path, ids_path;
  bool by_type = false;
  auto* eval_prf = eval->add_subcommand("prf", "precision, recall, F1");
  eval_prf->add_option("--gold", gold)->required();
  eval_prf->add_option("--pred", pred)->required();
  eval_prf->add_flag("--by-type", by_type);
  eval_prf->callback([&] {
    if (looks_like_mentions(gold)) {
      auto gm = read_mentions(fs::path(gold));
      auto pm = read_mentions(fs::path(pred));
      auto score = score_mentions(gm, pm);
      std::cout << score.micro.summary_line() << '\n';
      if (by_type) {
        std::printf("%-10s %6s %6s %6s %9s %9s %9s\n", "type", "tp", "fp", "fn", "precision", "recall", "f1");
        for (const auto& [type, p] : score.by_type)
          std::printf("%-10s %6zu %6zu %6zu %9.4f %9.4f %9.4f\n", std::string(entity_type_name(type)).c_str(), p.tp,
                      p.fp, p.fn, p.precision, p.recall, p.f1);
      }
    } else {
      std::cout << prf(item_set(gold), item_set(pred)).summary_line() << '\n';
    }
  });
  auto* eval_iaa = eval->add_subcommand("iaa", "exact-match inter-annotator agreement");
  eval_iaa->add_option("--a", a_path)->required();
  eval_iaa->add_option("--b", b_path)->required();
  eval_iaa->callback([&] {
    auto r = iaa_exact(read_mentions(fs::path(a_path)), read_mentions(fs::path(b_path)));
    std::cout << r.summary_line() << '\n';
  });
  auto* eval_split = eval->add_subcommand("split", "seeded train/test split");
  std::size_t n_total = 0, n_train = 0;
  std::uint64_t seed = 0;
  eval_split->add_option("--n", n_total, "ids 1..n when --ids is absent");
  eval_split->add_option("--ids", ids_path);
  eval_split->add_option("--train", n_train)->required();
  eval_split->add_option("--seed", seed)->required();
  eval_split->add_option("--out", out_path, "write role<TAB>pmid lines");
  eval_split->callback([&] {
    std::vector<Pmid> ids;
    if (!ids_path.empty()) {
      ids = read_pmids(ids_path);
    } else {
      for (std::size_t i = 1; i <= n_total; ++i) ids.push_back(static_cast<Pmid>(i));
    }
    if (n_train > ids.size()) throw Error(Errc::SizeMismatch, "--train exceeds the number of ids");
    auto s = split(ids, n_train, ids.size() - n_train, seed);
    std::printf("n=%zu train=%zu test=%zu seed=%llu\n", ids.size(), s.train.size(), s.test.size(),
                static_cast<unsigned long long>(seed));
    if (!out_path.empty()) {
      auto out = open_out(out_path);
      for (auto id : s.train) out << "train\t" << id << '\n';
      for (auto id : s.test) out << "test\t" << id << '\n';
    }
  });
  auto* eval_coverage = eval->add_subcommand("coverage", "overlap between two collections");
  eval_coverage->add_option("--a", a_path)->required();
  eval_coverage->add_option("--b", b_path)->required();
  eval_coverage->callback([&] {
    auto a = read_pmids(a_path), b = read_pmids(b_path);
    auto r = compare_collections(std::set<Pmid>(a.begin(), a.end()), std::set<Pmid>(b.begin(), b.end()));
    std::cout << r.summary_line() << '\n';
  });

  // search
  auto* search_cmd = app.add_subcommand("search", "faceted search over the live snapshot");
  std::string query_text, sort = "date";
  std::size_t page = 1, size = 20;
  search_cmd->add_option("query", query_text);
  search_cmd->add_option("--page", page);
  search_cmd->add_option("--size", size);
  search_cmd->add_option("--sort", sort)->check(CLI::IsMember({"relevance", "date", "date_desc"}));
  search_cmd->callback([&] {
    auto c = resolve_config(g);
    auto snap = require_snapshot(c);
    auto q = parse_query(query_text);
    q.page = page;
    q.page_size = size;
    q.sort = sort == "relevance" ? SortOrder::Relevance : SortOrder::DateDesc;
    auto result = snap->index.search(q);
    std::printf("total=%zu page=%zu size=%zu\n", result.total, page, size);
    for (const auto& hit : result.page) {
      const auto& rec = snap->records.at(hit.pmid);
      std::printf("%lld\t%s\t%.4f\t%s\t%s\n", static_cast<long long>(hit.pmid), hit.pub_date.iso().c_str(), hit.score,
                  rec.journal.c_str(), rec.title.c_str());
    }
    for (const auto& [facet, values] : result.facet_counts)
      for (const auto& [value, n] : values)
        std::printf("facet\t%s\t%s\t%zu\n", std::string(facet_name(facet)).c_str(), value.c_str(), n);
  });

  // stats
  auto* stats = app.add_subcommand("stats", "corpus analytics");
  stats->require_subcommand(1);
  std::string granularity = "month", baseline_path, external_path;
  bool csv = false;
  std::size_t top_n = 6;
  auto collection_dates = [](const CollectionSnapshot& s) {
    std::vector<Date> dates;
    for (const auto& [id, rec] : s.records) dates.push_back(rec.pub_date);
    return dates;
  };
  auto* stats_growth = stats->add_subcommand("growth", "publication growth series");
  stats_growth->add_option("--granularity", granularity)->check(CLI::IsMember({"day", "month", "quarter"}));
  stats_growth->add_flag("--csv", csv);
  stats_growth->callback([&] {
    auto c = resolve_config(g);
    auto series = growth(collection_dates(*require_snapshot(c)), *parse_granularity(granularity));
    if (csv) {
      std::cout << series.csv();
    } else {
      for (const auto& row : series.rows) std::printf("%-12s %8zu %8zu\n", row.period.c_str(), row.new_count, row.cumulative);
    }
  });
  auto* stats_share = stats->add_subcommand("share", "collection share of a baseline corpus");
  stats_share->add_option("--baseline", baseline_path, "period<TAB>count");
  stats_share->add_option("--granularity", granularity)->check(CLI::IsMember({"day", "month", "quarter"}));
  stats_share->callback([&] {
    auto c = resolve_config(g);
    fs::path path = !baseline_path.empty() ? fs::path(baseline_path) : c.baseline.value_or(fs::path{});
    if (path.empty()) throw Error(Errc::BadInput, "no baseline file (--baseline or config baseline)");
    if (stats_share->count("--granularity") == 0) granularity = "quarter";
    auto series = growth(collection_dates(*require_snapshot(c)), *parse_granularity(granularity));
    std::cout << "period,collection,baseline,ratio\n";
    for (const auto& row : share_ratio(series, read_baseline(path))) {
      std::cout << row.period << ',' << row.collection << ',' << row.baseline << ',';
      if (row.ratio) std::printf("%.6f", *row.ratio);
      std::cout << '\n';
    }
  });
  auto* stats_cooc = stats->add_subcommand("cooccurrence", "topic co-occurrence matrix");
  stats_cooc->callback([&] {
    auto c = resolve_config(g);
    auto snap = require_snapshot(c);
    std::vector<std::set<std::string>> sets;
    for (const auto& [id, rec] : snap->records) {
      sets.emplace_back();
      if (auto t = snap->topics.find(id); t != snap->topics.end()) sets.back().insert(t->second.assigned.begin(), t->second.assigned.end());
    }
    auto topics = snap->topic_names.empty() ? TopicSet::defaults() : TopicSet(snap->topic_names);
    auto m = cooccurrence(sets, topics);
    std::cout << "topic";
    for (const auto& t : m.topics) std::cout << ',' << csv_field(t);
    std::cout << '\n';
    for (std::size_t i = 0; i < m.topics.size(); ++i) {
      std::cout << csv_field(m.topics[i]);
      for (auto n : m.counts[i]) std::cout << ',' << n;
      std::cout << '\n';
    }
  });
  auto* stats_trending = stats->add_subcommand("trending", "trending publications in the collection");
  stats_trending->add_option("--external", external_path, "pmid<TAB>score");
  stats_trending->add_option("-n", top_n);
  stats_trending->callback([&] {
    auto c = resolve_config(g);
    fs::path path = !external_path.empty() ? fs::path(external_path) : c.trending.value_or(fs::path{});
    if (path.empty()) throw Error(Errc::BadInput, "no trending file (--external or config trending)");
    auto snap = require_snapshot(c);
    std::set<Pmid> members;
    for (const auto& [id, rec] : snap->records) members.insert(id);
    for (const auto& t : trending(members, read_trending(path), top_n))
      std::printf("%lld\t%.6f\t%s\n", static_cast<long long>(t.pmid), t.score, snap->records.at(t.pmid).title.c_str());
  });

  // run
  auto* run_cmd = app.add_subcommand("run", "daily pipeline over a delta file");
  std::string delta, fail_stage;
  run_cmd->add_option("--delta", delta)->required();
  run_cmd->add_option("--fail-stage", fail_stage, "inject a failure in the named stage")->group("");
  run_cmd->callback([&] {
    if (g.config.empty()) throw Error(Errc::BadInput, "run requires --config");
    auto c = resolve_config(g);
    PipelineOptions options;
    if (!fail_stage.empty()) options.fail_stage = fail_stage;
    auto run = run_daily(delta, c, options);
    std::printf("run=%s status=%s %s snapshot=%s\n", run.run_id.c_str(), run.status_text().c_str(),
                run.ingest.summary_line().c_str(), run.published_snapshot.value_or("-").c_str());
    for (const auto& s : run.stages)
      std::printf("  %-10s in=%zu out=%zu errors=%zu %.3fs\n", s.name.c_str(), s.input, s.output, s.errors, s.seconds);
    if (!run.error.empty()) std::fprintf(stderr, "error: %s\n", run.error.c_str());
    if (run.status != RunStatus::Succeeded) exit_code = run.status == RunStatus::Partial ? 3 : 1;
  });

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "HTTP API");
  int port = 8080;
  std::string host = "127.0.0.1";
  serve_cmd->add_option("--port", port);
  serve_cmd->add_option("--host", host);
  serve_cmd->callback([&] {
    HubService service(resolve_config(g));
    std::fprintf(stderr, "serving %s on %s:%d\n", service.config().data_dir.c_str(), host.c_str(), port);
    service.serve(host, port);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", std::string(errc_name(e.code())).c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return exit_code;
}

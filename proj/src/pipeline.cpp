#include "lithub/pipeline.hpp"

#include <json.hpp>

#include <sys/file.h>
#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lithub/error.hpp"
#include "model_io.hpp"

namespace lithub {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::optional<fs::path> optional_path(const json& j, const char* key, const fs::path& base) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  fs::path p = j[key].get<std::string>();
  return p.is_absolute() ? p : base / p;
}

std::string category_text(ExclusionCategory c) { return std::to_string(static_cast<int>(c)); }

// Exclusive advisory lock on <data_dir>/.lock for the lifetime of the object.
class DataDirLock {
 public:
  explicit DataDirLock(const fs::path& root) {
    fs::create_directories(root);
    fd_ = ::open((root / ".lock").c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0 || ::flock(fd_, LOCK_EX) != 0)
      throw Error(Errc::StoreUnavailable, "cannot lock " + root.string());
  }
  ~DataDirLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  DataDirLock(const DataDirLock&) = delete;
  DataDirLock& operator=(const DataDirLock&) = delete;

 private:
  int fd_ = -1;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::StoreUnavailable, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::StoreUnavailable, "write failed on " + path.string());
}

std::vector<std::string> split_tab(const std::string& line) {
  std::vector<std::string> cols;
  std::stringstream ss(line);
  std::string col;
  while (std::getline(ss, col, '\t')) cols.push_back(col);
  if (!line.empty() && line.back() == '\t') cols.emplace_back();
  return cols;
}

}  // namespace

HubConfig HubConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::BadInput, "cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::BadInput, "config is not valid JSON: " + std::string(e.what()));
  }
  const fs::path base = fs::absolute(path).parent_path();
  HubConfig c;
  if (auto p = optional_path(j, "data_dir", base)) c.data_dir = *p;
  c.triage_model = optional_path(j, "triage_model", base);
  c.topic_model = optional_path(j, "topic_model", base);
  c.lexicon = optional_path(j, "lexicon", base);
  c.longcovid_lexicon = optional_path(j, "longcovid_lexicon", base);
  c.drug_mentions = optional_path(j, "drug_mentions", base);
  c.seeds = optional_path(j, "seeds", base);
  c.trending = optional_path(j, "trending", base);
  c.baseline = optional_path(j, "baseline", base);
  if (j.contains("keywords")) c.keywords = j["keywords"].get<std::vector<std::string>>();
  if (j.contains("auto_include_threshold")) c.auto_include_threshold = j["auto_include_threshold"].get<double>();
  if (const char* env = std::getenv("HUB_DATA_DIR"); env && *env) c.data_dir = env;
  return c;
}

HubConfig HubConfig::from_env() {
  HubConfig c;
  if (const char* env = std::getenv("HUB_DATA_DIR"); env && *env) c.data_dir = env;
  return c;
}

DocumentFacets CollectionSnapshot::facets(Pmid pmid) const {
  DocumentFacets f;
  if (auto t = topics.find(pmid); t != topics.end()) f.topics.insert(t->second.assigned.begin(), t->second.assigned.end());
  if (auto m = mentions.find(pmid); m != mentions.end()) {
    for (const auto& mention : m->second) {
      if (mention.type == EntityType::Strain) f.strains.insert(mention.concept_id);
      if (mention.type == EntityType::Vaccine) f.vaccines.insert(mention.concept_id);
    }
  }
  if (auto d = drugs.find(pmid); d != drugs.end()) f.drugs = d->second;
  if (auto lc = longcovid.find(pmid); lc != longcovid.end()) f.longcovid = lc->second.status;
  return f;
}

std::vector<CitationRecord> CollectionSnapshot::record_list() const {
  std::vector<CitationRecord> out;
  out.reserve(records.size());
  for (const auto& [pmid, r] : records) out.push_back(r);
  return out;
}

void CollectionSnapshot::rebuild_index() {
  std::map<Pmid, DocumentFacets> facet_map;
  for (const auto& [pmid, r] : records) facet_map[pmid] = facets(pmid);
  index = SearchIndex::build(record_list(), facet_map);
}

void CollectionSnapshot::write(const fs::path& dir) const {
  fs::create_directories(dir);
  std::ostringstream recs, proc, tops, ments, lc, dr;
  for (const auto& [pmid, r] : records) recs << serialize_record(r) << '\n';
  for (const auto& [pmid, row] : processed) {
    const auto& d = row.decision;
    proc << pmid << '\t' << detail::format_hex(row.hash) << '\t' << (d.relevant ? 1 : 0) << '\t'
         << detail::format_double(d.score) << '\t' << category_text(d.category) << '\t' << d.rationale << '\n';
  }
  tops << "#topics";
  for (const auto& name : topic_names) tops << '\t' << name;
  tops << '\n';
  for (const auto& [pmid, a] : topics) {
    for (std::size_t k = 0; k < a.scores.size() && k < topic_names.size(); ++k) {
      const bool assigned = std::find(a.assigned.begin(), a.assigned.end(), topic_names[k]) != a.assigned.end();
      tops << pmid << '\t' << topic_names[k] << '\t' << detail::format_double(a.scores[k]) << '\t' << (assigned ? 1 : 0)
           << '\n';
    }
  }
  for (const auto& [pmid, ms] : mentions) write_mentions(ments, ms);
  for (const auto& [pmid, row] : longcovid) {
    lc << pmid;
    for (double s : row.signals) lc << '\t' << detail::format_double(s);
    lc << '\t' << detail::format_double(row.p) << '\t' << longcovid_status_name(row.status) << '\n';
  }
  for (const auto& [pmid, values] : drugs)
    for (const auto& v : values) dr << pmid << '\t' << v << '\n';
  write_text(dir / "records.jsonl", recs.str());
  write_text(dir / "processed.tsv", proc.str());
  write_text(dir / "topics.tsv", tops.str());
  write_text(dir / "mentions.tsv", ments.str());
  write_text(dir / "longcovid.tsv", lc.str());
  write_text(dir / "drugs.tsv", dr.str());
}

CollectionSnapshot CollectionSnapshot::read(const fs::path& dir) {
  CollectionSnapshot s;
  s.id = dir.filename().string();
  for (const auto& line : read_lines(dir / "records.jsonl")) {
    if (line.empty()) continue;
    auto r = parse_record(line);
    s.records.emplace(r.pmid, std::move(r));
  }
  for (const auto& line : read_lines(dir / "processed.tsv")) {
    auto cols = split_tab(line);
    if (cols.size() < 5) continue;
    TriageRow row;
    row.hash = std::stoull(cols[1], nullptr, 16);
    row.decision.pmid = std::stoll(cols[0]);
    row.decision.relevant = cols[2] == "1";
    row.decision.score = std::stod(cols[3]);
    row.decision.category = static_cast<ExclusionCategory>(std::stoi(cols[4]));
    row.decision.rationale = cols.size() > 5 ? cols[5] : "";
    s.processed.emplace(row.decision.pmid, row);
  }
  for (const auto& line : read_lines(dir / "topics.tsv")) {
    auto cols = split_tab(line);
    if (cols.empty()) continue;
    if (cols[0] == "#topics") {
      s.topic_names.assign(cols.begin() + 1, cols.end());
      continue;
    }
    auto pmid = std::stoll(cols[0]);
    auto& a = s.topics[pmid];
    a.pmid = pmid;
    a.scores.push_back(std::stod(cols[2]));
    if (cols[3] == "1") a.assigned.push_back(cols[1]);
  }
  {
    std::ifstream in(dir / "mentions.tsv");
    for (auto& m : read_mentions(in)) s.mentions[m.pmid].push_back(std::move(m));
  }
  for (const auto& line : read_lines(dir / "longcovid.tsv")) {
    auto cols = split_tab(line);
    if (cols.size() != kSignalCount + 3) continue;
    LongCovidRow row;
    for (std::size_t i = 0; i < kSignalCount; ++i) row.signals[i] = std::stod(cols[i + 1]);
    row.p = std::stod(cols[kSignalCount + 1]);
    const auto& st = cols[kSignalCount + 2];
    row.status = st == "member" ? LongCovidStatus::Member
                 : st == "provisional" ? LongCovidStatus::Provisional
                                       : LongCovidStatus::None;
    s.longcovid.emplace(std::stoll(cols[0]), row);
  }
  for (const auto& line : read_lines(dir / "drugs.tsv")) {
    auto cols = split_tab(line);
    if (cols.size() == 2) s.drugs[std::stoll(cols[0])].insert(cols[1]);
  }
  s.rebuild_index();
  return s;
}

std::optional<std::string> SnapshotDirectory::current_id() const {
  std::ifstream in(paths_.current());
  std::string id;
  if (!in || !std::getline(in, id) || trim(id).empty()) return std::nullopt;
  return std::string(trim(id));
}

std::shared_ptr<const CollectionSnapshot> SnapshotDirectory::load_current() const {
  auto id = current_id();
  if (!id) return nullptr;
  return std::make_shared<const CollectionSnapshot>(CollectionSnapshot::read(paths_.snapshots() / *id));
}

std::string SnapshotDirectory::publish(CollectionSnapshot& snapshot) const {
  fs::create_directories(paths_.snapshots());
  std::size_t next = 1;
  if (auto id = current_id()) next = std::stoull(*id) + 1;
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06zu", next);
  const std::string id = buf;
  const auto staging = paths_.snapshots() / (id + ".tmp");
  fs::remove_all(staging);
  snapshot.write(staging);
  fs::remove_all(paths_.snapshots() / id);
  fs::rename(staging, paths_.snapshots() / id);
  const auto pointer_tmp = paths_.root / "CURRENT.tmp";
  write_text(pointer_tmp, id + "\n");
  fs::rename(pointer_tmp, paths_.current());
  snapshot.id = id;
  return id;
}

std::string_view run_status_name(RunStatus s) noexcept {
  switch (s) {
    case RunStatus::Succeeded: return "succeeded";
    case RunStatus::Failed: return "failed";
    case RunStatus::Partial: return "partial";
  }
  return "failed";
}

std::string PipelineRun::status_text() const {
  if (status == RunStatus::Failed) return "failed(" + failed_stage + ")";
  return std::string(run_status_name(status));
}

std::unique_ptr<LongCovidLoop> open_loop(const CollectionSnapshot& snapshot, const HubConfig& config) {
  const HubPaths paths{config.data_dir};
  auto pool = snapshot.record_list();
  std::set<Pmid> in_pool;
  for (const auto& r : pool) in_pool.insert(r.pmid);

  std::map<Pmid, bool> seeds;
  std::optional<fs::path> seed_path = config.seeds;
  if (!seed_path && fs::exists(paths.seeds())) seed_path = paths.seeds();
  if (seed_path)
    for (const auto& [pmid, label] : read_seed_labels(*seed_path))
      if (in_pool.contains(pmid)) seeds[pmid] = label;

  std::shared_ptr<const Lexicon> lexicon;
  if (config.longcovid_lexicon) lexicon = std::make_shared<const Lexicon>(Lexicon::load(*config.longcovid_lexicon));
  std::shared_ptr<const LinearModel> triage_model;
  if (config.triage_model && fs::exists(*config.triage_model))
    triage_model = std::make_shared<const LinearModel>(LinearModel::load(*config.triage_model));

  LoopConfig loop_config;
  loop_config.auto_include_threshold = config.auto_include_threshold;
  auto loop = std::make_unique<LongCovidLoop>(std::move(pool), std::move(seeds), lexicon, triage_model, loop_config);

  auto log = DecisionLog::read(paths.decisions());
  std::size_t mark = 0;
  auto run_marks = [&](std::size_t position) {
    while (mark < log.iteration_marks.size() && log.iteration_marks[mark] <= position) {
      try {
        loop->run_iteration();
      } catch (const Error& e) {
        // Filtering decisions to the current pool can leave an iteration
        // without usable labels.
        if (e.code() != Errc::NoNewLabels && e.code() != Errc::SingleClassDataset) throw;
      }
      ++mark;
    }
  };
  for (std::size_t i = 0; i < log.decisions.size(); ++i) {
    run_marks(i);
    const auto& d = log.decisions[i];
    if (!in_pool.contains(d.pmid)) continue;
    try {
      loop->record_decision(d.pmid, d.accepted, d.curator, d.at);
    } catch (const Error& e) {
      if (e.code() != Errc::AlreadyDecided) throw;
    }
  }
  run_marks(log.decisions.size());
  return loop;
}

PipelineRun run_daily(const fs::path& delta, const HubConfig& config, const PipelineOptions& options) {
  const HubPaths paths{config.data_dir};
  DataDirLock lock(paths.root);
  fs::create_directories(paths.runs());

  PipelineRun run;
  run.started = options.now;
  {
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(paths.runs())) ++n;
    auto stamp = run.started.iso();
    std::erase(stamp, ':');
    std::erase(stamp, '-');
    run.run_id = "run-" + stamp + "-" + std::to_string(n + 1);
  }

  const SnapshotDirectory snapshots(paths.root);
  std::string current_stage;
  auto stage = [&](std::string_view name, std::size_t input, auto&& body) {
    current_stage = std::string(name);
    const auto t0 = std::chrono::steady_clock::now();
    if (options.fail_stage && *options.fail_stage == name)
      throw Error(Errc::StageFailure, "injected failure in stage " + std::string(name));
    StageReport rep;
    rep.name = std::string(name);
    rep.input = input;
    rep.output = body(rep);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run.stages.push_back(rep);
    return rep.output;
  };

  try {
    auto store = CorpusStore::open(paths.store());
    const auto lines = read_lines(delta);
    auto current = snapshots.load_current();
    std::vector<CitationRecord> work;
    stage("ingest", lines.size(), [&](StageReport& rep) {
      run.ingest = store.ingest_batch(lines, options.now);
      rep.errors = run.ingest.n_rejected;
      for (const auto& [pmid, stored] : *store.snapshot()) {
        if (current) {
          auto it = current->processed.find(pmid);
          if (it != current->processed.end() && it->second.hash == stored.hash) continue;
        }
        work.push_back(stored.record);
      }
      return work.size();
    });

    if (!work.empty()) {
      CollectionSnapshot next = current ? *current : CollectionSnapshot{};
      std::vector<CitationRecord> relevant;
      std::vector<Pmid> removed;

      stage("triage", work.size(), [&](StageReport&) {
        if (!config.triage_model) throw Error(Errc::ModelMissing, "config names no triage_model");
        const auto model = LinearModel::load(*config.triage_model);
        TriageRules rules;
        rules.keywords = KeywordList(config.keywords);
        for (const auto& rec : work) {
          auto d = triage(rec, &model, rules);
          next.processed[rec.pmid] = TriageRow{content_hash(rec), d};
          if (d.relevant) {
            relevant.push_back(rec);
          } else if (next.records.erase(rec.pmid) > 0) {
            removed.push_back(rec.pmid);
            next.topics.erase(rec.pmid);
            next.mentions.erase(rec.pmid);
            next.longcovid.erase(rec.pmid);
            next.drugs.erase(rec.pmid);
          }
        }
        return relevant.size();
      });

      stage("topics", relevant.size(), [&](StageReport&) {
        if (!config.topic_model) throw Error(Errc::ModelMissing, "config names no topic_model");
        const auto model = MultiLabelModel::load(*config.topic_model);
        next.topic_names = model.topics.names();
        for (const auto& rec : relevant) {
          next.topics[rec.pmid] = annotate_topics(rec, &model);
          next.records[rec.pmid] = rec;
        }
        return relevant.size();
      });

      stage("entities", relevant.size(), [&](StageReport&) {
        if (!config.lexicon) throw Error(Errc::BadInput, "config names no lexicon");
        const auto lexicon = Lexicon::load(*config.lexicon);
        for (const auto& rec : relevant) next.mentions[rec.pmid] = annotate_entities(rec, lexicon);
        return relevant.size();
      });

      stage("longcovid", relevant.size(), [&](StageReport&) {
        auto loop = open_loop(next, config);
        const auto membership = loop->collection_membership();
        auto st = loop->state();
        for (const auto& [pmid, item] : st->items) {
          LongCovidRow row;
          row.signals = item.signals;
          row.p = item.p;
          row.status = membership.provisional.contains(pmid) ? LongCovidStatus::Provisional
                       : membership.members.contains(pmid)   ? LongCovidStatus::Member
                                                             : LongCovidStatus::None;
          next.longcovid[pmid] = row;
        }
        return relevant.size();
      });

      stage("index", relevant.size(), [&](StageReport&) {
        next.drugs.clear();
        if (config.drug_mentions)
          for (const auto& m : read_mentions(*config.drug_mentions))
            if (next.records.contains(m.pmid)) next.drugs[m.pmid].insert(m.concept_id);
        // Re-index the relevant records plus any document whose facets moved
        // (Long COVID status and drug values can change for older records).
        std::set<Pmid> touched;
        for (const auto& r : relevant) touched.insert(r.pmid);
        for (const auto& [pmid, rec] : next.records) {
          const auto* doc = next.index.document(pmid);
          if (doc == nullptr || !(doc->facets == next.facets(pmid))) touched.insert(pmid);
        }
        std::vector<CitationRecord> batch;
        std::map<Pmid, DocumentFacets> facets;
        for (auto pmid : touched) {
          batch.push_back(next.records.at(pmid));
          facets[pmid] = next.facets(pmid);
        }
        next.index = next.index.update(batch, facets, removed);
        return relevant.size();
      });

      stage("stats", relevant.size(), [&](StageReport&) {
        std::set<std::string> journals;
        for (const auto& [pmid, r] : next.records) journals.insert(r.journal);
        return relevant.size();
      });

      current_stage = "publish";
      run.published_snapshot = snapshots.publish(next);
    } else {
      for (std::size_t i = 1; i < kPipelineStages.size(); ++i)
        run.stages.push_back(StageReport{std::string(kPipelineStages[i]), 0, 0, 0, 0});
    }
    run.status = run.ingest.n_rejected > 0 ? RunStatus::Partial : RunStatus::Succeeded;
  } catch (const std::exception& e) {
    run.status = RunStatus::Failed;
    run.failed_stage = current_stage;
    run.error = e.what();
  }
  run.finished = Timestamp::now();

  std::ostringstream report;
  for (const auto& s : run.stages) {
    json line = {{"run_id", run.run_id}, {"stage", s.name},     {"input", s.input},
                 {"output", s.output},   {"errors", s.errors}, {"seconds", s.seconds}};
    report << line.dump() << '\n';
  }
  json summary = {{"run_id", run.run_id},
                  {"status", run.status_text()},
                  {"started", run.started.iso()},
                  {"finished", run.finished.iso()},
                  {"ingest", run.ingest.summary_line()},
                  {"snapshot", run.published_snapshot ? json(*run.published_snapshot) : json(nullptr)}};
  if (!run.error.empty()) summary["error"] = run.error;
  report << summary.dump() << '\n';
  write_text(paths.runs() / (run.run_id + ".jsonl"), report.str());
  return run;
}

}  // namespace lithub

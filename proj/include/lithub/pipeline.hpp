#pragma once
#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lithub/corpus_store.hpp"
#include "lithub/entities.hpp"
#include "lithub/longcovid.hpp"
#include "lithub/record.hpp"
#include "lithub/search_index.hpp"
#include "lithub/topics.hpp"
#include "lithub/triage.hpp"

namespace lithub {

// One declarative JSON file naming model paths, lexicons, thresholds and
// keyword lists. Relative paths resolve against the config file's directory.
struct HubConfig {
  std::filesystem::path data_dir = "hub-data";
  std::optional<std::filesystem::path> triage_model;
  std::optional<std::filesystem::path> topic_model;
  std::optional<std::filesystem::path> lexicon;
  std::optional<std::filesystem::path> longcovid_lexicon;
  std::optional<std::filesystem::path> drug_mentions;
  std::optional<std::filesystem::path> seeds;
  std::optional<std::filesystem::path> trending;
  std::optional<std::filesystem::path> baseline;
  std::vector<std::string> keywords{"covid-19", "sars-cov-2", "coronavirus", "2019-ncov", "ncov"};
  double auto_include_threshold = 0.9;

  // HUB_DATA_DIR, when set, overrides data_dir.
  static HubConfig load(const std::filesystem::path& path);
  static HubConfig from_env();
};

struct HubPaths {
  std::filesystem::path root;

  std::filesystem::path store() const { return root / "store"; }
  std::filesystem::path snapshots() const { return root / "snapshots"; }
  std::filesystem::path current() const { return root / "CURRENT"; }
  std::filesystem::path runs() const { return root / "runs"; }
  std::filesystem::path decisions() const { return root / "loop" / "decisions.log"; }
  std::filesystem::path seeds() const { return root / "loop" / "seeds.tsv"; }
};

struct TriageRow {
  std::uint64_t hash = 0;
  TriageDecision decision;
};

struct LongCovidRow {
  SignalVector signals{};
  double p = 0.5;
  LongCovidStatus status = LongCovidStatus::None;
};

// The published unit: collection, annotations and the index over them.
struct CollectionSnapshot {
  std::string id;
  std::map<Pmid, TriageRow> processed;  // every triaged record
  std::map<Pmid, CitationRecord> records;  // the relevant collection
  std::vector<std::string> topic_names;
  std::map<Pmid, TopicAnnotation> topics;
  std::map<Pmid, std::vector<EntityMention>> mentions;
  std::map<Pmid, LongCovidRow> longcovid;
  std::map<Pmid, std::set<std::string>> drugs;
  SearchIndex index;

  DocumentFacets facets(Pmid pmid) const;
  std::vector<CitationRecord> record_list() const;
  void rebuild_index();

  void write(const std::filesystem::path& dir) const;
  static CollectionSnapshot read(const std::filesystem::path& dir);
};

// snapshots/<id>/ directories plus a CURRENT pointer swapped by rename.
class SnapshotDirectory {
 public:
  explicit SnapshotDirectory(std::filesystem::path data_dir) : paths_{std::move(data_dir)} {}

  std::optional<std::string> current_id() const;
  // nullptr before the first publication.
  std::shared_ptr<const CollectionSnapshot> load_current() const;
  // Writes the snapshot under the next id and repoints CURRENT; returns the id.
  std::string publish(CollectionSnapshot& snapshot) const;

 private:
  HubPaths paths_;
};

struct StageReport {
  std::string name;
  std::size_t input = 0;
  std::size_t output = 0;
  std::size_t errors = 0;
  double seconds = 0;
};

enum class RunStatus { Succeeded, Failed, Partial };
std::string_view run_status_name(RunStatus s) noexcept;

struct PipelineRun {
  std::string run_id;
  Timestamp started;
  Timestamp finished;
  std::vector<StageReport> stages;
  RunStatus status = RunStatus::Succeeded;
  std::string failed_stage;
  std::string error;
  IngestReport ingest;
  std::optional<std::string> published_snapshot;

  std::string status_text() const;
};

struct PipelineOptions {
  Timestamp now = Timestamp::now();
  std::optional<std::string> fail_stage;  // test hook: throw inside this stage
};

inline constexpr std::array<std::string_view, 7> kPipelineStages{"ingest",    "triage", "topics", "entities",
                                                                 "longcovid", "index",  "stats"};

// ingest -> triage -> topics -> entities -> longcovid -> index -> stats.
// The snapshot swaps only after every stage succeeds. Records whose content
// is not yet reflected in the live snapshot (new, updated, or left over from
// a failed run) form the work set. Holds an exclusive lock on the data dir.
PipelineRun run_daily(const std::filesystem::path& delta, const HubConfig& config, const PipelineOptions& options = {});

// Rebuilds the Long COVID loop over a snapshot's collection from the seed
// file and decision log; decisions on pmids outside the collection are skipped.
std::unique_ptr<LongCovidLoop> open_loop(const CollectionSnapshot& snapshot, const HubConfig& config);

}  // namespace lithub

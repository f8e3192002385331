#pragma once
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lithub/record.hpp"

namespace lithub {

struct IngestReject {
  std::size_t line_number = 0;  // 1-based
  std::string reason;
};

struct IngestReport {
  std::size_t n_new = 0;
  std::size_t n_duplicate = 0;
  std::size_t n_updated = 0;
  std::size_t n_rejected = 0;
  std::vector<IngestReject> rejects;
  // Accepted lines carrying a pub_date after the ingestion date.
  std::vector<IngestReject> warnings;
  // New and updated pmids, in input order.
  std::vector<Pmid> changed;

  std::string summary_line() const;
};

struct StoredRecord {
  CitationRecord record;
  std::uint64_t hash = 0;
};

using RecordMap = std::map<Pmid, StoredRecord>;

// Citation store: an append-only JSON-lines log on disk plus an in-memory
// pmid index rebuilt from it on open. Each batch ends with a commit marker;
// lines after the last marker are discarded on open. Readers hold an
// immutable snapshot of the last committed batch.
class CorpusStore {
 public:
  using Listener = std::function<void(std::span<const Pmid>)>;

  // Memory-only store.
  CorpusStore();
  // Opens (or creates) the log at dir/records.jsonl. Throws StoreUnavailable.
  static CorpusStore open(const std::filesystem::path& dir);

  CorpusStore(CorpusStore&&) noexcept;
  CorpusStore& operator=(CorpusStore&&) noexcept;
  ~CorpusStore();

  IngestReport ingest_batch(std::span<const std::string> lines, Timestamp now = Timestamp::now(),
                            bool dry_run = false);

  // Throws Error{NotFound}.
  CitationRecord get_record(Pmid pmid) const;
  std::optional<CitationRecord> find(Pmid pmid) const;
  // Records with from <= pub_date <= to, ordered by (pub_date, pmid); 1-based page.
  std::vector<CitationRecord> list_records(Date from, Date to, std::size_t page, std::size_t page_size) const;
  // Returns false when the pmid is absent.
  bool remove(Pmid pmid);

  std::shared_ptr<const RecordMap> snapshot() const;
  std::size_t size() const;

  void subscribe(Listener listener);

 private:
  void append_log(const std::vector<std::string>& lines);

  mutable std::mutex mutex_;
  std::shared_ptr<const RecordMap> records_;
  std::optional<std::filesystem::path> log_path_;
  std::uint64_t commits_ = 0;
  std::vector<Listener> listeners_;
};

// Reads non-empty lines from a file. Throws Error{BadInput} when unreadable.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace lithub

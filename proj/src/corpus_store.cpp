#include "lithub/corpus_store.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

#include "lithub/error.hpp"

namespace lithub {

namespace fs = std::filesystem;

std::string IngestReport::summary_line() const {
  std::ostringstream os;
  os << "new=" << n_new << " duplicate=" << n_duplicate << " updated=" << n_updated
     << " rejected=" << n_rejected;
  return os.str();
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::BadInput, "cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

CorpusStore::CorpusStore() : records_(std::make_shared<RecordMap>()) {}
CorpusStore::CorpusStore(CorpusStore&& other) noexcept { *this = std::move(other); }
CorpusStore& CorpusStore::operator=(CorpusStore&& other) noexcept {
  std::scoped_lock lock(mutex_, other.mutex_);
  records_ = std::move(other.records_);
  log_path_ = std::move(other.log_path_);
  commits_ = other.commits_;
  listeners_ = std::move(other.listeners_);
  return *this;
}
CorpusStore::~CorpusStore() = default;

CorpusStore CorpusStore::open(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::StoreUnavailable, "cannot create " + dir.string() + ": " + ec.message());
  CorpusStore store;
  store.log_path_ = dir / "records.jsonl";
  auto records = std::make_shared<RecordMap>();
  if (fs::exists(*store.log_path_)) {
    std::ifstream in(*store.log_path_);
    if (!in) throw Error(Errc::StoreUnavailable, "cannot read " + store.log_path_->string());
    std::vector<std::string> pending;
    std::string line;
    std::uint64_t committed_bytes = 0, offset = 0;
    while (std::getline(in, line)) {
      offset += line.size() + 1;
      if (line.empty()) continue;
      if (line.rfind("{\"commit\":", 0) == 0) {
        for (const auto& p : pending) {
          if (p.rfind("{\"delete\":", 0) == 0) {
            records->erase(nlohmann::json::parse(p)["delete"].get<Pmid>());
            continue;
          }
          auto rec = parse_record(p);
          auto hash = content_hash(rec);
          (*records)[rec.pmid] = StoredRecord{std::move(rec), hash};
        }
        pending.clear();
        committed_bytes = offset;
        ++store.commits_;
      } else {
        pending.push_back(line);
      }
    }
    in.close();
    if (!pending.empty()) fs::resize_file(*store.log_path_, committed_bytes);
  }
  store.records_ = std::move(records);
  return store;
}

void CorpusStore::append_log(const std::vector<std::string>& lines) {
  if (!log_path_) return;
  std::ofstream out(*log_path_, std::ios::app | std::ios::binary);
  if (!out) throw Error(Errc::StoreUnavailable, "cannot append to " + log_path_->string());
  for (const auto& l : lines) out << l << '\n';
  out << "{\"commit\":" << commits_ + 1 << "}\n";
  out.flush();
  if (!out) throw Error(Errc::StoreUnavailable, "write failed on " + log_path_->string());
  ++commits_;
}

IngestReport CorpusStore::ingest_batch(std::span<const std::string> lines, Timestamp now, bool dry_run) {
  IngestReport report;
  std::unique_lock lock(mutex_);
  auto next = std::make_shared<RecordMap>(*records_);
  std::vector<std::string> log_lines;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line_no = i + 1;
    if (trim(lines[i]).empty()) {
      ++report.n_rejected;
      report.rejects.push_back({line_no, "MalformedLine: empty line"});
      continue;
    }
    CitationRecord rec;
    try {
      rec = parse_record(lines[i]);
    } catch (const Error& e) {
      ++report.n_rejected;
      report.rejects.push_back({line_no, std::string(errc_name(e.code())) + ": " + e.what()});
      continue;
    }
    if (rec.pub_date > now.date())
      report.warnings.push_back({line_no, "pub_date " + rec.pub_date.iso() + " is in the future"});
    auto hash = content_hash(rec);
    auto it = next->find(rec.pmid);
    if (it != next->end() && it->second.hash == hash) {
      ++report.n_duplicate;
      continue;
    }
    (it == next->end() ? report.n_new : report.n_updated)++;
    rec.ingested_at = now;
    log_lines.push_back(serialize_record(rec));
    report.changed.push_back(rec.pmid);
    (*next)[rec.pmid] = StoredRecord{std::move(rec), hash};
  }
  if (dry_run || report.changed.empty()) return report;
  append_log(log_lines);
  records_ = std::move(next);
  auto listeners = listeners_;
  lock.unlock();
  for (const auto& l : listeners) l(report.changed);
  return report;
}

std::optional<CitationRecord> CorpusStore::find(Pmid pmid) const {
  auto snap = snapshot();
  auto it = snap->find(pmid);
  if (it == snap->end()) return std::nullopt;
  return it->second.record;
}

CitationRecord CorpusStore::get_record(Pmid pmid) const {
  auto rec = find(pmid);
  if (!rec) throw Error(Errc::NotFound, "pmid " + std::to_string(pmid) + " not in store");
  return *std::move(rec);
}

std::vector<CitationRecord> CorpusStore::list_records(Date from, Date to, std::size_t page,
                                                      std::size_t page_size) const {
  if (page == 0 || page_size == 0) throw Error(Errc::BadPage, "page and page size start at 1");
  std::vector<const CitationRecord*> hits;
  auto snap = snapshot();
  for (const auto& [pmid, stored] : *snap)
    if (stored.record.pub_date >= from && stored.record.pub_date <= to) hits.push_back(&stored.record);
  std::stable_sort(hits.begin(), hits.end(), [](const auto* a, const auto* b) {
    return std::tie(a->pub_date, a->pmid) < std::tie(b->pub_date, b->pmid);
  });
  std::vector<CitationRecord> out;
  for (std::size_t i = (page - 1) * page_size; i < hits.size() && out.size() < page_size; ++i)
    out.push_back(*hits[i]);
  return out;
}

bool CorpusStore::remove(Pmid pmid) {
  std::scoped_lock lock(mutex_);
  if (!records_->contains(pmid)) return false;
  append_log({"{\"delete\":" + std::to_string(pmid) + "}"});
  auto next = std::make_shared<RecordMap>(*records_);
  next->erase(pmid);
  records_ = std::move(next);
  return true;
}

std::shared_ptr<const RecordMap> CorpusStore::snapshot() const {
  std::scoped_lock lock(mutex_);
  return records_;
}

std::size_t CorpusStore::size() const { return snapshot()->size(); }

void CorpusStore::subscribe(Listener listener) {
  std::scoped_lock lock(mutex_);
  listeners_.push_back(std::move(listener));
}

}  // namespace lithub

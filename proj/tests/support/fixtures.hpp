#pragma once
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "lithub/datasets.hpp"
#include "lithub/triage.hpp"
#include "lithub/longcovid.hpp"
#include "lithub/topics.hpp"

#ifndef LITHUB_SOURCE_DIR
#error "LITHUB_SOURCE_DIR must be defined"
#endif

namespace lithub::testing {

inline std::filesystem::path source_dir() { return LITHUB_SOURCE_DIR; }
inline std::filesystem::path fixture(const std::string& name) { return source_dir() / "tests" / "data" / name; }
inline std::filesystem::path bundled(const std::string& name) { return source_dir() / "data" / name; }

// Removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("lithub-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::map<Pmid, int> read_binary_labels(const std::filesystem::path& path) {
  std::map<Pmid, int> out;
  std::ifstream in(path);
  Pmid pmid;
  int label;
  while (in >> pmid >> label) out[pmid] = label;
  return out;
}

inline std::vector<TopicExample> topic_examples(const std::vector<CitationRecord>& records,
                                                const std::map<Pmid, std::vector<std::string>>& labels) {
  std::vector<TopicExample> out;
  for (const auto& r : records) out.push_back({r, labels.at(r.pmid)});
  return out;
}

inline CitationRecord make_record(Pmid pmid, std::string title, std::string abstract = "",
                                  std::string pub_date = "2021-05-01", std::string journal = "J Test") {
  CitationRecord r;
  r.pmid = pmid;
  r.title = std::move(title);
  r.abstract = std::move(abstract);
  r.journal = std::move(journal);
  r.pub_date = *Date::parse(pub_date);
  return r;
}

// Trains the triage and topic models on the fixtures into dir and writes
// dir/hub.json pointing at them, the bundled lexicons and fixture side files.
inline std::filesystem::path prepare_hub(const std::filesystem::path& dir, bool with_side_files = true) {
  auto triage_fit = train_triage(read_labeled_records(fixture("triage_train.jsonl")));
  triage_fit.model.save(dir / "triage.model");
  auto records = read_corpus(fixture("corpus.jsonl"));
  auto topic_fit = train_topics(topic_examples(records, read_topic_labels(fixture("corpus_topics.tsv"))),
                                TopicSet::defaults());
  topic_fit.model.save(dir / "topics.model");
  std::ostringstream cfg;
  cfg << "{\n  \"data_dir\": \"hub\",\n  \"triage_model\": \"triage.model\",\n  \"topic_model\": \"topics.model\",\n"
      << "  \"lexicon\": \"" << bundled("lexicon.tsv").string() << "\",\n"
      << "  \"longcovid_lexicon\": \"" << bundled("longcovid_lexicon.tsv").string() << "\"";
  if (with_side_files) {
    cfg << ",\n  \"drug_mentions\": \"" << fixture("corpus_drugs.tsv").string() << "\",\n"
        << "  \"trending\": \"" << fixture("trending.tsv").string() << "\",\n"
        << "  \"baseline\": \"" << fixture("baseline_quarterly.tsv").string() << "\"";
  }
  cfg << "\n}\n";
  write_file(dir / "hub.json", cfg.str());
  return dir / "hub.json";
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace lithub::testing

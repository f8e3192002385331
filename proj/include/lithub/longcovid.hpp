#pragma once
#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lithub/entities.hpp"
#include "lithub/logistic.hpp"
#include "lithub/record.hpp"
#include "lithub/triage.hpp"

namespace lithub {

inline constexpr std::size_t kSignalCount = 8;

// s1 synonym mentions, s2 title mention flag, s3 triage probability,
// s4 unigram model probability, s5 bigram model probability, s6 symptom hits
// per 100 tokens, s7 persistence cue count, s8 smoothed journal prior.
using SignalVector = std::array<double, kSignalCount>;

std::string_view signal_name(std::size_t i) noexcept;

// Historical positive rates per journal. prior() is the Laplace-smoothed
// rate (pos + 1) / (n + 2) for known journals and the global base rate
// otherwise.
class JournalStats {
 public:
  void add(const std::string& journal, bool positive);
  void remove(const std::string& journal, bool positive);
  double prior(const std::string& journal) const;
  double base_rate() const;
  std::size_t total() const { return total_; }

 private:
  std::map<std::string, std::pair<std::size_t, std::size_t>> by_journal_;  // (positives, count)
  std::size_t positives_ = 0;
  std::size_t total_ = 0;
};

// Signal providers. Any null member falls back to its default: probability
// 0.5 for models, zero counts without a lexicon, the base rate (0.5 without
// labels) for the journal prior.
struct SignalResources {
  const Lexicon* lexicon = nullptr;  // longcovid + symptom entries
  const LinearModel* triage = nullptr;
  const LinearModel* unigram = nullptr;
  const LinearModel* bigram = nullptr;
  const JournalStats* journals = nullptr;
  double default_base_rate = 0.5;
  std::vector<std::vector<std::string>> persistence_cues = default_persistence_cues();

  static std::vector<std::vector<std::string>> default_persistence_cues();
};

SignalVector compute_signals(const CitationRecord& record, const SignalResources& resources);

// Long COVID synonym spans, for highlighting.
struct SynonymSpan {
  TextField field = TextField::Title;
  std::size_t start = 0;
  std::size_t end = 0;
};
std::vector<SynonymSpan> synonym_spans(const CitationRecord& record, const Lexicon* lexicon);

// Min-max scaling of the unbounded signals (s1, s6, s7) from corpus-wide
// observations; bounded signals pass through.
struct SignalScaling {
  std::array<double, kSignalCount> min{};
  std::array<double, kSignalCount> max{};

  static SignalScaling observe(std::span<const SignalVector> corpus);
  SignalVector apply(const SignalVector& raw) const;
};

struct MetaModel {
  std::array<double, kSignalCount> weights{};
  double bias = 0;
  SignalScaling scaling;

  // Untrained meta-model: weights 1/8, bias 0.
  static MetaModel uniform(SignalScaling scaling);
};

struct Aggregate {
  double p = 0.5;
  double priority = 1.0;
};

// p = logistic(w . scaled(signals) + b); priority = 1 - |2p - 1|.
// Throws NonFiniteSignal.
Aggregate aggregate(const SignalVector& signals, const MetaModel& meta);

enum class ReviewStatus { Pending, Accepted, Rejected };
std::string_view review_status_name(ReviewStatus s) noexcept;

struct ReviewItem {
  Pmid pmid = 0;
  SignalVector signals{};
  double p = 0.5;
  double priority = 1.0;
  ReviewStatus status = ReviewStatus::Pending;
  std::optional<std::string> decided_by;
  std::optional<Timestamp> decided_at;
  std::size_t iteration = 0;
  Date pub_date;
};

struct Decision {
  Pmid pmid = 0;
  bool accepted = false;
  std::string curator;
  Timestamp at;
  std::size_t iteration = 0;

  bool operator==(const Decision&) const = default;
};

struct LoopConfig {
  TrainHyper sub_model_hyper{0.05, 300, 1e-4};
  TrainHyper meta_hyper{1.0, 500, 1e-3};
  std::size_t min_df = 1;
  std::size_t folds = 3;
  double auto_include_threshold = 0.9;
};

struct Membership {
  std::set<Pmid> members;      // accepted plus provisional
  std::set<Pmid> provisional;  // pending with p >= threshold
};

// Iterative human-in-the-loop state over a pool of articles. Decisions and
// iterations go through one writer; readers see the last published state.
class LongCovidLoop {
 public:
  struct State {
    std::size_t iteration = 0;
    std::map<Pmid, ReviewItem> items;
    std::vector<Decision> log;
    std::size_t log_size_at_last_iteration = 0;
    std::optional<LinearModel> unigram;
    std::optional<LinearModel> bigram;
    MetaModel meta;
    JournalStats journals;
    std::uint64_t lexicon_version = 0;
  };

  // Seeds label pool articles up front. When they cover both classes the
  // models are fitted immediately (iteration stays 0).
  LongCovidLoop(std::vector<CitationRecord> pool, std::map<Pmid, bool> seeds, std::shared_ptr<const Lexicon> lexicon,
                std::shared_ptr<const LinearModel> triage_model, LoopConfig config = {});

  std::shared_ptr<const State> state() const;
  std::size_t iteration() const { return state()->iteration; }

  std::vector<ReviewItem> next_review_batch(std::size_t k) const;
  // Throws NotFound, AlreadyDecided.
  ReviewItem record_decision(Pmid pmid, bool accept, const std::string& curator, Timestamp now = Timestamp::now());
  // Throws NoNewLabels, SingleClassDataset.
  void run_iteration();

  Membership collection_membership(double threshold) const;
  Membership collection_membership() const { return collection_membership(config_.auto_include_threshold); }

  // Signals and aggregate for any record under the current models.
  SignalVector signals_for(const CitationRecord& record) const;
  Aggregate predict(const CitationRecord& record) const;

  const std::vector<CitationRecord>& pool() const { return pool_; }
  const std::map<Pmid, bool>& seeds() const { return seeds_; }
  const LoopConfig& config() const { return config_; }
  const Lexicon* lexicon() const { return lexicon_.get(); }

  // Rebuilds a loop by re-applying a decision log. iteration_marks lists
  // the log sizes at which run_iteration was called.
  static std::unique_ptr<LongCovidLoop> replay(std::vector<CitationRecord> pool, std::map<Pmid, bool> seeds,
                                               std::shared_ptr<const Lexicon> lexicon,
                                               std::shared_ptr<const LinearModel> triage_model, LoopConfig config,
                                               std::span<const Decision> log,
                                               std::span<const std::size_t> iteration_marks);

 private:
  void retrain(State& s) const;
  SignalResources resources(const State& s) const;

  std::vector<CitationRecord> pool_;
  std::map<Pmid, const CitationRecord*> by_pmid_;
  std::map<Pmid, bool> seeds_;
  std::shared_ptr<const Lexicon> lexicon_;
  std::shared_ptr<const LinearModel> triage_;
  LoopConfig config_;

  std::mutex writer_;
  mutable std::mutex publish_;
  std::shared_ptr<const State> state_;
};

// Decision log lines: pmid<TAB>label<TAB>curator<TAB>timestamp<TAB>iteration,
// label being "accepted" or "rejected". Lines "#iteration<TAB>n" mark
// completed iterations.
struct DecisionLog {
  std::vector<Decision> decisions;
  std::vector<std::size_t> iteration_marks;

  static DecisionLog read(const std::filesystem::path& path);
};
std::string format_decision(const Decision& d);
void append_decision(const std::filesystem::path& path, const Decision& d);
void append_iteration_mark(const std::filesystem::path& path, std::size_t log_size, std::size_t iteration);

// Seed labels: pmid<TAB>label with label in {1,0,accept,reject,accepted,rejected}.
std::map<Pmid, bool> read_seed_labels(const std::filesystem::path& path);

}  // namespace lithub

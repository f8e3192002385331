#pragma once
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lithub/logistic.hpp"
#include "lithub/record.hpp"
#include "lithub/text_core.hpp"

namespace lithub {

// Keyword phrases, each stored as its token sequence.
class KeywordList {
 public:
  explicit KeywordList(const std::vector<std::string>& phrases);
  static KeywordList defaults();

  // Whether any phrase occurs in the text on token boundaries.
  bool matches(std::string_view text) const;
  bool matches(const TokenStream& tokens) const;
  const std::vector<std::vector<std::string>>& phrases() const { return phrases_; }

 private:
  std::vector<std::vector<std::string>> phrases_;
};

struct KeywordHits {
  bool title = false;
  bool abstract = false;
  bool keywords = false;
  bool mesh = false;
  bool funding = false;

  bool any() const { return title || abstract || keywords || mesh || funding; }
  bool only_funding() const { return funding && !title && !abstract && !keywords && !mesh; }
  bool only_abstract() const { return abstract && !title && !keywords && !mesh && !funding; }
  std::string describe() const;
};

KeywordHits keyword_prefilter(const CitationRecord& record, const KeywordList& keywords);

// Logistic model over a frozen vocabulary. Also used by the Long COVID loop.
struct LinearModel {
  Vocabulary vocab;
  Weighting scheme = Weighting::TfIdf;
  std::vector<double> weights;
  double bias = 0;
  double threshold = 0.5;
  TrainHyper hyper;
  std::uint64_t trained_on = 0;  // fingerprint of (pmid, label) pairs

  SparseVector features(const CitationRecord& record) const;
  double probability(const SparseVector& x) const;
  double probability(const CitationRecord& record) const;

  void save(const std::filesystem::path& path) const;
  static LinearModel load(const std::filesystem::path& path);
  void write(std::ostream& out) const;
  static LinearModel read(std::istream& in);
};

struct LabeledRecord {
  CitationRecord record;
  bool label = false;
};

struct LinearTraining {
  LinearModel model;
  std::vector<double> loss_history;
  std::vector<SparseVector> features;  // training design matrix, row per example
};

// Builds the vocabulary from the examples, then fits logistic regression on
// tfidf features. Throws SingleClassDataset, NonFiniteLoss.
LinearTraining train_linear(std::span<const LabeledRecord> examples, const TrainHyper& hyper, std::size_t min_df = 1,
                            int ngram = 1);

inline LinearTraining train_triage(std::span<const LabeledRecord> examples, const TrainHyper& hyper = {}) {
  return train_linear(examples, hyper, 1, 1);
}

struct TriageRules {
  KeywordList keywords = KeywordList::defaults();
  std::vector<std::string> background_cues{"pandemic", "since", "during", "after", "amid", "background"};
};

enum class ExclusionCategory : int { None = 0, UnrelatedFindings = 1, BackgroundOnly = 2, OtherField = 3 };

struct TriageDecision {
  Pmid pmid = 0;
  bool relevant = false;
  double score = 0;
  ExclusionCategory category = ExclusionCategory::None;
  std::string rationale;

  bool operator==(const TriageDecision&) const = default;
};

// Sentences of an abstract, split on '.', '?' or '!' followed by whitespace.
std::vector<std::string_view> split_sentences(std::string_view text);

// Throws Error{ModelMissing} when model is null.
TriageDecision triage(const CitationRecord& record, const LinearModel* model, const TriageRules& rules = {});

}  // namespace lithub

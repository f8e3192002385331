#pragma once
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lithub/logistic.hpp"
#include "lithub/record.hpp"
#include "lithub/text_core.hpp"

namespace lithub {

class TopicSet {
 public:
  TopicSet() = default;
  // Throws BadInput on duplicate or empty names.
  explicit TopicSet(std::vector<std::string> names);
  static TopicSet defaults();
  // One topic name per line; '#' comments allowed.
  static TopicSet load(const std::filesystem::path& path);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& operator[](std::size_t i) const { return names_[i]; }
  std::optional<std::size_t> index_of(std::string_view name) const;

  bool operator==(const TopicSet&) const = default;

 private:
  std::vector<std::string> names_;
};

struct TopicExample {
  CitationRecord record;
  std::vector<std::string> topics;
};

struct MultiLabelModel {
  TopicSet topics;
  Vocabulary vocab;
  Weighting scheme = Weighting::TfIdf;
  std::vector<std::vector<double>> weights;  // one head per topic
  std::vector<double> biases;
  std::vector<double> thresholds;
  TrainHyper hyper;

  // Scores for every head from one featurization.
  std::vector<double> scores(const SparseVector& x) const;

  void save(const std::filesystem::path& path) const;
  static MultiLabelModel load(const std::filesystem::path& path);
};

struct TopicTraining {
  MultiLabelModel model;
  std::vector<double> loss_history;
  std::vector<SparseVector> features;
  std::vector<int> labels;  // row-major n x K
};

// Joint training of all heads. Throws DegenerateTopic(name) and UnknownTopic
// (as BadInput) for labels outside the topic set.
TopicTraining train_topics(std::span<const TopicExample> examples, const TopicSet& topics, const TrainHyper& hyper = {},
                           std::size_t min_df = 1);

struct TopicAnnotation {
  Pmid pmid = 0;
  std::vector<double> scores;         // aligned with the model's TopicSet
  std::vector<std::string> assigned;  // in TopicSet order

  bool operator==(const TopicAnnotation&) const = default;
};

// Throws ModelMissing when model is null.
TopicAnnotation annotate_topics(const CitationRecord& record, const MultiLabelModel* model);

// Picks per-topic thresholds on a validation split by maximizing F1 over the
// grid 0.05..0.95 (step 0.05); ties keep the lower threshold.
void tune_thresholds(MultiLabelModel& model, std::span<const TopicExample> validation);

// Bin i counts the articles with exactly i assigned topics; bins 0..K.
std::vector<std::size_t> topic_distribution(std::span<const TopicAnnotation> annotations, std::size_t topic_count);

// Label file rows: pmid<TAB>comma-separated topic names.
std::map<Pmid, std::vector<std::string>> read_topic_labels(const std::filesystem::path& path);

}  // namespace lithub

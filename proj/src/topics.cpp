#include "lithub/topics.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "lithub/error.hpp"
#include "model_io.hpp"

namespace lithub {

TopicSet::TopicSet(std::vector<std::string> names) : names_(std::move(names)) {
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (trim(n).empty()) throw Error(Errc::BadInput, "empty topic name");
    if (!seen.insert(n).second) throw Error(Errc::BadInput, "duplicate topic name '" + n + "'");
  }
}

TopicSet TopicSet::defaults() {
  return TopicSet({"Treatment", "Prevention", "Diagnosis", "Mechanism", "Transmission", "Case Report",
                   "Epidemic Forecasting", "Long COVID"});
}

TopicSet TopicSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::BadInput, "cannot read " + path.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    names.emplace_back(t);
  }
  return TopicSet(std::move(names));
}

std::optional<std::size_t> TopicSet::index_of(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::vector<double> MultiLabelModel::scores(const SparseVector& x) const {
  std::vector<double> out(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k) out[k] = sigmoid(dot(x, weights[k]) + biases[k]);
  return out;
}

void MultiLabelModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(Errc::BadInput, "cannot write " + path.string());
  out << "lithub-multilabel 1\n";
  out << "scheme " << (scheme == Weighting::TfIdf ? "tfidf" : "tf") << '\n';
  out << "learning_rate " << detail::format_double(hyper.learning_rate) << '\n';
  out << "epochs " << hyper.epochs << '\n';
  out << "l2 " << detail::format_double(hyper.l2) << '\n';
  out << "topics " << topics.size() << '\n';
  for (std::size_t k = 0; k < topics.size(); ++k) {
    out << "topic " << topics[k] << '\n';
    out << "threshold " << detail::format_double(thresholds[k]) << '\n';
    out << "bias " << detail::format_double(biases[k]) << '\n';
  }
  out << "#vocabulary\n";
  vocab.write(out);
  out << "#end\n";
  for (const auto& w : weights) {
    out << "#head\n";
    detail::write_doubles(out, w);
  }
}

MultiLabelModel MultiLabelModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ModelMissing, "cannot read model " + path.string());
  if (detail::expect_line(in, "header") != "lithub-multilabel 1")
    throw Error(Errc::BadInput, "not a multi-label model file");
  MultiLabelModel m;
  m.scheme = detail::expect_key(in, "scheme") == "tf" ? Weighting::Tf : Weighting::TfIdf;
  m.hyper.learning_rate = std::stod(detail::expect_key(in, "learning_rate"));
  m.hyper.epochs = std::stoi(detail::expect_key(in, "epochs"));
  m.hyper.l2 = std::stod(detail::expect_key(in, "l2"));
  const auto k = std::stoull(detail::expect_key(in, "topics"));
  std::vector<std::string> names;
  for (std::size_t i = 0; i < k; ++i) {
    names.push_back(detail::expect_key(in, "topic"));
    m.thresholds.push_back(std::stod(detail::expect_key(in, "threshold")));
    m.biases.push_back(std::stod(detail::expect_key(in, "bias")));
  }
  m.topics = TopicSet(std::move(names));
  if (detail::expect_line(in, "#vocabulary") != "#vocabulary") throw Error(Errc::BadInput, "missing #vocabulary");
  m.vocab = Vocabulary::read(in);
  for (std::size_t i = 0; i < k; ++i) {
    if (detail::expect_line(in, "#head") != "#head") throw Error(Errc::BadInput, "missing #head");
    m.weights.push_back(detail::read_doubles(in));
    if (m.weights.back().size() != m.vocab.size()) throw Error(Errc::BadInput, "head dimension mismatch");
  }
  return m;
}

TopicTraining train_topics(std::span<const TopicExample> examples, const TopicSet& topics, const TrainHyper& hyper,
                           std::size_t min_df) {
  const std::size_t K = topics.size();
  std::vector<std::string> texts;
  TopicTraining out;
  out.labels.assign(examples.size() * K, 0);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    texts.push_back(document_text(examples[i].record));
    for (const auto& name : examples[i].topics) {
      auto k = topics.index_of(name);
      if (!k) throw Error(Errc::BadInput, "unknown topic '" + name + "' for pmid " +
                                              std::to_string(examples[i].record.pmid));
      out.labels[i * K + *k] = 1;
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < examples.size(); ++i) pos += out.labels[i * K + k];
    if (pos == 0 || pos == examples.size()) throw Error(Errc::DegenerateTopic, topics[k]);
  }

  auto& m = out.model;
  m.topics = topics;
  m.hyper = hyper;
  m.vocab = Vocabulary::build_from_texts(texts, min_df);
  for (const auto& t : texts) out.features.push_back(featurize(t, m.vocab, m.scheme));
  auto fit = fit_multihead(out.features, out.labels, K, m.vocab.size(), hyper);
  m.weights = std::move(fit.weights);
  m.biases = std::move(fit.biases);
  m.thresholds.assign(K, 0.5);
  out.loss_history = std::move(fit.loss_history);
  return out;
}

TopicAnnotation annotate_topics(const CitationRecord& record, const MultiLabelModel* model) {
  if (model == nullptr) throw Error(Errc::ModelMissing, "topic annotation requires a trained model");
  TopicAnnotation a;
  a.pmid = record.pmid;
  const auto x = featurize(document_text(record), model->vocab, model->scheme);
  a.scores = model->scores(x);
  for (std::size_t k = 0; k < a.scores.size(); ++k)
    if (a.scores[k] >= model->thresholds[k]) a.assigned.push_back(model->topics[k]);
  return a;
}

void tune_thresholds(MultiLabelModel& model, std::span<const TopicExample> validation) {
  const std::size_t K = model.topics.size();
  std::vector<std::vector<double>> scores;
  for (const auto& ex : validation) scores.push_back(model.scores(featurize(document_text(ex.record), model.vocab, model.scheme)));
  for (std::size_t k = 0; k < K; ++k) {
    double best_f1 = -1, best_t = model.thresholds[k];
    for (int step = 1; step <= 19; ++step) {
      const double t = step * 0.05;
      std::size_t tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < validation.size(); ++i) {
        const auto& gold = validation[i].topics;
        const bool g = std::find(gold.begin(), gold.end(), model.topics[k]) != gold.end();
        const bool p = scores[i][k] >= t;
        tp += g && p;
        fp += !g && p;
        fn += g && !p;
      }
      const double f1 = tp == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
      if (f1 > best_f1) {
        best_f1 = f1;
        best_t = t;
      }
    }
    model.thresholds[k] = best_t;
  }
}

std::vector<std::size_t> topic_distribution(std::span<const TopicAnnotation> annotations, std::size_t topic_count) {
  std::vector<std::size_t> bins(topic_count + 1, 0);
  for (const auto& a : annotations) ++bins[std::min(a.assigned.size(), topic_count)];
  return bins;
}

std::map<Pmid, std::vector<std::string>> read_topic_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::BadInput, "cannot read " + path.string());
  std::map<Pmid, std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    auto& topics = out[std::stoll(line.substr(0, tab))];
    if (tab == std::string::npos) continue;
    std::stringstream ss(line.substr(tab + 1));
    std::string name;
    while (std::getline(ss, name, ',')) {
      auto t = trim(name);
      if (!t.empty()) topics.emplace_back(t);
    }
  }
  return out;
}

}  // namespace lithub

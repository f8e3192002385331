#include "lithub/triage.hpp"

#include <fstream>
#include <sstream>

#include "lithub/error.hpp"
#include "lithub/hash.hpp"
#include "model_io.hpp"

namespace lithub {

KeywordList::KeywordList(const std::vector<std::string>& phrases) {
  for (const auto& p : phrases) {
    std::vector<std::string> toks;
    for (auto& t : tokenize(p)) toks.push_back(std::move(t.surface));
    if (!toks.empty()) phrases_.push_back(std::move(toks));
  }
  if (phrases_.empty()) throw Error(Errc::BadInput, "keyword list must not be empty");
}

KeywordList KeywordList::defaults() { return KeywordList({"covid-19", "sars-cov-2", "coronavirus", "2019-ncov", "ncov"}); }

bool KeywordList::matches(const TokenStream& tokens) const {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (const auto& phrase : phrases_) {
      if (i + phrase.size() > tokens.size()) continue;
      bool hit = true;
      for (std::size_t k = 0; k < phrase.size() && hit; ++k) hit = tokens[i + k].surface == phrase[k];
      if (hit) return true;
    }
  }
  return false;
}

bool KeywordList::matches(std::string_view text) const { return matches(tokenize(text)); }

std::string KeywordHits::describe() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(title, "title");
  add(abstract, "abstract");
  add(keywords, "keywords");
  add(mesh, "mesh");
  add(funding, "funding_text");
  return out.empty() ? "none" : out;
}

KeywordHits keyword_prefilter(const CitationRecord& r, const KeywordList& kw) {
  auto any_of = [&](const std::vector<std::string>& items) {
    for (const auto& s : items)
      if (kw.matches(s)) return true;
    return false;
  };
  KeywordHits hits;
  hits.title = kw.matches(r.title);
  hits.abstract = kw.matches(r.abstract);
  hits.keywords = any_of(r.keywords);
  hits.mesh = any_of(r.mesh_terms);
  hits.funding = kw.matches(r.funding_text);
  return hits;
}

SparseVector LinearModel::features(const CitationRecord& record) const {
  return featurize(document_text(record), vocab, scheme);
}

double LinearModel::probability(const SparseVector& x) const { return sigmoid(dot(x, weights) + bias); }

double LinearModel::probability(const CitationRecord& record) const { return probability(features(record)); }

void LinearModel::write(std::ostream& out) const {
  out << "lithub-linear 1\n";
  out << "scheme " << (scheme == Weighting::TfIdf ? "tfidf" : "tf") << '\n';
  out << "threshold " << detail::format_double(threshold) << '\n';
  out << "bias " << detail::format_double(bias) << '\n';
  out << "learning_rate " << detail::format_double(hyper.learning_rate) << '\n';
  out << "epochs " << hyper.epochs << '\n';
  out << "l2 " << detail::format_double(hyper.l2) << '\n';
  out << "trained_on " << detail::format_hex(trained_on) << '\n';
  out << "vocab_fingerprint " << detail::format_hex(vocab.fingerprint()) << '\n';
  out << "#vocabulary\n";
  vocab.write(out);
  out << "#end\n";
  out << "#weights\n";
  detail::write_doubles(out, weights);
}

LinearModel LinearModel::read(std::istream& in) {
  if (detail::expect_line(in, "header") != "lithub-linear 1") throw Error(Errc::BadInput, "not a linear model file");
  LinearModel m;
  m.scheme = detail::expect_key(in, "scheme") == "tf" ? Weighting::Tf : Weighting::TfIdf;
  m.threshold = std::stod(detail::expect_key(in, "threshold"));
  m.bias = std::stod(detail::expect_key(in, "bias"));
  m.hyper.learning_rate = std::stod(detail::expect_key(in, "learning_rate"));
  m.hyper.epochs = std::stoi(detail::expect_key(in, "epochs"));
  m.hyper.l2 = std::stod(detail::expect_key(in, "l2"));
  m.trained_on = std::stoull(detail::expect_key(in, "trained_on"), nullptr, 16);
  auto fp = std::stoull(detail::expect_key(in, "vocab_fingerprint"), nullptr, 16);
  if (detail::expect_line(in, "#vocabulary") != "#vocabulary") throw Error(Errc::BadInput, "missing #vocabulary");
  m.vocab = Vocabulary::read(in);
  if (m.vocab.fingerprint() != fp) throw Error(Errc::BadInput, "vocabulary fingerprint mismatch");
  if (detail::expect_line(in, "#weights") != "#weights") throw Error(Errc::BadInput, "missing #weights");
  m.weights = detail::read_doubles(in);
  if (m.weights.size() != m.vocab.size()) throw Error(Errc::BadInput, "weight dimension != vocabulary size");
  if (!(m.threshold > 0 && m.threshold < 1)) throw Error(Errc::BadInput, "threshold must lie in (0,1)");
  return m;
}

void LinearModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(Errc::BadInput, "cannot write " + path.string());
  write(out);
}

LinearModel LinearModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ModelMissing, "cannot read model " + path.string());
  return read(in);
}

LinearTraining train_linear(std::span<const LabeledRecord> examples, const TrainHyper& hyper, std::size_t min_df,
                            int ngram) {
  std::vector<std::string> texts;
  std::vector<int> labels;
  Fnv1a fp;
  for (const auto& ex : examples) {
    texts.push_back(document_text(ex.record));
    labels.push_back(ex.label ? 1 : 0);
    fp.add(std::to_string(ex.record.pmid)).add(ex.label ? "+" : "-");
  }
  std::size_t pos = 0;
  for (int y : labels) pos += y;
  if (pos == 0 || pos == labels.size())
    throw Error(Errc::SingleClassDataset, "training data needs both classes");

  LinearTraining out;
  out.model.vocab = Vocabulary::build_from_texts(texts, min_df, ngram);
  out.model.hyper = hyper;
  out.model.trained_on = fp.value();
  out.features.reserve(texts.size());
  for (const auto& t : texts) out.features.push_back(featurize(t, out.model.vocab, out.model.scheme));
  auto fit = fit_logistic(out.features, labels, out.model.vocab.size(), hyper);
  out.model.weights = std::move(fit.weights);
  out.model.bias = fit.bias;
  out.loss_history = std::move(fit.loss_history);
  return out;
}

std::vector<std::string_view> split_sentences(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == '?' || c == '!') && i + 1 < text.size() && is_ws(text[i + 1])) {
      auto s = trim(text.substr(start, i + 1 - start));
      if (!s.empty()) out.push_back(s);
      start = i + 1;
    }
  }
  auto tail = trim(text.substr(std::min(start, text.size())));
  if (!tail.empty()) out.push_back(tail);
  return out;
}

TriageDecision triage(const CitationRecord& record, const LinearModel* model, const TriageRules& rules) {
  if (model == nullptr) throw Error(Errc::ModelMissing, "triage requires a trained model");
  TriageDecision d;
  d.pmid = record.pmid;
  const auto hits = keyword_prefilter(record, rules.keywords);
  if (!hits.any()) {
    d.category = ExclusionCategory::UnrelatedFindings;
    d.rationale = "no keyword mention";
    return d;
  }
  d.score = model->probability(record);
  d.relevant = d.score >= model->threshold;
  if (d.relevant) {
    d.rationale = "score above threshold; mentions in " + hits.describe();
    return d;
  }
  if (hits.only_funding()) {
    d.category = ExclusionCategory::OtherField;
    d.rationale = "keywords only in funding_text";
    return d;
  }
  if (hits.only_abstract()) {
    std::size_t mentioning = 0;
    bool cued = false;
    for (auto sentence : split_sentences(record.abstract)) {
      auto toks = tokenize(sentence);
      if (!rules.keywords.matches(toks)) continue;
      ++mentioning;
      for (const auto& t : toks)
        for (const auto& cue : rules.background_cues)
          if (t.surface == cue) cued = true;
    }
    if (mentioning == 1 && cued) {
      d.category = ExclusionCategory::BackgroundOnly;
      d.rationale = "keywords confined to one background sentence";
      return d;
    }
  }
  d.category = ExclusionCategory::UnrelatedFindings;
  d.rationale = "below threshold; mentions in " + hits.describe();
  return d;
}

}  // namespace lithub

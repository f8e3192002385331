#include "lithub/text_core.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "lithub/error.hpp"
#include "lithub/hash.hpp"

namespace lithub {

namespace {

std::atomic<std::uint64_t> g_featurize_calls{0};

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

bool is_connector(unsigned char c) { return c == '-' || c == '.'; }

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

}  // namespace

TokenStream tokenize(std::string_view text) {
  TokenStream out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (!is_word_byte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t start = i, last_word = i;
    while (i < n) {
      auto c = static_cast<unsigned char>(text[i]);
      if (is_word_byte(c)) {
        last_word = i;
      } else if (!is_connector(c)) {
        break;
      }
      ++i;
    }
    const std::size_t end = last_word + 1;
    Token tok;
    tok.start = start;
    tok.end = end;
    tok.surface.reserve(end - start);
    for (std::size_t k = start; k < end; ++k) tok.surface.push_back(lower(text[k]));
    out.push_back(std::move(tok));
    i = end;
  }
  return out;
}

std::vector<std::string> ngram_terms(const TokenStream& tokens, int n) {
  std::vector<std::string> terms;
  if (n <= 1) {
    terms.reserve(tokens.size());
    for (const auto& t : tokens) terms.push_back(t.surface);
    return terms;
  }
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string term = tokens[i].surface;
    for (int k = 1; k < n; ++k) {
      term += ' ';
      term += tokens[i + k].surface;
    }
    terms.push_back(std::move(term));
  }
  return terms;
}

double SparseVector::l1() const {
  double sum = 0;
  for (const auto& [idx, w] : entries) sum += std::abs(w);
  return sum;
}

Vocabulary Vocabulary::build(std::span<const CitationRecord> corpus, std::size_t min_df, int ngram) {
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& r : corpus) texts.push_back(document_text(r));
  return build_from_texts(texts, min_df, ngram);
}

Vocabulary Vocabulary::build_from_texts(std::span<const std::string> texts, std::size_t min_df, int ngram) {
  if (min_df == 0) throw Error(Errc::BadInput, "min_df must be >= 1");
  if (texts.empty()) throw Error(Errc::EmptyCorpus, "cannot build a vocabulary from zero documents");
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& text : texts) {
    auto terms = ngram_terms(tokenize(text), ngram);
    std::set<std::string> unique(terms.begin(), terms.end());
    for (const auto& t : unique) ++df[t];
  }
  Vocabulary v;
  v.n_docs_ = texts.size();
  v.ngram_ = ngram;
  for (auto& [term, count] : df)
    if (count >= min_df) v.terms_.emplace(term, Entry{0, count});
  v.reindex();
  return v;
}

void Vocabulary::reindex() {
  std::uint32_t next = 0;
  for (auto& [term, entry] : terms_) entry.index = next++;
}

std::optional<Vocabulary::Entry> Vocabulary::lookup(std::string_view term) const {
  auto it = terms_.find(term);
  if (it == terms_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Vocabulary::fingerprint() const {
  Fnv1a h;
  h.add(std::to_string(n_docs_)).sep().add(std::to_string(ngram_)).sep();
  for (const auto& [term, e] : terms_) h.add(term).sep().add(std::to_string(e.df)).sep();
  return h.value();
}

void Vocabulary::write(std::ostream& out) const {
  out << "#n_docs=" << n_docs_ << '\n';
  if (ngram_ != 1) out << "#ngram=" << ngram_ << '\n';
  for (const auto& [term, e] : terms_) out << term << '\t' << e.df << '\n';
}

Vocabulary Vocabulary::read(std::istream& in) {
  Vocabulary v;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("#n_docs=", 0) == 0) {
      v.n_docs_ = std::stoull(line.substr(8));
      header = true;
      continue;
    }
    if (line.rfind("#ngram=", 0) == 0) {
      v.ngram_ = std::stoi(line.substr(7));
      continue;
    }
    if (line == "#end") break;
    auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw Error(Errc::BadInput, "vocabulary line without tab: " + line);
    auto df = std::stoull(line.substr(tab + 1));
    if (df > v.n_docs_) throw Error(Errc::BadInput, "document frequency exceeds n_docs for " + line);
    v.terms_.emplace(line.substr(0, tab), Entry{0, df});
  }
  if (!header) throw Error(Errc::BadInput, "vocabulary missing #n_docs header");
  v.reindex();
  return v;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(Errc::BadInput, "cannot write " + path.string());
  write(out);
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::BadInput, "cannot read " + path.string());
  return read(in);
}

SparseVector featurize(const TokenStream& tokens, const Vocabulary& vocab, Weighting scheme) {
  g_featurize_calls.fetch_add(1, std::memory_order_relaxed);
  std::map<std::uint32_t, std::pair<double, std::size_t>> counts;  // index -> (tf, df)
  for (const auto& term : ngram_terms(tokens, vocab.ngram())) {
    auto e = vocab.lookup(term);
    if (!e) continue;
    auto& slot = counts[e->index];
    slot.first += 1.0;
    slot.second = e->df;
  }
  SparseVector v;
  v.entries.reserve(counts.size());
  const double n_docs = static_cast<double>(vocab.n_docs());
  for (const auto& [idx, tf_df] : counts) {
    double w = tf_df.first;
    if (scheme == Weighting::TfIdf) w *= std::log((1.0 + n_docs) / (1.0 + static_cast<double>(tf_df.second)));
    v.entries.emplace_back(idx, w);
  }
  return v;
}

SparseVector featurize(std::string_view text, const Vocabulary& vocab, Weighting scheme) {
  return featurize(tokenize(text), vocab, scheme);
}

std::uint64_t featurize_call_count() noexcept { return g_featurize_calls.load(std::memory_order_relaxed); }

}  // namespace lithub

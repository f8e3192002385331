#pragma once
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lithub/record.hpp"

namespace lithub {

struct Token {
  std::string surface;  // lowercased
  std::size_t start = 0;
  std::size_t end = 0;  // byte offsets into the source, [start, end)

  bool operator==(const Token&) const = default;
};

using TokenStream = std::vector<Token>;

// Tokens are maximal runs of letters/digits joined by the internal
// connectors '-' and '.'; connectors at token edges are dropped. Bytes
// >= 0x80 count as letters so UTF-8 words stay whole. ASCII-only lowercasing.
TokenStream tokenize(std::string_view text);

// Terms for n-gram featurization: n=1 gives the token surfaces, n=2 adjacent
// pairs joined by a single space.
std::vector<std::string> ngram_terms(const TokenStream& tokens, int n);

struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;  // ascending index

  double l1() const;
  bool operator==(const SparseVector&) const = default;
};

enum class Weighting { Tf, TfIdf };

class Vocabulary {
 public:
  struct Entry {
    std::uint32_t index = 0;
    std::size_t df = 0;
  };

  Vocabulary() = default;

  // Terms of title+abstract with document frequency >= min_df; indices in
  // lexicographic term order. Throws EmptyCorpus, BadInput (min_df == 0).
  static Vocabulary build(std::span<const CitationRecord> corpus, std::size_t min_df, int ngram = 1);
  static Vocabulary build_from_texts(std::span<const std::string> texts, std::size_t min_df, int ngram = 1);

  std::optional<Entry> lookup(std::string_view term) const;
  std::size_t size() const { return terms_.size(); }
  std::size_t n_docs() const { return n_docs_; }
  int ngram() const { return ngram_; }
  const std::map<std::string, Entry, std::less<>>& terms() const { return terms_; }
  std::uint64_t fingerprint() const;

  // term<TAB>df lines under a "#n_docs=<N>" header (plus "#ngram=<n>" when n != 1).
  void write(std::ostream& out) const;
  static Vocabulary read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& o) const {
    return n_docs_ == o.n_docs_ && ngram_ == o.ngram_ && fingerprint() == o.fingerprint();
  }

 private:
  void reindex();

  std::map<std::string, Entry, std::less<>> terms_;
  std::size_t n_docs_ = 0;
  int ngram_ = 1;
};

// tf = raw count; tfidf = tf * ln((1 + n_docs) / (1 + df)). OOV terms dropped.
SparseVector featurize(std::string_view text, const Vocabulary& vocab, Weighting scheme);
SparseVector featurize(const TokenStream& tokens, const Vocabulary& vocab, Weighting scheme);

// Process-wide count of featurize() calls, for single-pass instrumentation.
std::uint64_t featurize_call_count() noexcept;

}  // namespace lithub

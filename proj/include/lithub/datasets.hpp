#pragma once
#include <filesystem>
#include <string>
#include <vector>

#include "lithub/record.hpp"
#include "lithub/triage.hpp"

namespace lithub {

// Corpus file, one record per line. Errors carry the 1-based line number.
std::vector<CitationRecord> read_corpus(const std::filesystem::path& path);

// Corpus lines carrying an extra "relevant" (or "label") key, boolean or 0/1.
std::vector<LabeledRecord> read_labeled_records(const std::filesystem::path& path, const std::string& key = "relevant");

// One pmid per line; blank lines and '#' comments skipped.
std::vector<Pmid> read_pmids(const std::filesystem::path& path);

}  // namespace lithub

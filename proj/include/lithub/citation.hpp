#pragma once
#include <optional>
#include <string>
#include <string_view>

#include "lithub/record.hpp"

namespace lithub {

enum class CitationStyle { Text, Ris };

std::optional<CitationStyle> parse_citation_style(std::string_view name) noexcept;

// "Authors. Title. Journal. YYYY. PMID: N." Authors are comma-joined and
// omitted when absent; a trailing period in the title is not doubled.
std::string cite_text(const CitationRecord& record);

// TY  - JOUR, AU per author, TI, JO, PY, ID, ER. CRLF-free, one tag per line.
std::string cite_ris(const CitationRecord& record);

std::string cite(const CitationRecord& record, CitationStyle style);

// RFC 4180 field quoting.
std::string csv_field(std::string_view value);

}  // namespace lithub

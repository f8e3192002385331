#pragma once
#include <compare>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lithub/record.hpp"
#include "lithub/text_core.hpp"

namespace lithub {

// strain/vaccine/funder are the annotated entity types; longcovid and symptom
// entries drive the Long COVID signals; drug rows come from external mention
// files feeding the drug facet.
enum class EntityType { Strain, Vaccine, Funder, LongCovid, Symptom, Drug };

std::string_view entity_type_name(EntityType t) noexcept;
std::optional<EntityType> parse_entity_type(std::string_view name) noexcept;

struct LexiconEntry {
  std::string surface;
  std::vector<std::string> tokens;
  EntityType type = EntityType::Strain;
  std::string concept_id;
  bool ambiguous = false;
};

struct Concept {
  std::string id;
  EntityType type = EntityType::Strain;
  std::string canonical_name;
};

// Surface-form table compiled into a token trie. Immutable once loaded.
class Lexicon {
 public:
  // Sections "#entries", "#concepts", "#links" (any order). Throws
  // DanglingConcept, DuplicateSurface, BadLink, BadInput.
  static Lexicon load(const std::filesystem::path& path);
  static Lexicon parse(std::istream& in);

  struct Match {
    const LexiconEntry* entry = nullptr;
    std::size_t length = 0;  // in tokens
  };
  // Longest entry whose token sequence starts at tokens[pos].
  std::optional<Match> longest_match(const TokenStream& tokens, std::size_t pos) const;
  // Exact lookup of a surface form.
  const LexiconEntry* find_surface(std::string_view surface) const;

  const Concept* concept_of(std::string_view id) const;
  std::optional<std::string> funder_link(std::string_view vaccine_id) const;

  const std::vector<LexiconEntry>& entries() const { return entries_; }
  const std::map<std::string, Concept, std::less<>>& concepts() const { return concepts_; }
  const std::map<std::string, std::string, std::less<>>& links() const { return links_; }
  std::uint64_t version() const { return version_; }

 private:
  struct Node {
    std::map<std::string, std::uint32_t, std::less<>> next;
    int entry = -1;
  };
  void build_trie();

  std::vector<LexiconEntry> entries_;
  std::map<std::string, Concept, std::less<>> concepts_;
  std::map<std::string, std::string, std::less<>> links_;
  std::vector<Node> trie_;
  std::uint64_t version_ = 0;
};

struct RecognizeOptions {
  std::vector<std::string> cues{"variant", "variants", "strain", "strains", "lineage", "sars-cov-2",
                                "covid-19", "vaccine", "vaccinated", "booster"};
  std::size_t window = 8;
};

struct TextMatch {
  std::size_t token_begin = 0;
  std::size_t token_end = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  const LexiconEntry* entry = nullptr;
};

// Left-to-right longest match; ambiguous entries fire only with a cue token
// within the window on either side. Matches never overlap.
std::vector<TextMatch> recognize(std::string_view text, const Lexicon& lexicon, const RecognizeOptions& options = {});
std::vector<TextMatch> recognize(const TokenStream& tokens, const Lexicon& lexicon,
                                 const RecognizeOptions& options = {});

enum class TextField { Title, Abstract };
std::string_view field_name(TextField f) noexcept;

struct EntityMention {
  Pmid pmid = 0;
  TextField field = TextField::Title;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;
  EntityType type = EntityType::Strain;
  std::string concept_id;

  auto operator<=>(const EntityMention&) const = default;
};

// Mentions of the strain/vaccine/funder types in title and abstract.
std::vector<EntityMention> annotate_entities(const CitationRecord& record, const Lexicon& lexicon,
                                             const RecognizeOptions& options = {});

// Throws NotFound when the surface is not a lexicon entry of the mention's type.
std::string normalize(const EntityMention& mention, const Lexicon& lexicon);

// Throws NotAVaccine (or NotFound for an unknown concept).
std::optional<std::string> link_funder(std::string_view vaccine_concept, const Lexicon& lexicon);

// Columns: pmid, field, start, end, surface, type, concept_id. Tabs and
// newlines inside the surface are backslash-escaped.
void write_mentions(std::ostream& out, const std::vector<EntityMention>& mentions);
std::vector<EntityMention> read_mentions(std::istream& in);
std::vector<EntityMention> read_mentions(const std::filesystem::path& path);

}  // namespace lithub

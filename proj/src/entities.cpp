#include "lithub/entities.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "lithub/error.hpp"
#include "lithub/hash.hpp"

namespace lithub {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return cols;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '\t') out += "\\t";
    else if (c == '\n') out += "\\n";
    else if (c == '\r') out += "\\r";
    else if (c == '\\') out += "\\\\";
    else out += c;
  }
  return out;
}

std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      char n = s[++i];
      out += n == 't' ? '\t' : n == 'n' ? '\n' : n == 'r' ? '\r' : n;
    } else {
      out += s[i];
    }
  }
  return out;
}

}  // namespace

std::string_view entity_type_name(EntityType t) noexcept {
  switch (t) {
    case EntityType::Strain: return "strain";
    case EntityType::Vaccine: return "vaccine";
    case EntityType::Funder: return "funder";
    case EntityType::LongCovid: return "longcovid";
    case EntityType::Symptom: return "symptom";
    case EntityType::Drug: return "drug";
  }
  return "unknown";
}

std::optional<EntityType> parse_entity_type(std::string_view name) noexcept {
  for (auto t : {EntityType::Strain, EntityType::Vaccine, EntityType::Funder, EntityType::LongCovid,
                 EntityType::Symptom, EntityType::Drug})
    if (entity_type_name(t) == name) return t;
  return std::nullopt;
}

std::string_view field_name(TextField f) noexcept { return f == TextField::Title ? "title" : "abstract"; }

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::BadInput, "cannot read lexicon " + path.string());
  return parse(in);
}

Lexicon Lexicon::parse(std::istream& in) {
  Lexicon lex;
  enum class Section { None, Entries, Concepts, Links } section = Section::None;
  std::string line;
  std::size_t line_no = 0;
  Fnv1a version;
  std::vector<std::pair<std::string, std::string>> raw_links;
  auto bad = [&](const std::string& why) {
    return Error(Errc::BadInput, "lexicon line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    version.add(line).sep();
    if (line == "#entries") { section = Section::Entries; continue; }
    if (line == "#concepts") { section = Section::Concepts; continue; }
    if (line == "#links") { section = Section::Links; continue; }
    if (line.front() == '#') continue;
    auto cols = split_tabs(line);
    switch (section) {
      case Section::None: throw bad("row outside a section");
      case Section::Entries: {
        if (cols.size() != 4) throw bad("entries need 4 columns");
        auto type = parse_entity_type(cols[1]);
        if (!type) throw bad("unknown entity type '" + cols[1] + "'");
        LexiconEntry e;
        e.surface = cols[0];
        for (auto& t : tokenize(cols[0])) e.tokens.push_back(std::move(t.surface));
        if (e.tokens.empty()) throw bad("empty surface form");
        e.type = *type;
        e.concept_id = cols[2];
        if (cols[3] != "0" && cols[3] != "1") throw bad("ambiguous flag must be 0 or 1");
        e.ambiguous = cols[3] == "1";
        lex.entries_.push_back(std::move(e));
        break;
      }
      case Section::Concepts: {
        if (cols.size() != 3) throw bad("concepts need 3 columns");
        auto type = parse_entity_type(cols[1]);
        if (!type) throw bad("unknown entity type '" + cols[1] + "'");
        if (!lex.concepts_.emplace(cols[0], Concept{cols[0], *type, cols[2]}).second)
          throw bad("duplicate concept '" + cols[0] + "'");
        break;
      }
      case Section::Links: {
        if (cols.size() != 2) throw bad("links need 2 columns");
        raw_links.emplace_back(cols[0], cols[1]);
        break;
      }
    }
  }

  std::set<std::pair<std::vector<std::string>, EntityType>> seen;
  for (const auto& e : lex.entries_) {
    auto c = lex.concepts_.find(e.concept_id);
    if (c == lex.concepts_.end() || c->second.type != e.type)
      throw Error(Errc::DanglingConcept, "entry '" + e.surface + "' references missing " +
                                             std::string(entity_type_name(e.type)) + " concept '" + e.concept_id + "'");
    if (!seen.emplace(e.tokens, e.type).second)
      throw Error(Errc::DuplicateSurface, "surface '" + e.surface + "' listed twice as " +
                                              std::string(entity_type_name(e.type)));
  }
  for (const auto& [vax, funder] : raw_links) {
    auto v = lex.concepts_.find(vax);
    auto f = lex.concepts_.find(funder);
    if (v == lex.concepts_.end() || v->second.type != EntityType::Vaccine || f == lex.concepts_.end() ||
        f->second.type != EntityType::Funder)
      throw Error(Errc::BadLink, "link " + vax + " -> " + funder + " must join a vaccine to a funder");
    if (!lex.links_.emplace(vax, funder).second) throw Error(Errc::BadLink, "vaccine " + vax + " linked twice");
  }
  lex.version_ = version.value();
  lex.build_trie();
  return lex;
}

void Lexicon::build_trie() {
  trie_.assign(1, Node{});
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    std::uint32_t node = 0;
    for (const auto& tok : entries_[i].tokens) {
      auto it = trie_[node].next.find(tok);
      if (it == trie_[node].next.end()) {
        trie_.push_back(Node{});
        it = trie_[node].next.emplace(tok, static_cast<std::uint32_t>(trie_.size() - 1)).first;
      }
      node = it->second;
    }
    // Same surface under two types: the first listed wins.
    if (trie_[node].entry < 0) trie_[node].entry = static_cast<int>(i);
  }
}

std::optional<Lexicon::Match> Lexicon::longest_match(const TokenStream& tokens, std::size_t pos) const {
  std::optional<Match> best;
  std::uint32_t node = 0;
  for (std::size_t i = pos; i < tokens.size(); ++i) {
    auto it = trie_[node].next.find(tokens[i].surface);
    if (it == trie_[node].next.end()) break;
    node = it->second;
    if (trie_[node].entry >= 0) best = Match{&entries_[trie_[node].entry], i - pos + 1};
  }
  return best;
}

const LexiconEntry* Lexicon::find_surface(std::string_view surface) const {
  auto toks = tokenize(surface);
  auto m = longest_match(toks, 0);
  if (!m || m->length != toks.size()) return nullptr;
  return m->entry;
}

const Concept* Lexicon::concept_of(std::string_view id) const {
  auto it = concepts_.find(id);
  return it == concepts_.end() ? nullptr : &it->second;
}

std::optional<std::string> Lexicon::funder_link(std::string_view vaccine_id) const {
  auto it = links_.find(vaccine_id);
  if (it == links_.end()) return std::nullopt;
  return it->second;
}

std::vector<TextMatch> recognize(const TokenStream& tokens, const Lexicon& lexicon, const RecognizeOptions& options) {
  std::vector<TextMatch> out;
  auto has_cue = [&](std::size_t begin, std::size_t end) {
    const std::size_t lo = begin > options.window ? begin - options.window : 0;
    const std::size_t hi = std::min(tokens.size(), end + options.window);
    for (std::size_t i = lo; i < hi; ++i) {
      if (i >= begin && i < end) continue;
      for (const auto& cue : options.cues)
        if (tokens[i].surface == cue) return true;
    }
    return false;
  };
  std::size_t i = 0;
  while (i < tokens.size()) {
    auto m = lexicon.longest_match(tokens, i);
    if (!m || (m->entry->ambiguous && !has_cue(i, i + m->length))) {
      ++i;
      continue;
    }
    out.push_back(TextMatch{i, i + m->length, tokens[i].start, tokens[i + m->length - 1].end, m->entry});
    i += m->length;
  }
  return out;
}

std::vector<TextMatch> recognize(std::string_view text, const Lexicon& lexicon, const RecognizeOptions& options) {
  return recognize(tokenize(text), lexicon, options);
}

std::vector<EntityMention> annotate_entities(const CitationRecord& record, const Lexicon& lexicon,
                                             const RecognizeOptions& options) {
  std::vector<EntityMention> out;
  for (auto field : {TextField::Title, TextField::Abstract}) {
    const std::string& text = field == TextField::Title ? record.title : record.abstract;
    for (const auto& m : recognize(text, lexicon, options)) {
      auto t = m.entry->type;
      if (t != EntityType::Strain && t != EntityType::Vaccine && t != EntityType::Funder) continue;
      out.push_back(EntityMention{record.pmid, field, m.start, m.end, text.substr(m.start, m.end - m.start), t,
                                  m.entry->concept_id});
    }
  }
  return out;
}

std::string normalize(const EntityMention& mention, const Lexicon& lexicon) {
  const auto* entry = lexicon.find_surface(mention.surface);
  if (entry == nullptr || entry->type != mention.type)
    throw Error(Errc::NotFound, "no lexicon entry for '" + mention.surface + "'");
  return entry->concept_id;
}

std::optional<std::string> link_funder(std::string_view vaccine_concept, const Lexicon& lexicon) {
  const auto* c = lexicon.concept_of(vaccine_concept);
  if (c == nullptr) throw Error(Errc::NotFound, "unknown concept '" + std::string(vaccine_concept) + "'");
  if (c->type != EntityType::Vaccine)
    throw Error(Errc::NotAVaccine, std::string(vaccine_concept) + " is a " + std::string(entity_type_name(c->type)));
  return lexicon.funder_link(vaccine_concept);
}

void write_mentions(std::ostream& out, const std::vector<EntityMention>& mentions) {
  for (const auto& m : mentions)
    out << m.pmid << '\t' << field_name(m.field) << '\t' << m.start << '\t' << m.end << '\t' << escape(m.surface)
        << '\t' << entity_type_name(m.type) << '\t' << m.concept_id << '\n';
}

std::vector<EntityMention> read_mentions(std::istream& in) {
  std::vector<EntityMention> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    auto cols = split_tabs(line);
    auto type = cols.size() == 7 ? parse_entity_type(cols[5]) : std::nullopt;
    if (!type || (cols[1] != "title" && cols[1] != "abstract"))
      throw Error(Errc::BadInput, "mention line " + std::to_string(line_no) + " is malformed");
    EntityMention m;
    m.pmid = std::stoll(cols[0]);
    m.field = cols[1] == "title" ? TextField::Title : TextField::Abstract;
    m.start = std::stoull(cols[2]);
    m.end = std::stoull(cols[3]);
    m.surface = unescape(cols[4]);
    m.type = *type;
    m.concept_id = cols[6];
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<EntityMention> read_mentions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::BadInput, "cannot read " + path.string());
  return read_mentions(in);
}

}  // namespace lithub

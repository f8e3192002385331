#include "lithub/hub_service.hpp"

#include <httplib.h>
#include <json.hpp>

#include <charconv>
#include <fstream>
#include <regex>
#include <sstream>

#include "lithub/citation.hpp"
#include "lithub/error.hpp"

namespace lithub {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// An error already shaped for the envelope.
struct ApiError {
  int status;
  std::string code;
  std::string message;
  std::string parameter;
};

int http_status(Errc code) {
  switch (code) {
    case Errc::NotFound: return 404;
    case Errc::AlreadyDecided:
    case Errc::NoNewLabels:
    case Errc::SingleClassDataset: return 409;
    case Errc::BadPage:
    case Errc::BadFacet:
    case Errc::BadDate:
    case Errc::BadInput:
    case Errc::PeriodMismatch: return 400;
    default: return 500;
  }
}

ApiResponse json_response(const json& body, int status = 200) {
  ApiResponse r;
  r.status = status;
  r.body = body.dump();
  return r;
}

ApiResponse error_response(const ApiError& e) {
  json body = {{"status", e.status}, {"code", e.code}, {"message", e.message}};
  if (!e.parameter.empty()) body["parameter"] = e.parameter;
  return json_response(body, e.status);
}

[[noreturn]] void bad_param(const std::string& name, const std::string& message, std::string code = "BadInput") {
  throw ApiError{400, std::move(code), name + ": " + message, name};
}

std::size_t size_param(const ApiRequest& req, const std::string& name, std::size_t fallback,
                       const std::string& code = "BadInput") {
  auto v = req.param(name);
  if (!v) return fallback;
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || ptr != v->data() + v->size() || v->empty())
    bad_param(name, "expected a non-negative integer, got '" + *v + "'", code);
  return out;
}

std::optional<Pmid> parse_pmid(const std::string& text) {
  Pmid out = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc{} || ptr != text.data() + text.size() || out <= 0) return std::nullopt;
  return out;
}

FacetQuery query_from(const ApiRequest& req) {
  FacetQuery q;
  if (auto text = req.param("q")) {
    try {
      q = parse_query(*text);
    } catch (const Error& e) {
      bad_param("q", e.what(), std::string(errc_name(e.code())));
    }
  }
  static const std::array<std::pair<const char*, Facet>, 5> facet_params{{{"topic", Facet::Topic},
                                                                         {"variant", Facet::Variant},
                                                                         {"vaccine", Facet::Vaccine},
                                                                         {"drug", Facet::Drug},
                                                                         {"journal", Facet::Journal}}};
  for (const auto& [name, facet] : facet_params)
    for (const auto& v : req.params_named(name))
      if (!v.empty()) q.filters[facet].insert(v);
  for (const char* name : {"from", "to"}) {
    auto v = req.param(name);
    if (!v || v->empty()) continue;
    auto d = Date::parse(*v);
    if (!d) bad_param(name, "expected YYYY-MM-DD or YYYY-MM, got '" + *v + "'", "BadDate");
    (std::string_view(name) == "from" ? q.from : q.to) = *d;
  }
  q.page = size_param(req, "page", q.page, "BadPage");
  q.page_size = size_param(req, "size", q.page_size, "BadPage");
  if (auto s = req.param("sort")) {
    if (*s == "relevance")
      q.sort = SortOrder::Relevance;
    else if (*s == "date_desc")
      q.sort = SortOrder::DateDesc;
    else
      bad_param("sort", "expected relevance or date_desc, got '" + *s + "'");
  }
  if (q.page < 1) bad_param("page", "must be >= 1", "BadPage");
  if (q.page_size < 1 || q.page_size > 500) bad_param("size", "must lie in [1, 500]", "BadPage");
  return q;
}

json string_set(const std::set<std::string>& values) { return json(std::vector<std::string>(values.begin(), values.end())); }

json record_json(const CitationRecord& r) { return json::parse(serialize_record(r)); }

json hit_json(const SearchHit& hit, const CollectionSnapshot& snap) {
  const auto& rec = snap.records.at(hit.pmid);
  const auto* doc = snap.index.document(hit.pmid);
  json h = {{"pmid", hit.pmid},
            {"title", rec.title},
            {"journal", rec.journal},
            {"pub_date", hit.pub_date.iso()},
            {"score", hit.score},
            {"topics", doc ? string_set(doc->facets.topics) : json::array()},
            {"longcovid", std::string(longcovid_status_name(hit.longcovid))}};
  return h;
}

json facet_counts_json(const FacetCounts& counts) {
  json out = json::object();
  for (Facet f : kAllFacets) {
    json values = json::object();
    if (auto it = counts.find(f); it != counts.end())
      for (const auto& [value, n] : it->second) values[value] = n;
    out[std::string(facet_name(f))] = values;
  }
  return out;
}

json mention_json(const EntityMention& m) {
  return {{"field", std::string(field_name(m.field))},
          {"start", m.start},
          {"end", m.end},
          {"surface", m.surface},
          {"type", std::string(entity_type_name(m.type))},
          {"concept", m.concept_id}};
}

json spans_json(const std::vector<SynonymSpan>& spans) {
  json out = json::array();
  for (const auto& s : spans)
    out.push_back({{"field", std::string(field_name(s.field))}, {"start", s.start}, {"end", s.end}});
  return out;
}

json signals_json(const SignalVector& s) {
  json out = json::object();
  for (std::size_t i = 0; i < kSignalCount; ++i) out[std::string(signal_name(i))] = s[i];
  return out;
}

json review_item_json(const ReviewItem& item, const CitationRecord& rec, const Lexicon* lexicon) {
  json j = {{"pmid", item.pmid},
            {"title", rec.title},
            {"abstract", rec.abstract},
            {"journal", rec.journal},
            {"pub_date", rec.pub_date.iso()},
            {"p", item.p},
            {"priority", item.priority},
            {"status", std::string(review_status_name(item.status))},
            {"signals", signals_json(item.signals)},
            {"synonym_spans", spans_json(synonym_spans(rec, lexicon))}};
  j["decided_by"] = item.decided_by ? json(*item.decided_by) : json(nullptr);
  j["decided_at"] = item.decided_at ? json(item.decided_at->iso()) : json(nullptr);
  return j;
}

std::vector<std::set<std::string>> assigned_sets(const CollectionSnapshot& snap) {
  std::vector<std::set<std::string>> out;
  out.reserve(snap.records.size());
  for (const auto& [pmid, rec] : snap.records) {
    auto it = snap.topics.find(pmid);
    out.emplace_back();
    if (it != snap.topics.end()) out.back().insert(it->second.assigned.begin(), it->second.assigned.end());
  }
  return out;
}

std::vector<Date> collection_dates(const CollectionSnapshot& snap) {
  std::vector<Date> dates;
  dates.reserve(snap.records.size());
  for (const auto& [pmid, rec] : snap.records) dates.push_back(rec.pub_date);
  return dates;
}

Granularity granularity_param(const ApiRequest& req, Granularity fallback) {
  auto v = req.param("granularity");
  if (!v) return fallback;
  auto g = parse_granularity(*v);
  if (!g) bad_param("granularity", "expected day, month or quarter, got '" + *v + "'");
  return *g;
}

std::string join(const std::set<std::string>& values, char sep) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += sep;
    out += v;
  }
  return out;
}

}  // namespace

std::optional<std::string> ApiRequest::param(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> ApiRequest::params_named(const std::string& name) const {
  std::vector<std::string> out;
  auto [lo, hi] = params.equal_range(name);
  for (auto it = lo; it != hi; ++it) out.push_back(it->second);
  return out;
}

struct HubService::Server {
  httplib::Server http;
  int port = 0;
};

HubService::HubService(HubConfig config) : config_(std::move(config)), server_(std::make_unique<Server>()) {
  if (config_.trending && fs::exists(*config_.trending)) trending_ = read_trending(*config_.trending);
  if (config_.baseline && fs::exists(*config_.baseline)) {
    baseline_ = read_baseline(*config_.baseline);
    has_baseline_ = true;
  }
  refresh();
}

HubService::~HubService() { stop(); }

bool HubService::refresh() {
  const SnapshotDirectory dir(config_.data_dir);
  auto id = dir.current_id();
  {
    std::scoped_lock lock(live_mutex_);
    if (!id) return live_.snapshot != nullptr;
    if (*id == live_id_) return true;
  }
  std::scoped_lock reload(reload_mutex_);
  {
    std::scoped_lock lock(live_mutex_);
    if (*id == live_id_) return true;
  }
  LiveView next;
  next.snapshot = dir.load_current();
  if (!next.snapshot) return false;
  next.loop = std::shared_ptr<LongCovidLoop>(open_loop(*next.snapshot, config_));
  std::scoped_lock lock(live_mutex_);
  live_ = std::move(next);
  live_id_ = live_.snapshot->id;
  return true;
}

LiveView HubService::live() const {
  std::scoped_lock lock(live_mutex_);
  return live_;
}

ApiResponse HubService::handle(const ApiRequest& request) {
  ApiResponse response;
  LiveView view;
  try {
    refresh();
    view = live();
    if (request.path.rfind("/api/", 0) != 0) throw ApiError{404, "route_not_found", "no route " + request.path, ""};
    if (!view.snapshot) throw ApiError{503, "no_snapshot", "no snapshot has been published yet", ""};
    response = dispatch(request, view);
  } catch (const ApiError& e) {
    response = error_response(e);
  } catch (const Error& e) {
    const int status = http_status(e.code());
    response = error_response(ApiError{status, std::string(errc_name(e.code())), e.what(), ""});
  } catch (const std::exception& e) {
    response = error_response(ApiError{500, "internal", e.what(), ""});
  }
  if (view.snapshot) response.snapshot_id = view.snapshot->id;
  return response;
}

ApiResponse HubService::dispatch(const ApiRequest& req, const LiveView& view) {
  const auto& snap = *view.snapshot;
  const auto& path = req.path;
  const bool get = req.method == "GET";
  auto require_get = [&] {
    if (!get) throw ApiError{405, "method_not_allowed", req.method + " not allowed on " + path, ""};
  };

  if (path == "/api/stats/overview") {
    require_get();
    std::set<std::string> journals, topics;
    for (const auto& [pmid, rec] : snap.records) journals.insert(rec.journal);
    for (const auto& [pmid, a] : snap.topics)
      if (snap.records.contains(pmid)) topics.insert(a.assigned.begin(), a.assigned.end());
    return json_response({{"publications", snap.records.size()}, {"journals", journals.size()}, {"topics", topics.size()}});
  }

  if (path == "/api/search") {
    require_get();
    const auto q = query_from(req);
    const auto result = snap.index.search(q);
    json hits = json::array();
    for (const auto& h : result.page) hits.push_back(hit_json(h, snap));
    return json_response({{"total", result.total},
                          {"page", q.page},
                          {"size", q.page_size},
                          {"sort", q.sort == SortOrder::Relevance ? "relevance" : "date_desc"},
                          {"hits", hits},
                          {"facet_counts", facet_counts_json(result.facet_counts)}});
  }

  static const std::regex doc_route(R"(/api/doc/([^/]+)(/cite)?)");
  std::smatch m;
  if (std::regex_match(path, m, doc_route)) {
    require_get();
    auto pmid = parse_pmid(m[1].str());
    if (!pmid) bad_param("pmid", "expected a positive integer, got '" + m[1].str() + "'");
    auto it = snap.records.find(*pmid);
    if (it == snap.records.end())
      throw ApiError{404, "NotFound", "pmid " + std::to_string(*pmid) + " is not in the collection", ""};
    const auto& rec = it->second;
    if (m[2].matched) {
      const auto style_name = req.param("style").value_or("text");
      auto style = parse_citation_style(style_name);
      if (!style) bad_param("style", "expected text or ris, got '" + style_name + "'");
      ApiResponse r;
      r.content_type = *style == CitationStyle::Ris ? "application/x-research-info-systems" : "text/plain";
      r.body = cite(rec, *style);
      return r;
    }
    json doc = {{"record", record_json(rec)}};
    if (auto p = snap.processed.find(*pmid); p != snap.processed.end()) {
      const auto& d = p->second.decision;
      doc["triage"] = {{"relevant", d.relevant},
                       {"score", d.score},
                       {"category", static_cast<int>(d.category)},
                       {"rationale", d.rationale}};
    }
    json topics = {{"assigned", json::array()}, {"scores", json::object()}};
    if (auto t = snap.topics.find(*pmid); t != snap.topics.end()) {
      topics["assigned"] = t->second.assigned;
      for (std::size_t k = 0; k < t->second.scores.size() && k < snap.topic_names.size(); ++k)
        topics["scores"][snap.topic_names[k]] = t->second.scores[k];
    }
    doc["topics"] = topics;
    json mentions = json::array();
    if (auto ms = snap.mentions.find(*pmid); ms != snap.mentions.end())
      for (const auto& mention : ms->second) mentions.push_back(mention_json(mention));
    doc["mentions"] = mentions;
    doc["drugs"] = json::array();
    if (auto d = snap.drugs.find(*pmid); d != snap.drugs.end()) doc["drugs"] = string_set(d->second);
    if (auto lc = snap.longcovid.find(*pmid); lc != snap.longcovid.end()) {
      doc["longcovid"] = {{"status", std::string(longcovid_status_name(lc->second.status))},
                          {"p", lc->second.p},
                          {"signals", signals_json(lc->second.signals)},
                          {"synonym_spans", spans_json(synonym_spans(rec, view.loop->lexicon()))}};
    }
    return json_response(doc);
  }

  if (path == "/api/stats/growth") {
    require_get();
    const auto dates = collection_dates(snap);
    const auto series = growth(dates, granularity_param(req, Granularity::Month));
    if (req.param("format") == std::optional<std::string>("csv")) {
      ApiResponse r;
      r.content_type = "text/csv";
      r.body = series.csv();
      return r;
    }
    json rows = json::array();
    for (const auto& row : series.rows)
      rows.push_back({{"period", row.period}, {"new", row.new_count}, {"cumulative", row.cumulative}});
    return json_response({{"granularity", req.param("granularity").value_or("month")}, {"rows", rows}});
  }

  if (path == "/api/stats/share") {
    require_get();
    json rows = json::array();
    if (has_baseline_) {
      const auto dates = collection_dates(snap);
      const auto series = growth(dates, granularity_param(req, Granularity::Quarter));
      for (const auto& row : share_ratio(series, baseline_))
        rows.push_back({{"period", row.period},
                        {"collection", row.collection},
                        {"baseline", row.baseline},
                        {"ratio", row.ratio ? json(*row.ratio) : json(nullptr)}});
    }
    return json_response({{"rows", rows}});
  }

  if (path == "/api/stats/cooccurrence") {
    require_get();
    const auto sets = assigned_sets(snap);
    TopicSet topics = snap.topic_names.empty() ? TopicSet::defaults() : TopicSet(snap.topic_names);
    const auto matrix = cooccurrence(sets, topics);
    return json_response({{"topics", matrix.topics},
                          {"counts", matrix.counts},
                          {"per_article", per_article_distribution(sets, topics.size())}});
  }

  if (path == "/api/stats/trending") {
    require_get();
    std::set<Pmid> members;
    for (const auto& [pmid, rec] : snap.records) members.insert(pmid);
    json items = json::array();
    for (const auto& t : trending(members, trending_, size_param(req, "n", 6)))
      items.push_back({{"pmid", t.pmid},
                       {"score", t.score},
                       {"title", snap.records.at(t.pmid).title},
                       {"journal", snap.records.at(t.pmid).journal}});
    return json_response({{"items", items}});
  }

  if (path == "/api/review/queue") {
    require_get();
    const auto k = size_param(req, "k", 10);
    json items = json::array();
    for (const auto& item : view.loop->next_review_batch(k))
      items.push_back(review_item_json(item, snap.records.at(item.pmid), view.loop->lexicon()));
    return json_response({{"iteration", view.loop->iteration()}, {"items", items}});
  }

  if (path == "/api/review/iterate") {
    if (req.method != "POST") throw ApiError{405, "method_not_allowed", req.method + " not allowed on " + path, ""};
    return review_iterate(view);
  }

  static const std::regex review_route(R"(/api/review/([^/]+))");
  if (std::regex_match(path, m, review_route)) {
    if (req.method != "POST") throw ApiError{405, "method_not_allowed", req.method + " not allowed on " + path, ""};
    auto pmid = parse_pmid(m[1].str());
    if (!pmid) bad_param("pmid", "expected a positive integer, got '" + m[1].str() + "'");
    return review_decision(req, view, *pmid);
  }

  if (path == "/api/export") {
    require_get();
    const auto format = req.param("format").value_or("jsonl");
    if (format != "jsonl" && format != "csv") bad_param("format", "expected jsonl or csv, got '" + format + "'");
    auto q = query_from(req);
    q.sort = SortOrder::DateDesc;
    std::ostringstream out;
    ApiResponse r;
    if (format == "csv") {
      r.content_type = "text/csv";
      out << "pmid,title,journal,pub_date,topics,variants,vaccines\r\n";
    } else {
      r.content_type = "application/x-ndjson";
    }
    for (const auto& hit : snap.index.all_hits(q)) {
      const auto& rec = snap.records.at(hit.pmid);
      const auto& facets = snap.index.document(hit.pmid)->facets;
      if (format == "csv") {
        out << rec.pmid << ',' << csv_field(rec.title) << ',' << csv_field(rec.journal) << ','
            << rec.pub_date.iso() << ',' << csv_field(join(facets.topics, ';')) << ','
            << csv_field(join(facets.strains, ';')) << ',' << csv_field(join(facets.vaccines, ';')) << "\r\n";
      } else {
        json line = record_json(rec);
        line["topics"] = string_set(facets.topics);
        line["variants"] = string_set(facets.strains);
        line["vaccines"] = string_set(facets.vaccines);
        line["drugs"] = string_set(facets.drugs);
        line["longcovid"] = std::string(longcovid_status_name(facets.longcovid));
        out << line.dump() << '\n';
      }
    }
    r.body = out.str();
    return r;
  }

  throw ApiError{404, "route_not_found", "no route " + req.method + " " + path, ""};
}

ApiResponse HubService::review_decision(const ApiRequest& req, const LiveView& view, Pmid pmid) {
  json body;
  try {
    body = json::parse(req.body.empty() ? "{}" : req.body);
  } catch (const json::exception&) {
    bad_param("body", "expected a JSON object");
  }
  if (!body.is_object()) bad_param("body", "expected a JSON object");
  if (!body.contains("label") || !body["label"].is_string()) bad_param("label", "expected accept or reject");
  const auto label = body["label"].get<std::string>();
  bool accept = false;
  if (label == "accept" || label == "accepted")
    accept = true;
  else if (label != "reject" && label != "rejected")
    bad_param("label", "expected accept or reject, got '" + label + "'");
  if (!body.contains("curator") || !body["curator"].is_string() || body["curator"].get<std::string>().empty())
    bad_param("curator", "a non-empty curator id is required");
  const auto curator = body["curator"].get<std::string>();

  std::scoped_lock lock(review_mutex_);
  const auto now = Timestamp::now();
  auto item = view.loop->record_decision(pmid, accept, curator, now);
  const HubPaths paths{config_.data_dir};
  fs::create_directories(paths.decisions().parent_path());
  append_decision(paths.decisions(), Decision{pmid, accept, curator, now, item.iteration});
  return json_response(review_item_json(item, view.snapshot->records.at(pmid), view.loop->lexicon()));
}

ApiResponse HubService::review_iterate(const LiveView& view) {
  std::scoped_lock lock(review_mutex_);
  view.loop->run_iteration();
  const HubPaths paths{config_.data_dir};
  const auto logged = DecisionLog::read(paths.decisions()).decisions.size();
  append_iteration_mark(paths.decisions(), logged, view.loop->iteration());
  return json_response({{"iteration", view.loop->iteration()}});
}

void HubService::serve(const std::string& host, int port) {
  auto& http = server_->http;
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest request;
    request.method = req.method;
    request.path = req.path;
    for (const auto& [k, v] : req.params) request.params.emplace(k, v);
    request.body = req.body;
    const auto response = handle(request);
    res.status = response.status;
    if (!response.snapshot_id.empty()) res.set_header("X-Snapshot-Id", response.snapshot_id);
    res.set_content(response.body, response.content_type);
  };
  http.Get(".*", handler);
  http.Post(".*", handler);
  http.Put(".*", handler);
  http.Delete(".*", handler);
  http.Patch(".*", handler);
  if (port == 0) {
    server_->port = http.bind_to_any_port(host);
  } else {
    if (!http.bind_to_port(host, port)) throw Error(Errc::StoreUnavailable, "cannot bind port " + std::to_string(port));
    server_->port = port;
  }
  if (server_->port <= 0) throw Error(Errc::StoreUnavailable, "cannot bind " + host);
  http.listen_after_bind();
}

int HubService::bound_port() const { return server_->port; }

void HubService::wait_until_listening() const { server_->http.wait_until_ready(); }

void HubService::stop() {
  if (server_ && server_->http.is_running()) server_->http.stop();
}

}  // namespace lithub

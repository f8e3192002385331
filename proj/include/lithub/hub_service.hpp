#pragma once
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lithub/insights.hpp"
#include "lithub/longcovid.hpp"
#include "lithub/pipeline.hpp"

namespace lithub {

struct ApiRequest {
  std::string method = "GET";
  std::string path;
  std::multimap<std::string, std::string> params;
  std::string body;

  std::optional<std::string> param(const std::string& name) const;
  std::vector<std::string> params_named(const std::string& name) const;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::string snapshot_id;  // sent as X-Snapshot-Id
};

// Live snapshot plus the review loop built over its collection.
struct LiveView {
  std::shared_ptr<const CollectionSnapshot> snapshot;
  std::shared_ptr<LongCovidLoop> loop;
};

class HubService {
 public:
  explicit HubService(HubConfig config);

  // Rereads CURRENT and reloads when the id moved. Returns whether a
  // snapshot is live.
  bool refresh();
  LiveView live() const;
  const HubConfig& config() const { return config_; }
  const std::vector<TrendingItem>& trending_source() const { return trending_; }

  // Transport-free dispatch; the HTTP server is a thin shell around this.
  ApiResponse handle(const ApiRequest& request);

  // Blocks until stop(). port 0 binds an ephemeral port; bound_port()
  // reports it once listening.
  void serve(const std::string& host, int port);
  int bound_port() const;
  void stop();
  void wait_until_listening() const;

  ~HubService();

 private:
  struct Server;

  ApiResponse dispatch(const ApiRequest& request, const LiveView& view);
  ApiResponse review_decision(const ApiRequest& request, const LiveView& view, Pmid pmid);
  ApiResponse review_iterate(const LiveView& view);

  HubConfig config_;
  std::vector<TrendingItem> trending_;
  std::map<std::string, std::size_t> baseline_;
  bool has_baseline_ = false;

  mutable std::mutex live_mutex_;
  std::mutex reload_mutex_;
  std::mutex review_mutex_;
  LiveView live_;
  std::string live_id_;

  std::unique_ptr<Server> server_;
};

}  // namespace lithub

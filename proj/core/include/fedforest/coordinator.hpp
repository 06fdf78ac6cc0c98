#pragma once

// Networked form of the global store.
//
// HTTP/1.1 endpoints, JSON bodies:
//   POST /register  {"site_id": "s1", "features": ["Age", ...]}
//                   -> 200 {"status": "ok"}
//   POST /commit    <forest document>                  (site_id taken from it)
//                   -> 200 {"status": "ok", "committed": 100}
//   POST /request   {"site_id": "s1", "method": "additive", "seed": 7}
//                   -> 200 <forest document of the go-local forest>
//   GET  /sites     -> 200 [{"site_id": ..., "features": [...], "committed": n}]
// Errors answer {"error": "..."} with 400 (malformed), 404 (unknown site) or
// 409 (conflict: duplicate id, nothing committed yet).
//
// Only trees and feature names cross the wire.

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "fedforest/error.hpp"
#include "fedforest/federation.hpp"

namespace httplib {
class Server;
}

namespace fedforest {

class CoordinatorError : public Error {
 public:
  enum class Kind { bad_request, not_found, conflict };

  CoordinatorError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }
  int http_status() const noexcept;

 private:
  Kind kind_;
};

struct SiteSession {
  std::string site_id;
  FeatureDictionary dictionary;
  std::size_t committed = 0;
};

/// Transport-independent request handling around a GlobalStore.
class Coordinator {
 public:
  void register_site(const std::string& site_id, const std::vector<std::string>& feature_names);

  /// Validates the whole document before storing anything. Returns the
  /// number of trees stored.
  std::size_t commit_forest(std::string_view site_id, std::string_view forest_document);

  /// Serialized build_go_local output for a registered site that has
  /// committed its local forest.
  std::string request_go_local(std::string_view site_id, AggregationMethod method,
                               std::uint64_t seed) const;

  std::vector<SiteSession> sessions() const;
  const GlobalStore& store() const noexcept { return store_; }

 private:
  GlobalStore store_;
};

/// HTTP front end for a Coordinator.
class CoordinatorServer {
 public:
  explicit CoordinatorServer(Coordinator& coordinator);
  ~CoordinatorServer();

  CoordinatorServer(const CoordinatorServer&) = delete;
  CoordinatorServer& operator=(const CoordinatorServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  void listen();
  /// Serves on a background thread.
  void start();
  void stop();

 private:
  Coordinator& coordinator_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

/// Client side of the endpoints, as a site would use them.
class CoordinatorClient {
 public:
  CoordinatorClient(std::string host, int port);

  void register_site(const std::string& site_id, const std::vector<std::string>& feature_names);
  std::size_t commit_forest(const Forest& forest);
  Forest request_go_local(const std::string& site_id, AggregationMethod method,
                          std::uint64_t seed);

 private:
  std::string post(const std::string& path, const std::string& body);

  std::string host_;
  int port_;
};

/// Splits "HOST:PORT". Throws Error on a malformed address.
std::pair<std::string, int> parse_address(std::string_view address);

}  // namespace fedforest

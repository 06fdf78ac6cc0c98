#include "fedforest/coordinator.hpp"

#include <charconv>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "fedforest/exchange.hpp"

namespace fedforest {

using Json = nlohmann::json;

int CoordinatorError::http_status() const noexcept {
  switch (kind_) {
    case Kind::bad_request: return 400;
    case Kind::not_found: return 404;
    case Kind::conflict: return 409;
  }
  return 500;
}

// --- Coordinator -----------------------------------------------------------

void Coordinator::register_site(const std::string& site_id,
                                const std::vector<std::string>& feature_names) {
  if (site_id.empty())
    throw CoordinatorError(CoordinatorError::Kind::bad_request, "site id must not be empty");
  if (feature_names.empty())
    throw CoordinatorError(CoordinatorError::Kind::bad_request,
                           "site '" + site_id + "' registered no features");
  if (store_.is_registered(site_id))
    throw CoordinatorError(CoordinatorError::Kind::conflict,
                           "site '" + site_id + "' is already registered");
  try {
    store_.register_site(
        FeatureDictionary(site_id, {feature_names.begin(), feature_names.end()}));
  } catch (const FederationError& e) {
    // Lost a race with a concurrent registration of the same id.
    throw CoordinatorError(CoordinatorError::Kind::conflict, e.what());
  }
}

std::size_t Coordinator::commit_forest(std::string_view site_id,
                                       std::string_view forest_document) {
  if (!store_.is_registered(site_id))
    throw CoordinatorError(CoordinatorError::Kind::not_found,
                           "site '" + std::string(site_id) + "' is not registered");
  Forest forest = [&] {
    try {
      return deserialize_forest(forest_document);
    } catch (const Error& e) {
      throw CoordinatorError(CoordinatorError::Kind::bad_request, e.what());
    }
  }();
  if (forest.site_id() != site_id)
    throw CoordinatorError(CoordinatorError::Kind::bad_request,
                           "document belongs to site '" + forest.site_id() + "'");
  try {
    store_.commit(forest);
  } catch (const FederationError& e) {
    throw CoordinatorError(CoordinatorError::Kind::conflict, e.what());
  }
  return forest.size();
}

std::string Coordinator::request_go_local(std::string_view site_id, AggregationMethod method,
                                          std::uint64_t seed) const {
  const auto snap = store_.snapshot();
  const auto site = snap->sites.find(site_id);
  if (site == snap->sites.end())
    throw CoordinatorError(CoordinatorError::Kind::not_found,
                           "site '" + std::string(site_id) + "' is not registered");
  if (site->second.committed == 0)
    throw CoordinatorError(CoordinatorError::Kind::conflict,
                           "site '" + std::string(site_id) + "' has not committed a forest");

  std::vector<TreePtr> own;
  for (const auto& t : snap->trees)
    if (t->origin_site() == site_id) own.push_back(t);
  const Forest local(std::move(own), *site->second.params, std::string(site_id));
  return serialize_forest(
      build_go_local(*snap, local, site->second.dictionary, method, seed).forest);
}

std::vector<SiteSession> Coordinator::sessions() const {
  std::vector<SiteSession> out;
  for (const auto& [id, entry] : store_.snapshot()->sites)
    out.push_back({id, entry.dictionary, entry.committed});
  return out;
}

// --- HTTP server -------------------------------------------------------------

namespace {

void reply_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(Json{{"error", message}}.dump(), "application/json");
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const CoordinatorError& e) {
      reply_error(res, e.http_status(), e.what());
    } catch (const Json::exception& e) {
      reply_error(res, 400, std::string("malformed request: ") + e.what());
    } catch (const Error& e) {
      reply_error(res, 400, e.what());
    }
  };
}

}  // namespace

CoordinatorServer::CoordinatorServer(Coordinator& coordinator)
    : coordinator_(coordinator), server_(std::make_unique<httplib::Server>()) {
  server_->Post("/register", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const Json body = Json::parse(req.body);
    coordinator_.register_site(body.at("site_id").get<std::string>(),
                               body.at("features").get<std::vector<std::string>>());
    res.set_content(Json{{"status", "ok"}}.dump(), "application/json");
  }));
  server_->Post("/commit", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const Json body = Json::parse(req.body);
    const std::size_t n =
        coordinator_.commit_forest(body.at("site_id").get<std::string>(), req.body);
    res.set_content(Json{{"status", "ok"}, {"committed", n}}.dump(), "application/json");
  }));
  server_->Post("/request", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const Json body = Json::parse(req.body);
    const auto method = parse_aggregation_method(body.at("method").get<std::string>());
    const auto seed = body.value("seed", std::uint64_t{0});
    res.set_content(
        coordinator_.request_go_local(body.at("site_id").get<std::string>(), method, seed),
        "application/json");
  }));
  server_->Get("/sites", guarded([this](const httplib::Request&, httplib::Response& res) {
    Json out = Json::array();
    for (const auto& s : coordinator_.sessions())
      out.push_back({{"site_id", s.site_id},
                     {"features", s.dictionary.available},
                     {"committed", s.committed}});
    res.set_content(out.dump(), "application/json");
  }));
}

CoordinatorServer::~CoordinatorServer() { stop(); }

int CoordinatorServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void CoordinatorServer::listen() { server_->listen_after_bind(); }

void CoordinatorServer::start() {
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void CoordinatorServer::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

// --- Client ------------------------------------------------------------------

CoordinatorClient::CoordinatorClient(std::string host, int port)
    : host_(std::move(host)), port_(port) {}

std::string CoordinatorClient::post(const std::string& path, const std::string& body) {
  httplib::Client client(host_, port_);
  auto res = client.Post(path, body, "application/json");
  if (!res) throw Error("coordinator unreachable at " + host_ + ":" + std::to_string(port_));
  if (res->status != 200) {
    std::string message = res->body;
    try {
      message = Json::parse(res->body).at("error").get<std::string>();
    } catch (const Json::exception&) {
    }
    const auto kind = res->status == 404   ? CoordinatorError::Kind::not_found
                      : res->status == 409 ? CoordinatorError::Kind::conflict
                                           : CoordinatorError::Kind::bad_request;
    throw CoordinatorError(kind, message);
  }
  return res->body;
}

void CoordinatorClient::register_site(const std::string& site_id,
                                      const std::vector<std::string>& feature_names) {
  post("/register", Json{{"site_id", site_id}, {"features", feature_names}}.dump());
}

std::size_t CoordinatorClient::commit_forest(const Forest& forest) {
  return Json::parse(post("/commit", serialize_forest(forest))).at("committed").get<std::size_t>();
}

Forest CoordinatorClient::request_go_local(const std::string& site_id, AggregationMethod method,
                                           std::uint64_t seed) {
  return deserialize_forest(post(
      "/request",
      Json{{"site_id", site_id}, {"method", std::string(to_string(method))}, {"seed", seed}}.dump()));
}

std::pair<std::string, int> parse_address(std::string_view address) {
  const auto colon = address.rfind(':');
  if (colon == std::string_view::npos || colon == 0)
    throw Error("address must look like HOST:PORT, got '" + std::string(address) + "'");
  int port = -1;
  const auto digits = address.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || port < 0 || port > 65535)
    throw Error("invalid port in '" + std::string(address) + "'");
  return {std::string(address.substr(0, colon)), port};
}

}  // namespace fedforest

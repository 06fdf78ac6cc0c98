#include <doctest.h>

#include "fedforest/coordinator.hpp"
#include "fedforest/exchange.hpp"
#include "testing.hpp"

using namespace fedforest;

TEST_CASE("parse_address") {
  CHECK(parse_address("127.0.0.1:8080") == std::pair<std::string, int>{"127.0.0.1", 8080});
  CHECK(parse_address("localhost:0").second == 0);
  CHECK_THROWS_AS(parse_address("localhost"), Error);
  CHECK_THROWS_AS(parse_address(":80"), Error);
  CHECK_THROWS_AS(parse_address("h:99999"), Error);
  CHECK_THROWS_AS(parse_address("h:8x"), Error);
}

TEST_CASE("Coordinator error kinds") {
  Coordinator c;
  c.register_site("a", {"f0", "f1"});
  auto kind_of = [](auto&& fn) {
    try {
      fn();
    } catch (const CoordinatorError& e) {
      return e.http_status();
    }
    return 200;
  };
  CHECK(kind_of([&] { c.register_site("a", {"f0"}); }) == 409);
  CHECK(kind_of([&] { c.register_site("b", {}); }) == 400);
  CHECK(kind_of([&] { c.commit_forest("zz", "{}"); }) == 404);
  CHECK(kind_of([&] { c.commit_forest("a", "not json"); }) == 400);
  CHECK(kind_of([&] { (void)c.request_go_local("a", AggregationMethod::additive, 0); }) == 409);
  CHECK(kind_of([&] { (void)c.request_go_local("q", AggregationMethod::additive, 0); }) == 404);

  const Forest other = fit_forest(testing::random_dataset(1, 40, 2), ForestParams{3, true, {}}, 0, "b");
  CHECK(kind_of([&] { c.commit_forest("a", serialize_forest(other)); }) == 400);
  const Forest mine = fit_forest(testing::random_dataset(1, 40, 2), ForestParams{3, true, {}}, 0, "a");
  CHECK(c.commit_forest("a", serialize_forest(mine)) == 3);
  CHECK(kind_of([&] { c.commit_forest("a", serialize_forest(mine)); }) == 409);
  CHECK(c.sessions().at(0).committed == 3);
}

TEST_CASE("HTTP round trip through a live server") {
  Coordinator coordinator;
  CoordinatorServer server(coordinator);
  const int port = server.bind("127.0.0.1", 0);
  server.start();

  CoordinatorClient client("127.0.0.1", port);
  const Dataset d = testing::random_dataset(2, 80, 3);
  client.register_site("a", d.feature_names());
  CHECK_THROWS_AS(client.register_site("a", d.feature_names()), CoordinatorError);
  const Forest f = fit_forest(d, ForestParams{4, true, {}}, 1, "a");
  CHECK(client.commit_forest(f) == 4);
  const Forest go = client.request_go_local("a", AggregationMethod::additive, 0);
  REQUIRE(go.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(*go.trees()[i] == *f.trees()[i]);
  try {
    client.request_go_local("nobody", AggregationMethod::additive, 0);
    FAIL("expected an error");
  } catch (const CoordinatorError& e) {
    CHECK(e.kind() == CoordinatorError::Kind::not_found);
  }
  server.stop();
  CHECK_THROWS_AS(client.commit_forest(f), Error);
}

#include <doctest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "tvws/errors.hpp"
#include "tvws/net_model.hpp"
#include "tvws/network_io.hpp"
#include "tvws/numerics.hpp"

using namespace tvws;

namespace {

Network tiny_network(std::vector<double> lambdas, int num_channels = 2) {
  std::vector<AccessPoint> aps;
  for (std::size_t n = 0; n < lambdas.size(); ++n) {
    AccessPoint ap;
    ap.id = static_cast<int>(n);
    ap.x_m = 50.0 + 70.0 * static_cast<double>(n);
    ap.y_m = 40.0 + 30.0 * static_cast<double>(n % 3);
    ap.tx_power_w = 0.1;
    for (int c = 1; c <= num_channels; ++c) ap.channels.push_back(c);
    ap.active_prob = lambdas[n];
    ap.rx_distance_m = 20.0;
    aps.push_back(std::move(ap));
  }
  return Network(std::move(aps), num_channels, 6e6, dbm_to_watts(-100.0), 4.0);
}

}  // namespace

TEST_CASE("state_probability matches the product form") {
  Network net = tiny_network(std::vector<double>(8, 0.8));
  CHECK(state_probability(net, ActiveSet::full(8)) == doctest::Approx(std::pow(0.8, 8)).epsilon(1e-12));
  CHECK(state_probability(net, ActiveSet{}) == doctest::Approx(std::pow(0.2, 8)).epsilon(1e-12));

  // Heterogeneous case, cross-checked against an independent product.
  Network het = tiny_network({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8});
  const double expected = 0.1 * 0.2 * (1 - 0.3) * (1 - 0.4) * (1 - 0.5) * (1 - 0.6) * (1 - 0.7) * (1 - 0.8);
  CHECK(state_probability(het, ActiveSet{0, 1}) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(state_probability(het, ActiveSet{0, 1}) ==
        doctest::Approx(oracle::state_probability(het, {0, 1})).epsilon(1e-14));
}

TEST_CASE("state probabilities sum to one over all 2^N states") {
  for (int n_users : {4, 8, 12}) {
    std::vector<double> lambdas;
    for (int n = 0; n < n_users; ++n) lambdas.push_back(0.05 + 0.9 * (n + 1) / (n_users + 1.0));
    Network net = tiny_network(lambdas);
    KahanSum total;
    for (std::uint64_t bits = 0; bits < (1ULL << n_users); ++bits)
      total.add(state_probability(net, ActiveSet::from_bits(bits)));
    CHECK(std::abs(total.value() - 1.0) < 1e-12);
  }
}

TEST_CASE("generate_random_network is a pure function of its arguments") {
  const Network a = generate_random_network(8, 424242, {});
  const Network b = generate_random_network(8, 424242, {});
  REQUIRE(a.size() == b.size());
  for (int n = 0; n < a.size(); ++n) {
    CHECK(a.ap(n).x_m == b.ap(n).x_m);
    CHECK(a.ap(n).y_m == b.ap(n).y_m);
    CHECK(a.ap(n).tx_power_w == b.ap(n).tx_power_w);
    CHECK(a.ap(n).channels == b.ap(n).channels);
  }
  const Network c = generate_random_network(8, 424243, {});
  bool any_difference = false;
  for (int n = 0; n < a.size(); ++n)
    any_difference |= (a.ap(n).x_m != c.ap(n).x_m);
  CHECK(any_difference);
}

TEST_CASE("generated networks satisfy the documented ranges") {
  GenParams params;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Network net = generate_random_network(8, seed, params);
    for (int n = 0; n < net.size(); ++n) {
      const AccessPoint& ap = net.ap(n);
      CHECK(ap.x_m >= 0.0);
      CHECK(ap.x_m <= params.area_side_m);
      CHECK(ap.y_m >= 0.0);
      CHECK(ap.y_m <= params.area_side_m);
      CHECK(!ap.channels.empty());
      CHECK(ap.channels.front() >= 1);
      CHECK(ap.channels.back() <= params.num_channels);
      bool in_menu = false;
      for (double mw : params.power_menu_mw) in_menu |= (ap.tx_power_w == mw * 1e-3);
      CHECK(in_menu);
      CHECK(ap.active_prob == params.active_prob);
    }
  }
}

TEST_CASE("single-AP network has a trivial distance matrix") {
  const Network net = generate_random_network(1, 5, {});
  CHECK(net.size() == 1);
  CHECK(net.dist(0, 0) == 0.0);
}

TEST_CASE("generator rejects bad parameters") {
  CHECK_THROWS_AS(generate_random_network(0, 1, {}), ContractError);
  GenParams bad_theta;
  bad_theta.channel_avail_prob = 0.0;
  CHECK_THROWS_AS(generate_random_network(4, 1, bad_theta), ContractError);
  GenParams no_menu;
  no_menu.power_menu_mw.clear();
  CHECK_THROWS_AS(generate_random_network(4, 1, no_menu), ContractError);
}

TEST_CASE("network construction validates invariants") {
  auto make_aps = [] {
    std::vector<AccessPoint> aps(2);
    aps[0] = {0, 0.0, 0.0, 0.1, {1, 2}, 0.8, 20.0};
    aps[1] = {1, 100.0, 0.0, 0.1, {1}, 0.8, 20.0};
    return aps;
  };
  CHECK_NOTHROW(Network(make_aps(), 2, 6e6, 1e-13, 4.0));

  auto dup = make_aps();
  dup[0].channels = {1, 1};
  CHECK_THROWS_AS(Network(std::move(dup), 2, 6e6, 1e-13, 4.0), ContractError);

  auto out_of_range = make_aps();
  out_of_range[1].channels = {3};
  CHECK_THROWS_AS(Network(std::move(out_of_range), 2, 6e6, 1e-13, 4.0), ContractError);

  auto empty = make_aps();
  empty[1].channels.clear();
  CHECK_THROWS_AS(Network(std::move(empty), 2, 6e6, 1e-13, 4.0), ContractError);

  auto bad_lambda = make_aps();
  bad_lambda[0].active_prob = 0.0;
  CHECK_THROWS_AS(Network(std::move(bad_lambda), 2, 6e6, 1e-13, 4.0), ContractError);

  auto bad_power = make_aps();
  bad_power[0].tx_power_w = 0.0;
  CHECK_THROWS_AS(Network(std::move(bad_power), 2, 6e6, 1e-13, 4.0), ContractError);

  auto colocated = make_aps();
  colocated[1].x_m = 0.0;
  CHECK_THROWS_AS(Network(std::move(colocated), 2, 6e6, 1e-13, 4.0), ContractError);
}

TEST_CASE("distance matrix is symmetric and Euclidean") {
  const Network net = generate_random_network(10, 99, {});
  for (int i = 0; i < net.size(); ++i) {
    CHECK(net.dist(i, i) == 0.0);
    for (int j = 0; j < net.size(); ++j) {
      CHECK(net.dist(i, j) == net.dist(j, i));
      if (i != j) {
        CHECK(net.dist(i, j) > 0.0);
        CHECK(rel_close(net.dist(i, j), oracle::distance(net, i, j), 1e-9));
      }
    }
  }
}

TEST_CASE("sample_active_set honors degenerate and typical probabilities") {
  Network always = tiny_network({1.0, 1.0, 1.0});
  Rng rng(7);
  for (int k = 0; k < 50; ++k) CHECK(sample_active_set(always, rng) == ActiveSet::full(3));

  Network half = tiny_network(std::vector<double>(4, 0.5));
  Rng rng2(11);
  std::vector<int> hits(4, 0);
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) {
    const ActiveSet b = sample_active_set(half, rng2);
    for (int n = 0; n < 4; ++n)
      if (b.contains(n)) ++hits[static_cast<std::size_t>(n)];
  }
  for (int n = 0; n < 4; ++n)
    CHECK(std::abs(hits[static_cast<std::size_t>(n)] / double(draws) - 0.5) < 0.01);
}

TEST_CASE("empirical state frequencies match state_probability") {
  Network net = tiny_network({0.2, 0.5, 0.7, 0.9});
  Rng rng(1234);
  std::map<std::uint64_t, int> counts;
  const int draws = 1000000;
  for (int k = 0; k < draws; ++k) counts[sample_active_set(net, rng).bits()] += 1;
  double max_gap = 0.0;
  for (std::uint64_t bits = 0; bits < 16; ++bits) {
    const double expected = state_probability(net, ActiveSet::from_bits(bits));
    const double observed = counts[bits] / double(draws);
    max_gap = std::max(max_gap, std::abs(expected - observed));
  }
  CHECK(max_gap < 0.005);
}

TEST_CASE("fixture pins the published constants") {
  const Network net = fixture_fig2();
  REQUIRE(net.size() == 8);
  CHECK(net.num_channels() == 5);
  CHECK(net.bandwidth_hz() == 6e6);
  CHECK(net.pathloss_exp() == 4.0);
  CHECK(net.noise_watts() == dbm_to_watts(-100.0));
  CHECK(net.ap(0).channels == std::vector<int>{1, 2});
  CHECK(net.ap(0).tx_power_w == doctest::Approx(0.350).epsilon(1e-15));
  CHECK(net.ap(1).channels == std::vector<int>{2, 3, 4});
  CHECK(net.ap(2).channels == std::vector<int>{1, 3, 4});
  CHECK(net.ap(3).channels == std::vector<int>{3, 4});
  for (int n = 0; n < 8; ++n) {
    CHECK(net.ap(n).rx_distance_m == 20.0);
    CHECK(net.ap(n).active_prob == 0.8);
  }
}

TEST_CASE("fixture file and built-in fixture agree field by field") {
  const Network file = load_network(std::string(TVWS_SOURCE_DIR) + "/data/fig2_network.json");
  const Network code = fixture_fig2();
  REQUIRE(file.size() == code.size());
  CHECK(file.num_channels() == code.num_channels());
  CHECK(file.bandwidth_hz() == code.bandwidth_hz());
  CHECK(file.noise_watts() == code.noise_watts());
  CHECK(file.pathloss_exp() == code.pathloss_exp());
  for (int n = 0; n < code.size(); ++n) {
    CHECK(file.ap(n).x_m == code.ap(n).x_m);
    CHECK(file.ap(n).y_m == code.ap(n).y_m);
    CHECK(file.ap(n).tx_power_w == code.ap(n).tx_power_w);
    CHECK(file.ap(n).channels == code.ap(n).channels);
    CHECK(file.ap(n).active_prob == code.ap(n).active_prob);
    CHECK(file.ap(n).rx_distance_m == code.ap(n).rx_distance_m);
  }
}

TEST_CASE("network save/load round trip preserves values") {
  const Network net = generate_random_network(6, 31337, {});
  std::stringstream buf;
  write_network(net, buf);
  const Network back = parse_network(buf, "buffer");
  REQUIRE(back.size() == net.size());
  for (int n = 0; n < net.size(); ++n) {
    CHECK(back.ap(n).x_m == net.ap(n).x_m);
    CHECK(back.ap(n).channels == net.ap(n).channels);
    CHECK(rel_close(back.ap(n).tx_power_w, net.ap(n).tx_power_w, 1e-12));
  }
  CHECK(rel_close(back.noise_watts(), net.noise_watts(), 1e-12));
}

TEST_CASE("loader rejects malformed documents") {
  auto parse = [](const std::string& text) {
    std::stringstream in(text);
    return parse_network(in, "test");
  };
  CHECK_THROWS(parse("not json"));
  CHECK_THROWS(parse("{\"num_channels\": 2}"));
  // Duplicate AP id.
  CHECK_THROWS(parse(R"({"num_channels":2,"bandwidth_hz":6e6,"noise_dbm":-100,"pathloss_exp":4,
    "aps":[{"id":1,"x_m":0,"y_m":0,"power_mw":100,"channels":[1],"active_prob":0.8,"rx_distance_m":20},
           {"id":1,"x_m":9,"y_m":0,"power_mw":100,"channels":[1],"active_prob":0.8,"rx_distance_m":20}]})"));
}

TEST_CASE("with_active_prob replaces probabilities and nothing else") {
  const Network net = fixture_fig2();
  const Network half = with_active_prob(net, 0.5);
  for (int n = 0; n < net.size(); ++n) {
    CHECK(half.ap(n).active_prob == 0.5);
    CHECK(half.ap(n).x_m == net.ap(n).x_m);
  }
  CHECK_THROWS_AS(with_active_prob(net, std::vector<double>{0.5}), ContractError);
}

TEST_CASE("dbm conversion fixes -100 dBm at 1e-13 W") {
  CHECK(dbm_to_watts(-100.0) == doctest::Approx(1e-13).epsilon(1e-12));
  CHECK(watts_to_dbm(dbm_to_watts(-100.0)) == doctest::Approx(-100.0).epsilon(1e-12));
}

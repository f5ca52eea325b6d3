#include "normex/rng.hpp"

#include <vector>

#include "doctest.h"
#include "test_util.hpp"

using normex::RandomStream;
using normex::substream;

TEST_CASE("identical seed and stream reproduce the sequence") {
  RandomStream a(42, 7);
  RandomStream b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different streams do not collide") {
  RandomStream a(42, 7);
  RandomStream b(42, 8);
  int equal = 0;
  for (int i = 0; i < 100; ++i) {
    if (a.next_u64() == b.next_u64()) ++equal;
  }
  CHECK(equal == 0);
}

TEST_CASE("uniform stays strictly inside (0,1) with mean near 1/2") {
  RandomStream rng(1, 1);
  std::vector<double> xs(200000);
  for (double& x : xs) {
    x = rng.uniform();
    REQUIRE(x > 0.0);
    REQUIRE(x < 1.0);
  }
  const double m = testutil::mean(xs);
  CHECK(std::abs(m - 0.5) < 4.0 * testutil::standard_error(xs));
}

TEST_CASE("normal moments") {
  RandomStream rng(2, 1);
  std::vector<double> xs(200000);
  for (double& x : xs) x = rng.normal();
  CHECK(std::abs(testutil::mean(xs)) < 4.0 * testutil::standard_error(xs));
  CHECK(testutil::variance(xs) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("gamma moments for shapes above and below one") {
  for (double shape : {0.5, 1.0, 2.3, 7.0}) {
    RandomStream rng(3, static_cast<std::uint64_t>(shape * 100));
    std::vector<double> xs(200000);
    for (double& x : xs) x = rng.gamma(shape);
    const double se = testutil::standard_error(xs);
    CHECK(std::abs(testutil::mean(xs) - shape) < 4.5 * se);
    CHECK(testutil::variance(xs) == doctest::Approx(shape).epsilon(0.05));
  }
}

TEST_CASE("exponential mean") {
  RandomStream rng(4, 1);
  std::vector<double> xs(100000);
  for (double& x : xs) x = rng.exponential();
  CHECK(std::abs(testutil::mean(xs) - 1.0) < 4.0 * testutil::standard_error(xs));
}

TEST_CASE("uniform_index covers the range evenly") {
  RandomStream rng(5, 1);
  std::vector<int> counts(5, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) counts[rng.uniform_index(5)]++;
  for (int c : counts) {
    CHECK(std::abs(c - n / 5) < 4.0 * std::sqrt(n * 0.2 * 0.8));
  }
}

TEST_CASE("substreams with distinct tags separate") {
  CHECK(substream(1, 0) != substream(2, 0));
  CHECK(substream(1, 5) == substream(1, 5));
}

#include "rrsens/parallel.hpp"
#include "rrsens/rng.hpp"

#include <doctest.h>

#include <numeric>
#include <vector>

using namespace rrsens;

TEST_CASE("identical seeds give identical streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
}

TEST_CASE("stream(seed, index) separates replicates and salts") {
  Rng a = Rng::stream(7, 0);
  Rng b = Rng::stream(7, 1);
  Rng c = Rng::stream(7, 0, 99);
  CHECK(a.uniform() != b.uniform());
  CHECK(Rng::stream(7, 0).uniform() != c.uniform());
  CHECK(Rng::stream(7, 0).uniform() == Rng::stream(7, 0).uniform());
}

TEST_CASE("uniform_int stays in range and hits every value") {
  Rng rng(3);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 5000; ++i) {
    const auto v = rng.uniform_int(5);
    REQUIRE(v < 5);
    ++counts[v];
  }
  for (int c : counts) CHECK(c > 800);
}

TEST_CASE("normal moments are roughly right") {
  Rng rng(11);
  double sum = 0.0, sumsq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal(1.0, 2.0);
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
  CHECK(var == doctest::Approx(4.0).epsilon(0.03));
}

TEST_CASE("categorical follows the given simplex") {
  Rng rng(5);
  const double p[3] = {0.5, 0.3, 0.2};
  std::vector<int> counts(3, 0);
  for (int i = 0; i < 30000; ++i) ++counts[rng.categorical(p, 3)];
  CHECK(counts[0] / 30000.0 == doctest::Approx(0.5).epsilon(0.05));
  CHECK(counts[1] / 30000.0 == doctest::Approx(0.3).epsilon(0.05));
  CHECK(counts[2] / 30000.0 == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("parallel_for covers every job exactly once at any width") {
  for (int threads : {1, 2, 8}) {
    std::vector<int> hits(1000, 0);
    parallel_for(1000, threads, [&](int job) { hits[job] += 1; });
    CHECK(std::accumulate(hits.begin(), hits.end(), 0) == 1000);
  }
}

TEST_CASE("parallel_for rethrows a job exception") {
  CHECK_THROWS_AS(parallel_for(16, 4,
                               [](int job) {
                                 if (job == 7) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}

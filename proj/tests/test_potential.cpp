#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gxm/error.hpp"
#include "gxm/potential.hpp"
#include "oracles.hpp"

using namespace gxm;

namespace {

oracle::Table to_oracle(const Potential& p) {
  oracle::Table t;
  for (const auto& [w, v] : p.table()) t[oracle::IWord(w.begin(), w.end())] = v;
  return t;
}

Potential random_potential(const Shift& s, std::size_t k, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::map<Word, double> t;
  for (const Word& w : enumerate_words(s, k)) t[w] = u(rng);
  return Potential::from_table(s, k, t);
}

Potential lambda_potential(double lam) {
  std::vector<double> v{lam, -lam};
  return Potential::from_letters(Shift::full(2), v);
}

// phi(x) = sum_i x_i 2^-(i+1) on the full 2-shift with letters read as 0/1:
// on a depth-j cylinder the value lies in [s, s + 2^-j].
CylinderBoundedPotential binary_expansion(std::size_t cap) {
  return CylinderBoundedPotential::from_function(Shift::full(2), cap, [](std::span<const Letter> w) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::ldexp(1.0, -static_cast<int>(i + 1));
    return CylinderBounds{s, s + std::ldexp(1.0, -static_cast<int>(w.size()))};
  });
}

}  // namespace

TEST_CASE("table validation") {
  Shift g = Shift::golden_mean();
  std::map<Word, double> t{{{0, 0}, 0.1}, {{0, 1}, 0.5}};
  CHECK_THROWS_AS(Potential::from_table(g, 2, t), InputError);
  t[{1, 0}] = -0.25;
  CHECK_NOTHROW(Potential::from_table(g, 2, t));
  t[{1, 1}] = 1.0;
  CHECK_THROWS_AS(Potential::from_table(g, 2, t), InputError);
  std::map<Word, double> bad{{{0}, INFINITY}, {{1}, 0.0}};
  CHECK_THROWS_AS(Potential::from_table(g, 1, bad), InputError);
}

TEST_CASE("ergodic sum bounds") {
  Shift f2 = Shift::full(2);
  SumBounds b = ergodic_sum_bounds(f2, lambda_potential(1.0), Word{0, 1, 0});
  CHECK(b.inf == doctest::Approx(1.0));
  CHECK(b.sup == doctest::Approx(1.0));
  SumBounds z = ergodic_sum_bounds(Shift::golden_mean(), Potential::zero(Shift::golden_mean()), Word{0, 1, 0, 0});
  CHECK(z.inf == 0.0);
  CHECK(z.sup == 0.0);

  Shift g = Shift::golden_mean();
  Potential p = Potential::from_table(g, 2, {{{0, 0}, 0.1}, {{0, 1}, 0.5}, {{1, 0}, -0.25}});
  for (const Word& w : {Word{0, 1}, Word{1, 0}, Word{0, 0}, Word{1}, Word{0}}) {
    auto [lo, hi] = oracle::sum_bounds(g.incidence(), to_oracle(p), 2, oracle::IWord(w.begin(), w.end()));
    SumBounds sb = ergodic_sum_bounds(g, p, w);
    CHECK(sb.inf == doctest::Approx(lo).epsilon(1e-14));
    CHECK(sb.sup == doctest::Approx(hi).epsilon(1e-14));
  }
  SumBounds x = ergodic_sum_bounds(g, p, Word{1, 0});
  CHECK(x.inf == doctest::Approx(-0.15));
  CHECK(x.sup == doctest::Approx(0.25));
  CHECK_THROWS_AS(ergodic_sum_bounds(g, p, Word{1, 1}), InputError);
}

TEST_CASE("ergodic sum bounds match brute force for memory 3") {
  Shift s({{1, 1, 0}, {0, 1, 1}, {1, 1, 1}});
  Potential p = random_potential(s, 3, 7);
  auto t = to_oracle(p);
  for (std::size_t n = 1; n <= 6; ++n) {
    for (const Word& w : enumerate_words(s, n)) {
      auto [lo, hi] = oracle::sum_bounds(s.incidence(), t, 3, oracle::IWord(w.begin(), w.end()));
      SumBounds b = ergodic_sum_bounds(s, p, w);
      CHECK(b.inf == doctest::Approx(lo).epsilon(1e-13));
      CHECK(b.sup == doctest::Approx(hi).epsilon(1e-13));
    }
  }
}

TEST_CASE("normalization and pressure") {
  Normalization n = normalize(Shift::full(2), lambda_potential(1.0));
  CHECK(n.pressure == doctest::Approx(std::log(std::exp(1.0) + std::exp(-1.0))).epsilon(1e-13));

  for (std::size_t m : {1u, 2u, 3u, 5u}) {
    Normalization z = normalize(Shift::full(m), Potential::zero(Shift::full(m)));
    CHECK(z.pressure == doctest::Approx(std::log(double(m))).epsilon(1e-13));
    for (double h : z.eigenfunction.values) CHECK(h == doctest::Approx(1.0).epsilon(1e-13));
    for (double v : z.normalized.values()) CHECK(v == doctest::Approx(-std::log(double(m))).epsilon(1e-13));
  }

  Shift g = Shift::golden_mean();
  Normalization gm = normalize(g, Potential::zero(g));
  CHECK(gm.pressure == doctest::Approx(std::log((1.0 + std::sqrt(5.0)) / 2.0)).epsilon(1e-13));
  auto c24 = oracle::words(g.incidence(), 24).size();
  auto c25 = oracle::words(g.incidence(), 25).size();
  CHECK(gm.pressure == doctest::Approx(std::log(double(c25) / double(c24))).epsilon(1e-8));

  CHECK_THROWS_AS(normalize(Shift({{0, 1}, {1, 0}}), Potential::zero(Shift({{0, 1}, {1, 0}}))), PreconditionError);
}

TEST_CASE("normalized transfer matrix is stochastic") {
  Shift s({{1, 1, 0}, {0, 1, 1}, {1, 1, 1}});
  for (std::size_t k : {1u, 2u, 3u}) {
    Potential p = random_potential(s, k, 11 + k);
    Normalization n = normalize(s, p);
    TransferMatrix tm = transfer_matrix(s, n.normalized);
    for (std::size_t row = 0; row < tm.matrix.rows(); ++row) {
      double sum = 0.0;
      for (std::size_t col = 0; col < tm.matrix.cols(); ++col) sum += tm.matrix(row, col);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("pressure matches an independent Perron root") {
  Shift s({{1, 1, 0}, {0, 1, 1}, {1, 1, 1}});
  Potential p = random_potential(s, 2, 3);
  std::vector<std::vector<double>> m(3, std::vector<double>(3, 0.0));
  for (const auto& [w, v] : p.table()) m[w[0]][w[1]] = std::exp(v);
  CHECK(normalize(s, p).pressure == doctest::Approx(std::log(oracle::perron_root(m))).epsilon(1e-12));
}

TEST_CASE("approximants") {
  Shift f2 = Shift::full(2);
  Potential lam = lambda_potential(1.0);
  auto cb = CylinderBoundedPotential::from_potential(f2, lam, 4);
  Potential a1 = approximant(cb, 1);
  CHECK(a1.memory() == 1);
  for (Letter c : {0u, 1u}) CHECK(a1.value(Word{c}) == doctest::Approx(lam.value(Word{c})));

  Potential p3 = random_potential(Shift::golden_mean(), 2, 5);
  auto cb3 = CylinderBoundedPotential::from_potential(Shift::golden_mean(), p3, 5);
  for (std::size_t j = 2; j <= 5; ++j) {
    Potential aj = approximant(cb3, j);
    for (const auto& [w, v] : aj.table()) CHECK(v == doctest::Approx(p3.value(w)).epsilon(1e-15));
  }

  auto bin = binary_expansion(8);
  for (std::size_t j = 1; j <= 8; ++j) {
    Potential aj = approximant(bin, j);
    for (const auto& [w, v] : aj.table()) CHECK(v == bin.bounds(w).inf);
    CHECK(bin.variation(j) == doctest::Approx(std::ldexp(1.0, -static_cast<int>(j))));
    if (j > 1) CHECK(bin.variation(j) == doctest::Approx(bin.variation(j - 1) / 2.0));
  }
  CHECK_THROWS_AS(approximant(bin, 0), InputError);
  CHECK_THROWS_AS(approximant(bin, 9), InputError);
}

TEST_CASE("cylinder bounded potentials reject inconsistent bounds") {
  Shift f2 = Shift::full(2);
  CHECK_THROWS_AS(CylinderBoundedPotential::from_function(f2, 2, [](std::span<const Letter>) {
                    return CylinderBounds{1.0, 0.0};
                  }),
                  InputError);
  CHECK_THROWS_AS(CylinderBoundedPotential::from_function(f2, 2, [](std::span<const Letter> w) {
                    return w.size() == 1 ? CylinderBounds{0.0, 1.0} : CylinderBounds{0.5, 2.0};
                  }),
                  InputError);
  CHECK_THROWS_AS(CylinderBoundedPotential::from_function(f2, 1, [](std::span<const Letter>) {
                    return CylinderBounds{0.0, NAN};
                  }),
                  InputError);
}

TEST_CASE("distortion schedule") {
  auto bin = binary_expansion(10);
  double prev = INFINITY;
  for (std::size_t n = 1; n <= 30; ++n) CHECK(bin.distortion(n) >= 1.0);
  auto rates = bin.distortion_rates(30);
  for (std::size_t i = 5; i < rates.size(); ++i) {
    CHECK(rates[i] <= prev + 1e-15);
    prev = rates[i];
  }
  CHECK(bin.distortion(3) == doctest::Approx(std::exp(0.5 + 0.25 + 0.125)));
}

TEST_CASE("property: approximant ergodic sums increase with depth") {
  auto bin = binary_expansion(8);
  Shift f2 = Shift::full(2);
  for (std::size_t j = 1; j < 8; ++j) {
    Potential lo = approximant(bin, j);
    Potential hi = approximant(bin, j + 1);
    for (std::size_t n = 1; n <= 6; ++n) {
      for (const Word& w : enumerate_words(f2, n)) {
        SumBounds a = ergodic_sum_bounds(f2, lo, w);
        SumBounds b = ergodic_sum_bounds(f2, hi, w);
        CHECK(a.inf <= b.inf + 1e-15);
        CHECK(a.sup <= b.sup + 1e-15);
      }
    }
  }
}

TEST_CASE("property: normalizing twice gives pressure zero and constant h") {
  Shift s({{1, 1, 0}, {0, 1, 1}, {1, 1, 1}});
  for (unsigned seed = 1; seed <= 5; ++seed) {
    Potential p = random_potential(s, 1 + seed % 3, seed);
    Normalization once = normalize(s, p);
    Normalization twice = normalize(s, once.normalized);
    CHECK(std::fabs(twice.pressure) < 1e-10);
    for (double h : twice.eigenfunction.values) CHECK(h == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("property: coboundaries leave the pressure unchanged") {
  Shift s({{1, 1, 0}, {0, 1, 1}, {1, 1, 1}});
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (unsigned seed = 1; seed <= 5; ++seed) {
    Potential p = random_potential(s, 1 + seed % 3, seed + 100);
    std::vector<double> table{u(rng), u(rng), u(rng)};
    Potential q = add_coboundary(s, p, table);
    CHECK(normalize(s, q).pressure == doctest::Approx(normalize(s, p).pressure).epsilon(1e-10));
  }
}

TEST_CASE("property: sums over a concatenation lie within the summed bounds") {
  Shift g = Shift::golden_mean();
  const std::size_t k = 3;
  Potential p = random_potential(g, k, 9);
  for (std::size_t n = 2; n <= 8; ++n) {
    for (const Word& w : enumerate_words(g, n)) {
      for (std::size_t cut = 1; cut < n; ++cut) {
        Word w1(w.begin(), w.begin() + cut), w2(w.begin() + cut, w.end());
        SumBounds all = ergodic_sum_bounds(g, p, w);
        SumBounds a = ergodic_sum_bounds(g, p, w1);
        SumBounds b = ergodic_sum_bounds(g, p, w2);
        CHECK(all.inf >= a.inf + b.inf - 1e-12);
        CHECK(all.sup <= a.sup + b.sup + 1e-12);
      }
    }
  }
}

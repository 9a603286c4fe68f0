#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gxm/error.hpp"
#include "gxm/pressure.hpp"
#include "oracles.hpp"

using namespace gxm;

namespace {

Potential lambda_potential(double lam) {
  std::vector<double> v{lam, -lam};
  return Potential::from_letters(Shift::full(2), v);
}

Potential random_potential(const Shift& s, std::size_t k, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::map<Word, double> t;
  for (const Word& w : enumerate_words(s, k)) t[w] = u(rng);
  return Potential::from_table(s, k, t);
}

GroupExtension z_ext() { return GroupExtension(Shift::full(2), Group::free_abelian(1), {{1}, {-1}}); }

GroupExtension f2_ext() {
  Group f2 = Group::free(2);
  return GroupExtension(Shift::full(4), f2, {f2.parse("a"), f2.parse("A"), f2.parse("b"), f2.parse("B")});
}

const Shift kThree({{1, 1, 0}, {0, 1, 1}, {1, 1, 1}});

}  // namespace

TEST_CASE("base partition sums") {
  Shift f2 = Shift::full(2);
  Potential zero = Potential::zero(f2);
  CHECK(z_n(f2, zero, 0, 3) == doctest::Approx(4.0));
  CHECK(z_n(f2, zero, 0, 3, ZFlavor::FirstReturn) == doctest::Approx(1.0));
  for (std::size_t n = 1; n <= 12; ++n) CHECK(z_n(f2, zero, 0, n) == doctest::Approx(std::pow(2.0, n - 1.0)));
  Potential p = random_potential(kThree, 2, 1);
  for (Letter a = 0; a < 3; ++a) {
    double sup = -INFINITY;
    for (const auto& [w, v] : p.table())
      if (w[0] == a && kThree.allowed(w[1], a)) sup = std::max(sup, v);
    CHECK(z_n(kThree, p, a, 1) == doctest::Approx(std::exp(sup)).epsilon(1e-13));
  }
}

TEST_CASE("base pressure") {
  for (double lam : {0.0, 0.5, 1.0}) {
    PressureEstimate e = pressure_base(Shift::full(2), lambda_potential(lam));
    CHECK(std::fabs(e.value - std::log(std::exp(lam) + std::exp(-lam))) < 1e-12);
    CHECK(e.method == PressureMethod::ExactSpectral);
    CHECK(e.route == "matrix");
    CHECK(e.sequence.size() == 20);
  }
  CHECK(std::fabs(pressure_base(Shift::full(4), Potential::zero(Shift::full(4))).value - std::log(4.0)) < 1e-12);
  Shift g = Shift::golden_mean();
  PressureEstimate gm = pressure_base(g, Potential::zero(g), 40);
  CHECK(std::fabs(gm.value - std::log((1.0 + std::sqrt(5.0)) / 2.0)) < 1e-10);
  // Z_n(0, 1) counts words starting and ending next to letter 1: Fibonacci.
  for (const auto& [n, lz] : gm.sequence) {
    CHECK(std::exp(lz) == doctest::Approx(double(oracle::fibonacci(static_cast<int>(n) + 1))).epsilon(1e-12));
  }
  Shift cycle({{0, 1}, {1, 0}});
  CHECK_THROWS_AS(pressure_base(cycle, Potential::zero(cycle)), PreconditionError);
}

TEST_CASE("extension pressure on Z") {
  for (double lam : {0.0, 1.0}) {
    ExtensionPressureOptions o;
    o.n_max = 600;
    PressureEstimate e = pressure_extension(z_ext(), lambda_potential(lam), 0, o);
    CHECK(e.method == PressureMethod::SequenceExtrapolation);
    CHECK(std::fabs(e.value - std::log(2.0)) < 0.01);
    // Identity returns at letter + are the ballot-free counts C(n-1, n/2 - 1) for even n.
    for (const auto& [n, lz] : e.sequence) {
      int m = static_cast<int>(n);
      if (m > 30) break;
      CHECK(std::exp(lz) == doctest::Approx(oracle::binomial(m - 1, m / 2 - 1)).epsilon(1e-10));
    }
  }
}

TEST_CASE("extension pressure for the trivial group equals the base pressure") {
  Potential p = random_potential(kThree, 2, 3);
  GroupExtension t(kThree, Group::trivial(), {{0}, {0}, {0}});
  ExtensionPressureOptions o;
  o.n_max = 200;
  PressureEstimate e = pressure_extension(t, p, 0, o);
  PressureEstimate b = pressure_base(kThree, p);
  CHECK(std::fabs(e.value - b.value) <= e.error_bar + b.error_bar + 1e-6);
}

TEST_CASE("extension pressure on F2") {
  ExtensionPressureOptions o;
  o.n_max = 600;
  PressureEstimate radial = pressure_extension(f2_ext(), Potential::zero(Shift::full(4)), 0, o);
  CHECK(radial.route == "radial");
  CHECK(std::fabs(radial.value - std::log(2.0 * std::sqrt(3.0))) < 0.02);

  // Small n: identity returns at letter a are 4^(n-1) P(return) by enumeration.
  for (const auto& [n, lz] : radial.sequence) {
    int m = static_cast<int>(n);
    if (m > 10) break;
    double count = double(oracle::free_returns(2, m)) / 4.0;
    CHECK(std::exp(lz) == doctest::Approx(count).epsilon(1e-10));
  }

  ExtensionPressureOptions dp = o;
  dp.allow_radial = false;
  dp.n_max = 10;
  PressureEstimate generic = pressure_extension(f2_ext(), Potential::zero(Shift::full(4)), 0, dp);
  CHECK(generic.route == "dp");
  for (std::size_t i = 0; i < generic.sequence.size(); ++i) {
    CHECK(generic.sequence[i].first == radial.sequence[i].first);
    CHECK(generic.sequence[i].second == doctest::Approx(radial.sequence[i].second).epsilon(1e-12));
  }
}

TEST_CASE("extension pressure preconditions") {
  GroupExtension up(Shift::full(2), Group::free_abelian(1), {{1}, {1}});
  Potential zero = Potential::zero(Shift::full(2));
  CHECK_THROWS_AS(pressure_extension(up, zero, 0), PreconditionError);
  ExtensionPressureOptions o;
  o.override_probe = true;
  o.n_max = 50;
  CHECK_THROWS_AS(pressure_extension(up, zero, 0, o), PreconditionError);
}

TEST_CASE("exhaustion") {
  Potential zero = Potential::zero(Shift::full(4));
  ExtensionPressureOptions o;
  o.n_max = 400;
  ExhaustionReport rep = exhaustion_pressures(f2_ext(), zero, {{0, 1}, {0, 1, 2, 3}}, o);
  REQUIRE(rep.entries.size() == 2);
  for (const auto& e : rep.entries) {
    REQUIRE(e.base);
    REQUIRE(e.extension);
  }
  CHECK(std::fabs(rep.entries[0].base->value - std::log(2.0)) < 1e-12);
  // The {a, a^-1} sub-walk returns C(n, n/2) times: growth log 2.
  CHECK(std::fabs(rep.entries[0].extension->value - std::log(2.0)) < 0.01);
  CHECK(rep.monotone);
  PressureEstimate full_ext = pressure_extension(f2_ext(), zero, 0, o);
  CHECK(std::fabs(rep.entries[1].base->value - std::log(4.0)) < 1e-12);
  CHECK(std::fabs(rep.entries[1].extension->value - full_ext.value) < 1e-9);
}

TEST_CASE("exhaustion is monotone over three levels") {
  Shift s4 = Shift::full(4);
  std::vector<double> w{0.2, -0.1, 0.4, -0.3};
  Potential p = Potential::from_letters(s4, w);
  GroupExtension ext(s4, Group::free_abelian(2), {{1, 0}, {-1, 0}, {0, 1}, {0, -1}});
  ExtensionPressureOptions o;
  o.n_max = 200;
  ExhaustionReport rep = exhaustion_pressures(ext, p, {{0, 1}, {0, 1, 2}, {0, 1, 2, 3}}, o);
  REQUIRE(rep.entries.size() == 3);
  CHECK(rep.monotone);
  for (std::size_t k = 0; k < 3; ++k) {
    REQUIRE(rep.entries[k].base);
    REQUIRE(rep.entries[k].extension);
  }
  for (std::size_t k = 1; k < 3; ++k) {
    CHECK(rep.entries[k].base->value >= rep.entries[k - 1].base->value - 1e-12);
    CHECK(rep.entries[k].extension->value >= rep.entries[k - 1].extension->value -
                                                  rep.entries[k].extension->error_bar -
                                                  rep.entries[k - 1].extension->error_bar);
  }
  // Level two cannot use +y on the way back, so it sees only the x walk.
  CHECK(std::fabs(rep.entries[1].extension->value - rep.entries[0].extension->value) < 0.01);
  // Balanced +x/-x words weigh exp(0.1 n / 2) each: growth log 2 + 0.05.
  CHECK(std::fabs(rep.entries[0].extension->value - (std::log(2.0) + 0.05)) < 0.01);
}

TEST_CASE("property: base point independence") {
  Shift s4 = Shift::full(4);
  std::vector<double> w{0.2, -0.1, 0.4, -0.3};
  Potential p = Potential::from_letters(s4, w);
  ExtensionPressureOptions o;
  o.n_max = 120;
  GroupExtension ext(s4, Group::free_abelian(2), {{1, 0}, {-1, 0}, {0, 1}, {0, -1}});
  std::vector<PressureEstimate> est;
  for (Letter a = 0; a < 4; ++a) est.push_back(pressure_extension(ext, p, a, o));
  for (Letter a = 1; a < 4; ++a) {
    CHECK(std::fabs(est[a].value - est[0].value) <= est[a].error_bar + est[0].error_bar + 1e-3);
  }

  Potential q = random_potential(kThree, 2, 9);
  GroupExtension z3(kThree, Group::free_abelian(1), {{1}, {-1}, {1}});
  ExtensionPressureOptions o3;
  o3.n_max = 400;
  PressureEstimate e0 = pressure_extension(z3, q, 0, o3);
  PressureEstimate e1 = pressure_extension(z3, q, 1, o3);
  CHECK(std::fabs(e0.value - e1.value) <= e0.error_bar + e1.error_bar + 5e-3);
}

TEST_CASE("property: extension pressure never exceeds the base pressure") {
  std::vector<std::pair<GroupExtension, Potential>> cases = {
      {z_ext(), lambda_potential(0.7)},
      {f2_ext(), random_potential(Shift::full(4), 2, 4)},
      {GroupExtension(Shift::full(2), Group::symmetric3(), {{2}, {1}}), random_potential(Shift::full(2), 2, 5)},
      {GroupExtension(kThree, Group::cyclic(4), {{1}, {3}, {2}}), random_potential(kThree, 3, 6)}};
  for (const auto& [ext, p] : cases) {
    ExtensionPressureOptions o;
    o.n_max = ext.group().is_finite() ? 60 : 12;
    PressureEstimate e = pressure_extension(ext, p, 0, o);
    PressureEstimate b = pressure_base(ext.shift(), p);
    CHECK(e.value <= b.value + e.error_bar + b.error_bar + 1e-9);
  }
}

TEST_CASE("property: trivial group sums equal base sums") {
  Potential p = random_potential(kThree, 3, 8);
  GroupExtension t(kThree, Group::trivial(), {{0}, {0}, {0}});
  for (Letter a = 0; a < 3; ++a) {
    for (std::size_t n = 1; n <= 10; ++n) {
      double ext = partition_sum(t, p, n, {0}, WordConstraint::start_and_return(a)).value();
      CHECK(ext == doctest::Approx(z_n(kThree, p, a, n)).epsilon(1e-12));
    }
  }
}

TEST_CASE("property: first-return sums never exceed standard sums") {
  for (std::size_t k : {1u, 2u, 3u}) {
    Potential p = random_potential(kThree, k, 10 + k);
    for (Letter a = 0; a < 3; ++a) {
      for (std::size_t n = 1; n <= 10; ++n) {
        CHECK(z_n(kThree, p, a, n, ZFlavor::FirstReturn) <= z_n(kThree, p, a, n) * (1.0 + 1e-13));
      }
    }
  }
}

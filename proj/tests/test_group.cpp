#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gxm/error.hpp"
#include "gxm/group.hpp"
#include "gxm/parallel.hpp"
#include "gxm/radial.hpp"
#include "oracles.hpp"

using namespace gxm;

namespace {

std::vector<Group> sample_groups() {
  return {Group::trivial(), Group::cyclic(6), Group::symmetric3(), Group::free_abelian(1), Group::free_abelian(2),
          Group::free(2),   Group::free(3)};
}

Element random_element(const Group& g, std::mt19937& rng, int max_len = 4) {
  if (g.is_finite()) return {static_cast<std::int32_t>(std::uniform_int_distribution<std::size_t>(0, g.order() - 1)(rng))};
  Element x = g.identity();
  int len = std::uniform_int_distribution<int>(0, max_len)(rng);
  for (int i = 0; i < len; ++i) {
    std::size_t gen = std::uniform_int_distribution<std::size_t>(0, g.rank() - 1)(rng);
    x = g.mul(x, g.generator(gen, rng() & 1));
  }
  return x;
}

GroupMeasure random_measure(const Group& g, std::mt19937& rng, std::size_t size = 20) {
  GroupMeasure m;
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (std::size_t i = 0; i < size; ++i) m.add(random_element(g, rng), u(rng));
  return m;
}

void check_close(const GroupMeasure& a, const GroupMeasure& b, double tol) {
  for (const auto& [g, v] : a.masses) CHECK(std::fabs(v - b.at(g)) <= tol * std::max(1.0, std::fabs(v)));
  for (const auto& [g, v] : b.masses) CHECK(std::fabs(v - a.at(g)) <= tol * std::max(1.0, std::fabs(v)));
}

GroupMeasure srw_step(const Group& g) {
  GroupMeasure p;
  const double w = 1.0 / (2.0 * g.rank());
  for (std::size_t i = 0; i < g.rank(); ++i) {
    p.add(g.generator(i), w);
    p.add(g.generator(i, true), w);
  }
  return p;
}

}  // namespace

TEST_CASE("group law examples") {
  Group f2 = Group::free(2);
  Element a = f2.parse("a"), b = f2.parse("b");
  CHECK(f2.is_identity(f2.mul(a, f2.inv(a))));
  CHECK(f2.format(f2.mul(f2.parse("ab"), f2.parse("Ba"))) == "aa");
  CHECK(f2.mul(f2.mul(a, b), f2.mul(f2.inv(b), a)) == f2.parse("aa"));
  Group z2 = Group::free_abelian(2);
  CHECK(z2.mul(Element{1, 2}, Element{3, -2}) == Element{4, 0});
  CHECK(z2.format(Element{1, -2}) == "(1,-2)");
  CHECK(z2.parse("(1,-2)") == Element{1, -2});
}

TEST_CASE("balls") {
  CHECK(Group::free(2).ball(1).size() == 5);
  CHECK(Group::free(2).ball(2).size() == 17);
  CHECK(Group::free_abelian(1).ball(3).size() == 7);
  CHECK(Group::free_abelian(2).ball(2).size() == 13);
  CHECK(Group::symmetric3().ball(0).size() == 6);
  for (std::size_t r = 0; r <= 5; ++r) {
    CHECK(Group::free(2).ball(r).size() == static_cast<std::size_t>(2.0 * std::pow(3.0, double(r)) - 1.0 + 0.5));
  }
  CHECK_THROWS_AS(Group::free(3).ball(10, 1000), ResourceError);
}

TEST_CASE("finite groups") {
  Group s3 = Group::symmetric3();
  CHECK(s3.order() == 6);
  Element t1{2}, t2{1};
  CHECK(s3.mul(t1, t2) != s3.mul(t2, t1));
  CHECK(s3.is_identity(s3.mul(t1, t1)));
  CHECK(Group::finite_by_name("Z6").order() == 6);
  CHECK(Group::finite_by_name("trivial").order() == 1);
  CHECK_THROWS_AS(Group::finite_by_name("A5"), InputError);
  CHECK_THROWS_AS(Group::finite({{0, 1}, {0, 1}}), InputError);
  CHECK_NOTHROW(Group::finite({{1, 0}, {0, 1}}));
  CHECK_THROWS_AS(Group::finite({{0, 1}, {1, 1}}), InputError);
  // Latin square with identity 0 that is not associative.
  std::vector<std::vector<int>> loop = {{0, 1, 2, 3, 4}, {1, 0, 3, 4, 2}, {2, 4, 0, 1, 3}, {3, 2, 4, 0, 1},
                                        {4, 3, 1, 2, 0}};
  CHECK_THROWS_AS(Group::finite(loop), InputError);
  CHECK_THROWS_AS(s3.validate(Element{6}), InputError);
}

TEST_CASE("element validation") {
  Group f2 = Group::free(2);
  CHECK_THROWS_AS(f2.validate(Element{1, -1}), InputError);
  CHECK_THROWS_AS(f2.validate(Element{3}), InputError);
  CHECK_THROWS_AS(f2.parse("ac"), InputError);
  CHECK_THROWS_AS(Group::free_abelian(2).validate(Element{1}), InputError);
  CHECK(f2.parse("e") == f2.identity());
  CHECK(f2.parse("aA") == f2.identity());
}

TEST_CASE("convolution examples") {
  Group f2 = Group::free(2);
  GroupMeasure p = srw_step(f2);
  GroupMeasure d = convolve(f2, GroupMeasure::delta(f2.identity()), p);
  check_close(d, p, 0.0);
  CHECK(d.pruned_mass == 0.0);
  GroupMeasure pp = convolve(f2, p, p);
  CHECK(pp.at(f2.identity()) == doctest::Approx(0.25));
  CHECK(pp.masses.size() == 13);

  Group z = Group::free_abelian(1);
  GroupMeasure s;
  s.add({1}, 0.5);
  s.add({-1}, 0.5);
  GroupMeasure ss = convolve(z, s, s);
  CHECK(ss.at({-2}) == doctest::Approx(0.25));
  CHECK(ss.at({0}) == doctest::Approx(0.5));
  CHECK(ss.at({2}) == doctest::Approx(0.25));
  CHECK(ss.masses.size() == 3);
}

TEST_CASE("reflection examples") {
  Group f2 = Group::free(2);
  check_close(reflect(f2, srw_step(f2)), srw_step(f2), 0.0);
  Group z = Group::free_abelian(1);
  GroupMeasure b;
  b.add({1}, 0.7);
  b.add({-1}, 0.3);
  GroupMeasure r = reflect(z, b);
  CHECK(r.at({1}) == doctest::Approx(0.3));
  CHECK(r.at({-1}) == doctest::Approx(0.7));
}

TEST_CASE("pruning is accounted") {
  Group f2 = Group::free(2);
  GroupMeasure p = srw_step(f2);
  GroupMeasure q = p;
  for (int i = 0; i < 6; ++i) q = convolve(f2, q, p, 1e-4);
  CHECK(q.pruned_mass > 0.0);
  CHECK(q.total_mass() + q.pruned_mass == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& [g, v] : q.masses) CHECK(v >= 1e-4);
}

TEST_CASE("convolution is deterministic across thread budgets") {
  Group f2 = Group::free(2);
  std::mt19937 rng(3);
  GroupMeasure mu = random_measure(f2, rng, 200), nu = random_measure(f2, rng, 200);
  set_thread_budget(1);
  GroupMeasure a = convolve(f2, mu, nu);
  set_thread_budget(4);
  GroupMeasure b = convolve(f2, mu, nu);
  set_thread_budget(1);
  check_close(a, b, 1e-13);
}

TEST_CASE("property: group axioms") {
  std::mt19937 rng(1);
  for (const Group& g : sample_groups()) {
    for (int trial = 0; trial < 200; ++trial) {
      Element x = random_element(g, rng), y = random_element(g, rng), z = random_element(g, rng);
      CHECK(g.mul(g.mul(x, y), z) == g.mul(x, g.mul(y, z)));
      CHECK(g.mul(x, g.identity()) == x);
      CHECK(g.mul(g.identity(), x) == x);
      CHECK(g.is_identity(g.mul(x, g.inv(x))));
      CHECK(g.is_identity(g.mul(g.inv(x), x)));
      CHECK_NOTHROW(g.validate(g.mul(x, y)));
    }
  }
}

TEST_CASE("property: free reduction agrees with the string oracle") {
  Group f2 = Group::free(2);
  std::mt19937 rng(8);
  const std::string letters = "aAbB";
  for (int trial = 0; trial < 500; ++trial) {
    std::string w;
    int len = std::uniform_int_distribution<int>(0, 10)(rng);
    Element x = f2.identity();
    for (int i = 0; i < len; ++i) {
      char c = letters[rng() % 4];
      w.push_back(c);
      x = f2.mul(x, f2.parse(std::string(1, c)));
    }
    std::string reduced = oracle::reduce_free(w);
    CHECK(f2.format(x) == (reduced.empty() ? "e" : reduced));
    CHECK(f2.word_length(x) == reduced.size());
  }
}

TEST_CASE("property: encoding round trips on balls") {
  for (const Group& g : sample_groups()) {
    for (const Element& x : g.ball(3)) CHECK(g.parse(g.format(x)) == x);
  }
}

TEST_CASE("property: convolution algebra") {
  std::mt19937 rng(2);
  for (const Group& g : sample_groups()) {
    for (int trial = 0; trial < 5; ++trial) {
      GroupMeasure a = random_measure(g, rng), b = random_measure(g, rng), c = random_measure(g, rng);
      check_close(convolve(g, convolve(g, a, b), c), convolve(g, a, convolve(g, b, c)), 1e-12);
      CHECK(convolve(g, a, b).total_mass() == doctest::Approx(a.total_mass() * b.total_mass()).epsilon(1e-12));
      check_close(reflect(g, convolve(g, a, b)), convolve(g, reflect(g, b), reflect(g, a)), 1e-13);
      check_close(reflect(g, reflect(g, a)), a, 0.0);
    }
  }
}

TEST_CASE("property: pruned convolution conserves total plus pruned mass") {
  std::mt19937 rng(4);
  for (const Group& g : sample_groups()) {
    GroupMeasure a = random_measure(g, rng, 30), b = random_measure(g, rng, 30);
    double exact = a.total_mass() * b.total_mass();
    GroupMeasure c = convolve(g, a, b, 0.05);
    CHECK(c.total_mass() + c.pruned_mass == doctest::Approx(exact).epsilon(1e-12));
    GroupMeasure d = convolve(g, c, a, 0.05);
    CHECK(d.total_mass() + d.pruned_mass == doctest::Approx(exact * a.total_mass()).epsilon(1e-12));
  }
}

TEST_CASE("radial measures match explicit convolution on free groups") {
  for (std::size_t rank : {2u, 3u}) {
    Group g = Group::free(rank);
    RadialMeasure step = radial_step(rank);
    GroupMeasure p = srw_step(g);
    GroupMeasure q = p;
    RadialMeasure rq = step;
    for (int n = 2; n <= 6; ++n) {
      q = convolve(g, q, p);
      rq = radial_convolve(rq, step);
      check_close(to_group_measure(g, rq), q, 1e-12);
    }
    check_close(to_group_measure(g, radial_power(step, 6)), q, 1e-12);
  }
  CHECK(sphere_size(2, 0) == 1.0);
  CHECK(sphere_size(2, 3) == 36.0);
}

TEST_CASE("return probabilities of the simple random walk") {
  auto logs = srw_return_logs(2, 1, 12);
  for (int n = 1; n <= 12; ++n) {
    double brute = double(oracle::free_returns(2, n)) / std::pow(4.0, n);
    if (brute == 0.0) {
      CHECK(std::isinf(logs[n - 1]));
    } else {
      CHECK(std::exp(logs[n - 1]) == doctest::Approx(brute).epsilon(1e-12));
    }
  }
  CHECK(oracle::free_returns(2, 4) == 28);

  // Long strides against the long double distance chain and the radial route.
  auto strided = srw_return_logs(2, 6, 20);
  auto radial = radial_return_logs(radial_power(radial_step(2), 6), 20);
  for (int j = 1; j <= 20; ++j) {
    double ref = std::log(static_cast<double>(oracle::free_return_probability(2, 6 * j)));
    CHECK(strided[j - 1] == doctest::Approx(ref).epsilon(1e-10));
    CHECK(radial[j - 1] == doctest::Approx(ref).epsilon(1e-10));
  }

  // Kesten: the return rate tends to log(2 sqrt(3) / 4) per step.
  auto far = srw_return_logs(2, 2, 2000);
  double rate = (far[1999] - far[999]) / 2000.0;
  CHECK(rate == doctest::Approx(std::log(std::sqrt(3.0) / 2.0)).epsilon(1e-3));
}

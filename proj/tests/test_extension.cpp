#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gxm/error.hpp"
#include "gxm/extension.hpp"
#include "gxm/parallel.hpp"
#include "oracles.hpp"

using namespace gxm;

namespace {

Potential random_potential(const Shift& s, std::size_t k, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::map<Word, double> t;
  for (const Word& w : enumerate_words(s, k)) t[w] = u(rng);
  return Potential::from_table(s, k, t);
}

oracle::Table to_oracle(const Potential& p) {
  oracle::Table t;
  for (const auto& [w, v] : p.table()) t[oracle::IWord(w.begin(), w.end())] = v;
  return t;
}

GroupExtension z_ext() { return GroupExtension(Shift::full(2), Group::free_abelian(1), {{1}, {-1}}); }

GroupExtension f2_ext() {
  Group f2 = Group::free(2);
  return GroupExtension(Shift::full(4), f2, {f2.parse("a"), f2.parse("A"), f2.parse("b"), f2.parse("B")});
}

const Shift kThree({{1, 1, 0}, {0, 1, 1}, {1, 1, 1}});

// kThree onto F2 with letters a, A, b; the oracle reduces strings.
GroupExtension three_f2() {
  Group f2 = Group::free(2);
  return GroupExtension(kThree, f2, {f2.parse("a"), f2.parse("A"), f2.parse("b")});
}
const std::string kThreeLetters = "aAb";

std::string oracle_image(const oracle::IWord& w) {
  std::string s;
  for (int c : w) s.push_back(kThreeLetters[c]);
  std::string r = oracle::reduce_free(s);
  return r.empty() ? "e" : r;
}

}  // namespace

TEST_CASE("psi on words") {
  GroupExtension z = z_ext();
  CHECK(psi_word(z, Word{0, 1}) == Element{0});
  CHECK(psi_word(z, Word{1}) == Element{-1});
  GroupExtension f = f2_ext();
  CHECK(psi_word(f, Word{0, 2, 3}) == f.group().parse("a"));
  CHECK_THROWS_AS(psi_word(f, Word{}), InputError);
  CHECK_THROWS_AS(GroupExtension(Shift::full(2), Group::free_abelian(1), {{1}}), InputError);
  CHECK_THROWS_AS(GroupExtension(Shift::full(2), Group::free(2), {{1, -1}, {2}}), InputError);
}

TEST_CASE("free generator bijection") {
  CHECK(f2_ext().is_free_generator_bijection());
  Group f2 = Group::free(2);
  CHECK_FALSE(GroupExtension(Shift::full(4), f2, {f2.parse("a"), f2.parse("a"), f2.parse("b"), f2.parse("B")})
                  .is_free_generator_bijection());
  CHECK_FALSE(three_f2().is_free_generator_bijection());
  CHECK_FALSE(z_ext().is_free_generator_bijection());
  GroupExtension sub = f2_ext().restrict_to(Word{0, 1});
  CHECK(sub.shift().size() == 2);
  CHECK(sub.psi(1) == f2.parse("A"));
}

TEST_CASE("partition sum examples") {
  GroupExtension z = z_ext();
  Potential zero = Potential::zero(Shift::full(2));
  CHECK(partition_sum(z, zero, 2, {0}, WordConstraint::none()).value() == doctest::Approx(2.0));
  CHECK(partition_sum(z, zero, 4, {0}, WordConstraint::start_and_return(0)).value() == doctest::Approx(3.0));
  CHECK(partition_sum(z, zero, 3, {0}, WordConstraint::none()).value() == 0.0);
  CHECK(partition_sum(z, zero, 3, {1}, WordConstraint::none()).value() == doctest::Approx(3.0));

  Group triv = Group::trivial();
  Potential p = random_potential(kThree, 2, 1);
  GroupExtension t(kThree, triv, {{0}, {0}, {0}});
  for (std::size_t n = 1; n <= 8; ++n) {
    for (Letter a = 0; a < 3; ++a) {
      double base = 0.0;
      for (const auto& w : oracle::words(kThree.incidence(), n)) {
        oracle::IWord wa = w;
        wa.push_back(static_cast<int>(a));
        if (w[0] != static_cast<int>(a) || !oracle::admissible(kThree.incidence(), wa)) continue;
        base += std::exp(oracle::sum_bounds(kThree.incidence(), to_oracle(p), 2, w).second);
      }
      CHECK(partition_sum(t, p, n, {0}, WordConstraint::start_and_return(a)).value() ==
            doctest::Approx(base).epsilon(1e-12));
    }
  }
}

TEST_CASE("partition sums match brute force on a memory-3 potential") {
  GroupExtension ext = three_f2();
  Potential p = random_potential(kThree, 3, 13);
  auto t = to_oracle(p);
  Group f2 = ext.group();
  for (std::size_t n = 1; n <= 7; ++n) {
    std::map<std::string, double> sup_all, inf_all, sup_start, sup_return, sup_first;
    for (const auto& w : oracle::words(kThree.incidence(), n)) {
      auto [lo, hi] = oracle::sum_bounds(kThree.incidence(), t, 3, w);
      std::string g = oracle_image(w);
      sup_all[g] += std::exp(hi);
      inf_all[g] += std::exp(lo);
      if (w[0] != 1) continue;
      sup_start[g] += std::exp(hi);
      oracle::IWord wa = w;
      wa.push_back(1);
      if (oracle::admissible(kThree.incidence(), wa)) {
        sup_return[g] += std::exp(hi);
        bool first = std::find(w.begin() + 1, w.end(), 1) == w.end();
        if (first) sup_first[g] += std::exp(hi);
      }
    }
    PartitionOptions inf;
    inf.bound = Bound::Inf;
    for (const auto& [g, v] : sup_all) {
      Element e = f2.parse(g);
      CHECK(partition_sum(ext, p, n, e, WordConstraint::none()).value() == doctest::Approx(v).epsilon(1e-12));
      CHECK(partition_sum(ext, p, n, e, WordConstraint::none(), inf).value() ==
            doctest::Approx(inf_all[g]).epsilon(1e-12));
      CHECK(partition_sum(ext, p, n, e, WordConstraint::start(1)).value() ==
            doctest::Approx(sup_start[g]).epsilon(1e-12));
      CHECK(partition_sum(ext, p, n, e, WordConstraint::start_and_return(1)).value() ==
            doctest::Approx(sup_return[g]).epsilon(1e-12));
      CHECK(partition_sum(ext, p, n, e, WordConstraint::start_and_return(1, true)).value() ==
            doctest::Approx(sup_first[g]).epsilon(1e-12));
    }
    auto seq = partition_sum_sequence(ext, p, 7, f2.identity(), WordConstraint::start_and_return(1));
    CHECK(seq[n - 1].value() == doctest::Approx(sup_return["e"]).epsilon(1e-12));
  }
}

TEST_CASE("step distribution examples") {
  GroupExtension z = z_ext();
  RpfData r = rpf_solve(Shift::full(2), Potential::zero(Shift::full(2)));
  GroupMeasure p1 = step_distribution(z, r, 1);
  CHECK(p1.at({1}) == doctest::Approx(0.5));
  CHECK(p1.at({-1}) == doctest::Approx(0.5));
  GroupMeasure p2 = step_distribution(z, r, 2);
  CHECK(p2.at({-2}) == doctest::Approx(0.25));
  CHECK(p2.at({0}) == doctest::Approx(0.5));
  CHECK(p2.at({2}) == doctest::Approx(0.25));
  for (int n = 1; n <= 12; ++n) {
    GroupMeasure pn = step_distribution(z, r, n);
    for (int k = 0; k <= n; ++k) {
      CHECK(pn.at({2 * k - n}) == doctest::Approx(oracle::binomial(n, k) / std::pow(2.0, n)).epsilon(1e-12));
    }
  }

  GroupExtension f = f2_ext();
  RpfData r4 = rpf_solve(Shift::full(4), Potential::zero(Shift::full(4)));
  GroupMeasure q = step_distribution(f, r4, 2);
  CHECK(q.at(f.group().identity()) == doctest::Approx(0.25));
  CHECK(q.masses.size() == 13);
  for (const auto& [g, v] : q.masses) {
    if (!f.group().is_identity(g)) {
      CHECK(f.group().word_length(g) == 2);
      CHECK(v == doctest::Approx(1.0 / 16.0));
    }
  }
}

TEST_CASE("irreducibility probe") {
  ProbeResult z = irreducibility_probe(z_ext(), 8);
  CHECK(z.status == ProbeResult::Status::Proven);
  CHECK(z.radius == 4);
  ProbeResult f = irreducibility_probe(f2_ext(), 6);
  CHECK(f.status == ProbeResult::Status::Proven);
  CHECK(f.radius == 3);
  GroupExtension up(Shift::full(2), Group::free_abelian(1), {{1}, {1}});
  for (std::size_t cap : {2u, 4u, 8u, 12u}) {
    ProbeResult u = irreducibility_probe(up, cap);
    CHECK(u.status == ProbeResult::Status::Unknown);
    CHECK_FALSE(u.first_missing.empty());
  }
  GroupExtension s3(Shift::full(2), Group::symmetric3(), {{2}, {1}});
  CHECK(irreducibility_probe(s3, 8).status == ProbeResult::Status::Proven);
}

TEST_CASE("partition tables are deterministic across thread budgets") {
  GroupExtension f = f2_ext();
  Potential p = random_potential(Shift::full(4), 2, 3);
  set_thread_budget(1);
  auto a = partition_tables(f, p, 7);
  set_thread_budget(4);
  auto b = partition_tables(f, p, 7);
  set_thread_budget(1);
  REQUIRE(a.size() == b.size());
  for (std::size_t n = 0; n < a.size(); ++n) {
    REQUIRE(a[n].size() == b[n].size());
    for (const auto& [g, v] : a[n]) CHECK(std::fabs(v - b[n].at(g)) <= 1e-12 * std::max(1.0, std::fabs(v)));
  }
}

TEST_CASE("property: homomorphism law") {
  GroupExtension f = f2_ext();
  const Group& g = f.group();
  for (std::size_t n = 2; n <= 8; ++n) {
    for (const Word& w : enumerate_words(f.shift(), n)) {
      for (std::size_t cut = 1; cut < n; ++cut) {
        std::span<const Letter> all(w);
        CHECK(psi_word(f, all) == g.mul(psi_word(f, all.first(cut)), psi_word(f, all.subspan(cut))));
      }
    }
  }
  GroupExtension t = three_f2();
  for (std::size_t n = 1; n <= 8; ++n) {
    for (const Word& w : enumerate_words(kThree, n)) {
      CHECK(t.group().format(psi_word(t, w)) == oracle_image(oracle::IWord(w.begin(), w.end())));
    }
  }
}

TEST_CASE("property: fibre sums add up to the base sum") {
  std::vector<std::pair<GroupExtension, Potential>> cases = {
      {three_f2(), random_potential(kThree, 3, 5)},
      {GroupExtension(Shift::golden_mean(), Group::free_abelian(1), {{1}, {-1}}),
       random_potential(Shift::golden_mean(), 2, 6)},
      {GroupExtension(Shift::full(2), Group::symmetric3(), {{2}, {1}}), random_potential(Shift::full(2), 3, 7)}};
  for (const auto& [ext, p] : cases) {
    auto tables = partition_tables(ext, p, 8);
    for (std::size_t n = 1; n <= 8; ++n) {
      double fibres = 0.0;
      for (const auto& [g, lv] : tables[n - 1]) fibres += std::exp(lv);
      double base = 0.0;
      for (const Word& w : enumerate_words(ext.shift(), n)) base += std::exp(ergodic_sum_bounds(ext.shift(), p, w).sup);
      CHECK(fibres == doctest::Approx(base).epsilon(1e-12));
    }
  }
}

TEST_CASE("property: step distributions are convolution powers for Bernoulli measures") {
  std::vector<double> weights{0.3, -0.2, 0.5, -0.1};
  Shift s4 = Shift::full(4);
  Potential p = Potential::from_letters(s4, weights);
  RpfData r = rpf_solve(s4, p);
  for (const GroupExtension& ext :
       {f2_ext(), GroupExtension(s4, Group::free_abelian(2), {{1, 0}, {-1, 0}, {0, 1}, {0, -1}}),
        GroupExtension(s4, Group::cyclic(6), {{1}, {5}, {2}, {4}})}) {
    auto steps = step_distributions(ext, r, 7);
    GroupMeasure power = steps[0];
    for (std::size_t n = 2; n <= 7; ++n) {
      power = convolve(ext.group(), power, steps[0]);
      for (const auto& [g, v] : power.masses) CHECK(std::fabs(v - steps[n - 1].at(g)) < 1e-10);
      for (const auto& [g, v] : steps[n - 1].masses) CHECK(std::fabs(v - power.at(g)) < 1e-10);
    }
  }
}

TEST_CASE("property: pruning only removes mass and accounts for it") {
  GroupExtension f = f2_ext();
  Potential p = random_potential(Shift::full(4), 2, 17);
  for (std::size_t n = 1; n <= 6; ++n) {
    PartitionSum exact = partition_sum(f, p, n, f.group().identity(), WordConstraint::start_and_return(0));
    for (double eps : {1e-3, 1e-2, 1e-1}) {
      PartitionOptions o;
      o.prune_eps = eps;
      PartitionSum pr = partition_sum(f, p, n, f.group().identity(), WordConstraint::start_and_return(0), o);
      CHECK(pr.value() <= exact.value() * (1.0 + 1e-12));
      CHECK(exact.value() - pr.value() <= pr.pruned() * (1.0 + 1e-9) + 1e-300);
    }
  }
}

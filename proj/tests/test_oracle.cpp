#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "tables.hpp"
#include "twomed/closed_form.hpp"
#include "twomed/oracle.hpp"

using namespace twomed;
using namespace testsupport;

namespace {

ReferenceConfig binary_cfg(Topology t) {
  ReferenceConfig cfg;
  cfg.a = 1;
  cfg.a_star = 0;
  cfg.m1_star = 0;
  cfg.m2_star = 0;
  cfg.topology = t;
  return cfg;
}

tables::YTable random_y(std::mt19937_64& rng) {
  tables::YTable y{};
  for (auto& p : y)
    for (auto& r : p)
      for (auto& v : r) v = std::round(uniform(rng, -5, 5));
  return y;
}

auto binary_potentials(const tables::YTable& y, int m1_0, int m1_1,
                       std::array<std::array<int, 2>, 2> m2) {
  return make_potentials([=](double a) { return a == 1.0 ? double(m1_1) : double(m1_0); },
                         [=](double a, double m1) { return double(m2[int(a)][int(m1)]); },
                         [=](double a, double m1, double m2v) { return y[int(a)][int(m1)][int(m2v)]; });
}

}  // namespace

TEST_CASE("sequential binary individual from hand enumeration") {
  tables::YTable y{};
  for (int a = 0; a < 2; ++a)
    for (int m1 = 0; m1 < 2; ++m1)
      for (int m2 = 0; m2 < 2; ++m2) y[a][m1][m2] = a + m1 + m2 + a * m1 * m2;
  const auto p = binary_potentials(y, 0, 1, {{{0, 0}, {0, 1}}});
  const auto cs = individual_components_sequential(p, binary_cfg(Topology::Sequential));
  const std::array<double, 9> expected = {1, 0, 0, 0, 0, 1, 1, 1, 0};
  for (std::size_t i = 0; i < 9; ++i) CHECK(cs.values()[i] == expected[i]);
  CHECK(cs[AggregateName::Te] == 4.0);
}

TEST_CASE("sequential contrasts match the binary table for every response type") {
  std::mt19937_64 rng(11);
  const auto cfg = binary_cfg(Topology::Sequential);
  for (int rep = 0; rep < 20; ++rep) {
    const auto y = random_y(rng);
    for (int types = 0; types < 64; ++types) {
      tables::SeqType t{types & 1, (types >> 1) & 1, {{(types >> 2) & 1, (types >> 3) & 1},
                                                      {(types >> 4) & 1, (types >> 5) & 1}}};
      const auto p = binary_potentials(
          y, t.m1_0, t.m1_1, {{{t.m2[0][0], t.m2[0][1]}, {t.m2[1][0], t.m2[1][1]}}});
      const auto cs = individual_components_sequential(p, cfg);
      const auto row = tables::table_sequential(y, t);
      CHECK(cs[ComponentName::Cde] == row.cde);
      CHECK(cs[ComponentName::IntRefAM1] == row.int_ref_am1);
      CHECK(cs[ComponentName::IntRefAM2PlusAM1M2] == row.int_ref_combined);
      CHECK(cs[ComponentName::NatIntAM1] == row.natint_am1);
      CHECK(cs[ComponentName::NatIntAM2] == row.natint_am2);
      CHECK(cs[ComponentName::NatIntAM1M2] == row.natint_am1m2);
      CHECK(cs[ComponentName::NatIntM1M2] == row.natint_m1m2);
      CHECK(cs[ComponentName::PieM1] == row.pie_m1);
      CHECK(cs[ComponentName::PieM2] == row.pie_m2);
      CHECK(total_from_components(cs) == cs[AggregateName::Te]);
    }
  }
}

TEST_CASE("non-sequential contrasts match the binary table for every response type") {
  std::mt19937_64 rng(12);
  const auto cfg = binary_cfg(Topology::NonSequential);
  for (int rep = 0; rep < 20; ++rep) {
    const auto y = random_y(rng);
    for (int types = 0; types < 16; ++types) {
      tables::NonSeqType t{types & 1, (types >> 1) & 1, (types >> 2) & 1, (types >> 3) & 1};
      const auto p = binary_potentials(y, t.m1_0, t.m1_1, {{{t.m2_0, t.m2_0}, {t.m2_1, t.m2_1}}});
      const auto cs = individual_components_nonsequential(p, cfg);
      const auto row = tables::table_nonsequential(y, t);
      CHECK(cs[ComponentName::Cde] == row.cde);
      CHECK(cs[ComponentName::IntRefAM1] == row.int_ref_am1);
      CHECK(cs[ComponentName::IntRefAM2] == row.int_ref_am2);
      CHECK(cs[ComponentName::IntRefAM1M2] == row.int_ref_am1m2);
      CHECK(cs[ComponentName::NatIntAM1] == row.natint_am1);
      CHECK(cs[ComponentName::NatIntAM2] == row.natint_am2);
      CHECK(cs[ComponentName::NatIntAM1M2] == row.natint_am1m2);
      CHECK(cs[ComponentName::NatIntM1M2] == row.natint_m1m2);
      CHECK(cs[ComponentName::PieM1] == row.pie_m1);
      CHECK(cs[ComponentName::PieM2] == row.pie_m2);
      CHECK(total_from_components(cs) == cs[AggregateName::Te]);
    }
  }
}

TEST_CASE("degenerate contrasts") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    auto scm = random_linear_scm(rng, 2);
    auto cfg = random_config(rng, 2, Topology::Sequential);
    cfg.a_star = cfg.a;
    const auto p = linear_individual(scm, cfg, 0.3, -0.2, 0.1);
    const auto cs = individual_components_sequential(p, cfg);
    for (double v : cs.values()) CHECK(v == 0.0);
    CHECK(cs[AggregateName::Te] == 0.0);
  }
}

TEST_CASE("additive outcome has no interaction components") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    auto scm = random_linear_scm(rng, 1);
    scm.theta[4] = scm.theta[5] = scm.theta[6] = scm.theta[7] = 0.0;
    auto cfg = random_config(rng, 1, Topology::Sequential);
    const auto cs = individual_components_sequential(linear_individual(scm, cfg, 0.5, 0.1, 0), cfg);
    for (auto c : {ComponentName::IntRefAM1, ComponentName::IntRefAM2PlusAM1M2,
                   ComponentName::NatIntAM1, ComponentName::NatIntAM2, ComponentName::NatIntAM1M2})
      CHECK(std::abs(cs[c]) <= 1e-12);
    // M2 still responds to M1 differently at a and a*, so the joint mediated
    // term survives through the M2 -> Y main effect.
    const double d = cfg.a - cfg.a_star;
    CHECK(cs[ComponentName::NatIntM1M2] ==
          doctest::Approx(scm.theta[3] * scm.beta[3] * scm.gamma[1] * d * d).epsilon(1e-12));
  }
}

TEST_CASE("non-sequential evaluator rejects an M1 -> M2 dependence") {
  auto cfg = binary_cfg(Topology::NonSequential);
  tables::YTable y{};
  const auto p = binary_potentials(y, 0, 1, {{{0, 1}, {0, 1}}});
  CHECK_THROWS_AS(individual_components_nonsequential(p, cfg), DomainError);
  CHECK_THROWS_AS(individual_components_sequential(p, cfg), DomainError);
}

TEST_CASE("exposure that does not move M1 leaves no M1 pathway") {
  std::mt19937_64 rng(5);
  auto cfg = binary_cfg(Topology::NonSequential);
  for (int rep = 0; rep < 20; ++rep) {
    const auto y = random_y(rng);
    for (int m1 = 0; m1 < 2; ++m1) {
      const auto p = binary_potentials(y, m1, m1, {{{0, 0}, {1, 1}}});
      const auto cs = individual_components_nonsequential(p, cfg);
      CHECK(cs[ComponentName::NatIntAM1] == 0.0);
      CHECK(cs[ComponentName::NatIntAM1M2] == 0.0);
      CHECK(cs[ComponentName::NatIntM1M2] == 0.0);
      CHECK(cs[ComponentName::PieM1] == 0.0);
    }
  }
}

TEST_CASE("single-mediator four-way decomposition") {
  ReferenceConfig cfg;
  cfg.a = 1;
  cfg.a_star = 0;
  cfg.m1_star = 0;
  SingleMediatorPotentials<std::function<double(double)>, std::function<double(double, double)>>
      p{[](double a) { return a; }, [](double a, double m) { return a + m + a * m; }};
  const auto r = single_mediator_four_way(p, cfg);
  CHECK(r.cde == 1.0);
  CHECK(r.int_ref == 0.0);
  CHECK(r.int_med == 1.0);
  CHECK(r.pie == 1.0);
  CHECK(r.te == 3.0);
  CHECK(r.nde + r.nie == r.te);
  CHECK(r.cde + r.int_ref + r.int_med + r.pie == r.te);

  cfg.a_star = 1;
  const auto z = single_mediator_four_way(p, cfg);
  CHECK(z.te == 0.0);
  CHECK(z.cde == 0.0);
  CHECK(z.int_med == 0.0);
}

TEST_CASE("reference level at the natural level removes the reference interaction") {
  ReferenceConfig cfg;
  cfg.a = 1;
  cfg.a_star = 0;
  cfg.m1_star = 1;
  SingleMediatorPotentials<std::function<double(double)>, std::function<double(double, double)>>
      p{[](double a) { return 1.0 - a; }, [](double a, double m) { return 2 * a * m - m + a; }};
  CHECK(single_mediator_four_way(p, cfg).int_ref == 0.0);
}

TEST_CASE("binary enumeration matches the latent-uniform construction") {
  std::mt19937_64 rng(21);
  for (auto topo : {Topology::Sequential, Topology::NonSequential}) {
    for (int rep = 0; rep < 100; ++rep) {
      const auto scm = random_binary_scm(rng, topo);
      auto cfg = binary_cfg(topo);
      cfg.a = rep % 2;
      cfg.a_star = 1 - cfg.a;
      cfg.m1_star = (rep / 2) % 2;
      cfg.m2_star = (rep / 4) % 2;
      const auto e = enumerate_binary_components(scm, cfg);
      const auto l = latent_enumeration_components(scm, cfg);
      for (std::size_t k = 0; k < e.size(); ++k)
        CHECK(std::abs(e.values()[k] - l.values()[k]) <= 1e-12);
      for (auto a : kAggregateNames) CHECK(std::abs(e[a] - l[a]) <= 1e-12);
      CHECK(sum_identity_holds(e, 1e-12));
    }
  }
}

TEST_CASE("binary enumeration vanishing cases") {
  std::mt19937_64 rng(22);
  for (int rep = 0; rep < 20; ++rep) {
    auto scm = random_binary_scm(rng, Topology::Sequential);
    scm.p_m1_given_a[1] = scm.p_m1_given_a[0];
    scm.p_m2_given_a_m1[1] = scm.p_m2_given_a_m1[0];
    const auto cs = enumerate_binary_components(scm, binary_cfg(Topology::Sequential));
    for (auto c : {ComponentName::NatIntAM1, ComponentName::NatIntAM2, ComponentName::NatIntAM1M2,
                   ComponentName::NatIntM1M2, ComponentName::PieM1, ComponentName::PieM2})
      CHECK(std::abs(cs[c]) <= 1e-15);

    auto add = random_binary_scm(rng, Topology::Sequential);
    const double ya = uniform(rng, -1, 1), y1 = uniform(rng, -1, 1), y2 = uniform(rng, -1, 1);
    for (int a = 0; a < 2; ++a)
      for (int m1 = 0; m1 < 2; ++m1)
        for (int m2 = 0; m2 < 2; ++m2) add.e_y[a][m1][m2] = ya * a + y1 * m1 + y2 * m2;
    const auto ca = enumerate_binary_components(add, binary_cfg(Topology::Sequential));
    for (auto c : {ComponentName::IntRefAM1, ComponentName::IntRefAM2PlusAM1M2,
                   ComponentName::NatIntAM1, ComponentName::NatIntAM2, ComponentName::NatIntAM1M2})
      CHECK(std::abs(ca[c]) <= 1e-14);
    // Joint mediation survives additivity when Pr(M2|a,m1) has an a x m1 interaction.
    const auto& q = add.p_m2_given_a_m1;
    const double dm1 = add.p_m1_given_a[1] - add.p_m1_given_a[0];
    CHECK(ca[ComponentName::NatIntM1M2] ==
          doctest::Approx(y2 * dm1 * (q[1][1] - q[1][0] - q[0][1] + q[0][0])).epsilon(1e-12));
  }
}

TEST_CASE("binary model validation") {
  BinaryScm s;
  s.p_m1_given_a = {0.2, 1.2};
  CHECK_THROWS_AS(s.validate(), DomainError);
  s.p_m1_given_a = {0.2, 0.4};
  s.p_m2_given_a_m1 = {{{0.1, 0.2}, {0.3, 0.3}}};
  s.topology = Topology::NonSequential;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s.topology = Topology::Sequential;
  CHECK_NOTHROW(s.validate());
  ReferenceConfig cfg;
  cfg.m1_star = 0.5;
  CHECK_THROWS_AS(enumerate_binary_components(s, cfg), DomainError);
}

TEST_CASE("Monte Carlo simulation is reproducible and thread-count independent") {
  std::mt19937_64 rng(31);
  const auto scm = random_linear_scm(rng, 2);
  const auto cfg = random_config(rng, 2, Topology::Sequential);
  const auto r1 = simulate_linear_components(scm, cfg, 5000, 99, 1);
  const auto r2 = simulate_linear_components(scm, cfg, 5000, 99, 4);
  const auto r3 = simulate_linear_components(scm, cfg, 5000, 99);
  for (std::size_t k = 0; k < 9; ++k) {
    CHECK(r1.estimate.values()[k] == r2.estimate.values()[k]);
    CHECK(r1.estimate.values()[k] == r3.estimate.values()[k]);
    CHECK(r1.std_error[k] == r2.std_error[k]);
  }
  const auto other = simulate_linear_components(scm, cfg, 5000, 100);
  CHECK(other.estimate.values()[7] != r1.estimate.values()[7]);
  CHECK_THROWS_AS(simulate_linear_components(scm, cfg, 0, 1), DomainError);
}

TEST_CASE("Monte Carlo per-individual sum identity") {
  std::mt19937_64 rng(32);
  for (auto topo : {Topology::Sequential, Topology::NonSequential}) {
    const auto scm = random_linear_scm(rng, 1, topo == Topology::Sequential);
    const auto cfg = random_config(rng, 1, topo);
    const auto r = simulate_linear_components(scm, cfg, 20000, 5);
    CHECK(sum_identity_holds(r.estimate, 1e-10));
  }
}

TEST_CASE("Monte Carlo agrees with the exact quadrature average") {
  std::mt19937_64 rng(33);
  for (auto topo : {Topology::Sequential, Topology::NonSequential}) {
    for (int rep = 0; rep < 3; ++rep) {
      const auto scm = random_linear_scm(rng, 2, topo == Topology::Sequential);
      const auto cfg = random_config(rng, 2, topo);
      const auto mc = simulate_linear_components(scm, cfg, 200000, 1000 + rep);
      const auto exact = quadrature_components(scm, cfg);
      for (std::size_t k = 0; k < exact.size(); ++k)
        CHECK(std::abs(mc.estimate.values()[k] - exact.values()[k]) <=
              4.5 * mc.std_error[k] + 1e-12);
    }
  }
}

TEST_CASE("Monte Carlo interaction-free and M1-free models") {
  std::mt19937_64 rng(34);
  auto scm = random_linear_scm(rng, 0);
  scm.theta[4] = scm.theta[5] = scm.theta[6] = scm.theta[7] = 0.0;
  const auto cfg = random_config(rng, 0, Topology::Sequential);
  const auto r = simulate_linear_components(scm, cfg, 100000, 8);
  for (auto c : {ComponentName::IntRefAM1, ComponentName::IntRefAM2PlusAM1M2,
                 ComponentName::NatIntAM1, ComponentName::NatIntAM2, ComponentName::NatIntAM1M2})
    CHECK(std::abs(r.estimate[c]) <= 3.0 * r.std_error_of(c) + 1e-12);

  auto flat = random_linear_scm(rng, 0);
  flat.gamma[1] = 0.0;
  const auto f = simulate_linear_components(flat, cfg, 100000, 9);
  for (auto c : {ComponentName::NatIntAM1, ComponentName::NatIntAM1M2, ComponentName::NatIntM1M2,
                 ComponentName::PieM1})
    CHECK(std::abs(f.estimate[c]) <= 3.0 * f.std_error_of(c) + 1e-12);
}

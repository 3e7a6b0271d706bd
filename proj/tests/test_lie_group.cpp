#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "mapgroups/errors.hpp"
#include "mapgroups/lie_group.hpp"
#include "mapgroups/numerics.hpp"

using namespace mapgroups;
using Catch::Matchers::WithinAbs;

namespace {

std::shared_ptr<const Atlas> circle() { return std::make_shared<const Atlas>(Atlas::circle_two_charts()); }
std::shared_ptr<const Atlas> torus() { return std::make_shared<const Atlas>(Atlas::torus_four_charts()); }

// Algebra-valued section with node sup-norm exactly `radius`.
Section algebra_section(const std::shared_ptr<const Atlas>& a, std::uint64_t seed, std::int64_t idx, double radius) {
  auto f = std::make_shared<const BandlimitedField>(random_decaying_field(a->dim(), 4, 3, seed, idx, 2.0));
  const auto s = Section::from_function(a, 3, [f](std::span<const double> p, std::span<double> o) { f->evaluate(p, o); });
  return s * (radius / sup_norm(s));
}

double vec_diff(std::span<const double> a, std::span<const double> b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

TEST_CASE("group catalogue") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (const char* name : {"SO3", "SU2", "UT2"}) {
    const auto g = make_group(name);
    const double zero[] = {0, 0, 0};
    CHECK((g->exp(zero) - g->identity()).cwiseAbs().maxCoeff() == 0.0);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> v{nd(rng), nd(rng), nd(rng)};
      const double r = std::min(g->q_radius() - 0.1, 3.0) * std::uniform_real_distribution<double>(0, 1)(rng);
      const double n = g->algebra_norm(v);
      for (double& x : v) x *= r / n;
      CHECK(vec_diff(g->log(g->exp(v)), v) < 1e-9);
      const auto e = g->exp(v);
      CHECK(g->relation_defect(e) < 1e-13);
      // Ad_g = g·(·)·g⁻¹ on the basis.
      for (int i = 0; i < 3; ++i) {
        std::vector<double> ei(3, 0.0);
        ei[i] = 1;
        const Eigen::MatrixXd conj = e * g->basis()[i] * e.inverse();
        CHECK((g->hat(g->adjoint(e, ei)) - conj).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
  CHECK_THROWS_AS(make_group("SL2"), InputError);
}

TEST_CASE("so(3) classical facts") {
  const auto g = make_group("SO3");
  const double lx[] = {1, 0, 0}, ly[] = {0, 1, 0};
  const auto br = g->bracket(lx, ly);
  CHECK(br == std::vector<double>{0, 0, 1});
  const Eigen::MatrixXd comm = g->basis()[0] * g->basis()[1] - g->basis()[1] * g->basis()[0];
  CHECK(comm == g->basis()[2]);

  const double quarter[] = {0, 0, std::numbers::pi / 2};
  Eigen::Matrix3d rz;
  rz << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK((g->exp(quarter) - rz).cwiseAbs().maxCoeff() < 1e-15);

  const double half_turn[] = {std::numbers::pi, 0, 0};
  CHECK_THROWS_AS(g->log(g->exp(half_turn)), ChartDomainError);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 50; ++trial) {
    const double w[] = {nd(rng), nd(rng), nd(rng)};
    const double v[] = {nd(rng), nd(rng), nd(rng)};
    const Eigen::MatrixXd r = g->exp(w);
    const auto ad = g->adjoint(r, v);
    const Eigen::Vector3d rv = r * Eigen::Vector3d(v[0], v[1], v[2]);
    CHECK(vec_diff(ad, std::vector<double>{rv(0), rv(1), rv(2)}) < 1e-12);
    CHECK_THAT(g->algebra_norm(ad), WithinAbs(g->algebra_norm(v), 1e-12));
  }

  const auto su = make_group("SU2");
  CHECK(vec_diff(su->bracket(lx, ly), std::vector<double>{0, 0, 1}) < 1e-15);
  const auto ut = make_group("UT2");
  const double b1[] = {1, 0, 0}, b3[] = {0, 0, 1};
  CHECK(ut->bracket(b1, b3) == std::vector<double>{0, 0, 1});
}

TEST_CASE("group axioms nodewise") {
  for (const char* name : {"SO3", "SU2", "UT2"}) {
    const auto grp = make_group(name);
    for (const auto& a : {circle(), torus()}) {
      const auto e = GroupSection::identity(a, grp);
      for (int trial = 0; trial < 5; ++trial) {
        const auto g1 = exp_section(algebra_section(a, 1, 3 * trial, 1.0), grp);
        const auto g2 = exp_section(algebra_section(a, 1, 3 * trial + 1, 1.0), grp);
        const auto g3 = exp_section(algebra_section(a, 1, 3 * trial + 2, 1.0), grp);
        CHECK(max_difference(group_multiply(g1, e), g1) < 1e-12);
        CHECK(max_difference(group_multiply(g1, group_invert(g1)), e) < 1e-12);
        CHECK(max_difference(group_multiply(group_multiply(g1, g2), g3), group_multiply(g1, group_multiply(g2, g3))) <
              1e-12);
        CHECK(group_multiply(g1, g2).compatibility_defect() < 1e-9);

        // Point evaluation is a homomorphism at nodes.
        const auto prod = group_multiply(g1, g2);
        const auto p = a->chart(0).from_chart(a->chart(0).witness_domain().node(trial));
        CHECK(group_point_eval(prod, p) == group_point_eval(g1, p) * group_point_eval(g2, p));
      }
    }
  }
}

TEST_CASE("exp and log sections") {
  const auto a = circle();
  const auto grp = make_group("SO3");
  const auto zero = Section::zero(a, 3);
  CHECK(max_difference(exp_section(zero, grp), GroupSection::identity(a, grp)) == 0.0);
  CHECK(sup_norm(log_section(GroupSection::identity(a, grp))) == 0.0);

  const double quarter[] = {0, 0, std::numbers::pi / 2};
  const auto rot = exp_section(Section::constant(a, quarter), grp);
  Eigen::Matrix3d rz;
  rz << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  for (const auto& chart : rot.values())
    for (const auto& m : chart) CHECK((m - rz).cwiseAbs().maxCoeff() < 1e-15);

  for (int trial = 0; trial < 10; ++trial) {
    const auto xi = algebra_section(a, 2, trial, 1.0);
    const auto lhs = exp_section(xi * 0.6, grp);
    const auto rhs = group_multiply(exp_section(xi * 0.3, grp), exp_section(xi * 0.3, grp));
    CHECK(max_difference(lhs, rhs) < 1e-10);

    const auto big = algebra_section(a, 3, trial, grp->q_radius() - 0.2);
    CHECK(max_node_difference(log_section(exp_section(big, grp)), big) < 1e-9);
    const auto g = exp_section(big, grp);
    CHECK(max_difference(exp_section(log_section(g), grp), g) < 1e-9);

    // exp(V)·exp(V) stays in the log chart.
    const auto u1 = exp_section(algebra_section(a, 4, 2 * trial, grp->v_radius()), grp);
    const auto u2 = exp_section(algebra_section(a, 4, 2 * trial + 1, grp->v_radius()), grp);
    CHECK_NOTHROW(log_section(group_multiply(u1, u2)));
  }

  const double pi_x[] = {std::numbers::pi, 0, 0};
  try {
    (void)log_section(exp_section(Section::constant(a, pi_x), grp));
    FAIL("expected ChartDomainError");
  } catch (const ChartDomainError& e) {
    CHECK(std::string(e.what()).find("chart 0 node 0") != std::string::npos);
  }
}

TEST_CASE("adjoint operator and conjugation identity") {
  for (const char* name : {"SO3", "SU2", "UT2"}) {
    const auto grp = make_group(name);
    const auto a = torus();
    const auto e = GroupSection::identity(a, grp);
    const auto eta0 = algebra_section(a, 5, 0, 1.0);
    CHECK(max_node_difference(adjoint_operator(e, eta0), eta0) < 1e-15);
    for (int trial = 0; trial < 5; ++trial) {
      const auto g = exp_section(algebra_section(a, 6, trial, 1.5), grp);
      const auto eta = algebra_section(a, 7, trial, 1.0);
      const auto lhs = group_multiply(group_multiply(g, exp_section(eta, grp)), group_invert(g));
      const auto rhs = exp_section(adjoint_operator(g, eta), grp);
      CHECK(max_difference(lhs, rhs) < 1e-10);
      const auto zeta = algebra_section(a, 8, trial, 1.0);
      const auto lin = adjoint_operator(g, linear_combination(2.0, eta, -3.0, zeta));
      const auto sep = linear_combination(2.0, adjoint_operator(g, eta), -3.0, adjoint_operator(g, zeta));
      CHECK(max_node_difference(lin, sep) < 1e-12);
    }
  }
}

TEST_CASE("pointwise bracket") {
  const auto a = circle();
  const auto grp = make_group("SO3");
  const auto x = algebra_section(a, 9, 0, 1.0), y = algebra_section(a, 9, 1, 1.0), z = algebra_section(a, 9, 2, 1.0);
  CHECK(sup_norm(bracket(x, x, *grp)) == 0.0);
  CHECK(max_node_difference(bracket(x, y, *grp), bracket(y, x, *grp) * -1.0) < 1e-15);
  const auto jac = bracket(x, bracket(y, z, *grp), *grp) + bracket(y, bracket(z, x, *grp), *grp) +
                   bracket(z, bracket(x, y, *grp), *grp);
  CHECK(sup_norm(jac) < 1e-12);
  CHECK(max_node_difference(bracket(x * 2.0 + y, z, *grp), bracket(x, z, *grp) * 2.0 + bracket(y, z, *grp)) < 1e-12);

  const double lxv[] = {1, 0, 0}, lyv[] = {0, 1, 0};
  const auto b = bracket(Section::constant(a, lxv), Section::constant(a, lyv), *grp);
  for (const auto& piece : b.pieces())
    for (std::size_t k = 0; k < piece.size(); ++k) CHECK(piece.value(k)[2] == 1.0);

  for (const char* name : {"SO3", "SU2", "UT2"}) {
    const auto g = make_group(name);
    const auto extracted = bch_bracket(x, y, g, 1e-3);
    CHECK(max_node_difference(extracted, bracket(x, y, *g)) < 1e-6);
  }
}

TEST_CASE("BCH order-2 probe") {
  const auto a = circle();
  const auto grp = make_group("SO3");
  const double ts[] = {1e-1, 3e-2, 1e-2};
  const auto probe = bch_order2_probe(algebra_section(a, 10, 0, 1.0), algebra_section(a, 10, 1, 1.0), grp, ts);
  CHECK(probe.slope >= 2.9);

  const auto z1 = Section::from_function(a, 3, [](auto p, auto o) { o[0] = 0; o[1] = 0; o[2] = std::sin(p[0]); });
  const auto z2 = Section::from_function(a, 3, [](auto p, auto o) { o[0] = 0; o[1] = 0; o[2] = std::cos(p[0]); });
  for (double r : bch_order2_probe(z1, z2, grp, ts).errors) CHECK(r < 1e-15);
  for (double r : bch_order2_probe(Section::zero(a, 3), z2, grp, ts).errors) CHECK(r < 1e-15);

  const double big[] = {2.0, 0, 0};
  const double huge[] = {std::numbers::pi / 4};  // total rotation angle π
  CHECK_THROWS_AS(bch_order2_probe(Section::constant(a, big), Section::constant(a, big), grp, huge), ChartDomainError);
}

TEST_CASE("group section invariants and logged projection") {
  const auto a = circle();
  const auto grp = make_group("SO3");
  auto values = GroupSection::identity(a, grp).values();
  values[0][3](0, 1) = 1e-3;
  CHECK_THROWS_AS(GroupSection(a, grp, values), InputError);

  auto drift = GroupSection::identity(a, grp).values();
  drift[1][2](0, 0) += 3e-11;
  drift[0][2](0, 0) += 3e-11;
  // Chart 0 node 2 and chart 1 node 2 are not the same manifold point; loosen compatibility.
  const GroupSection g(a, grp, drift, 1e-9);
  const auto fixed = normalize(g);
  CHECK(fixed.projection_log().size() == 2);
  CHECK(fixed.max_relation_defect() < 1e-15);
  CHECK(normalize(fixed).projection_log().size() == 2);

  auto off = GroupSection::identity(a, grp).values();
  const double w[] = {0, 0, 0.5};
  off[0][0] = grp->exp(w);
  CHECK_THROWS_AS(GroupSection(a, grp, off), IncompatibilityError);
}

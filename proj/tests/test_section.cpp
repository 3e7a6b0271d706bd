#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "mapgroups/errors.hpp"
#include "mapgroups/numerics.hpp"
#include "mapgroups/probes.hpp"
#include "mapgroups/section.hpp"

using namespace mapgroups;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::shared_ptr<const Atlas> circle() { return std::make_shared<const Atlas>(Atlas::circle_two_charts()); }
std::shared_ptr<const Atlas> torus() { return std::make_shared<const Atlas>(Atlas::torus_four_charts()); }

// Global band-limited function on the manifold, read through each chart.
Section random_section(const std::shared_ptr<const Atlas>& a, int n, std::uint64_t seed, std::int64_t idx) {
  auto f = std::make_shared<const BandlimitedField>(random_decaying_field(a->dim(), 5, n, seed, idx, 2.0));
  return Section::from_function(a, n, [f](std::span<const double> p, std::span<double> out) { f->evaluate(p, out); });
}

// Oracle for f(θ, y) = y·cos θ on S¹ with γ = sin.
Section sine_section(const std::shared_ptr<const Atlas>& a) {
  return Section::from_function(a, 1, [](std::span<const double> p, std::span<double> out) { out[0] = std::sin(p[0]); });
}

}  // namespace

TEST_CASE("theta_embed of zero and constant sections") {
  for (const auto& a : {circle(), torus()}) {
    for (const auto& piece : theta_embed(Section::zero(a, 2))) CHECK(piece.max_abs() == 0.0);
    const double c[] = {1.5, -2.0};
    const auto pieces = theta_embed(Section::constant(a, c));
    REQUIRE(pieces.size() == a->size());
    for (const auto& piece : pieces)
      for (std::size_t i = 0; i < piece.size(); ++i) {
        CHECK(piece.value(i)[0] == 1.5);
        CHECK(piece.value(i)[1] == -2.0);
      }
    CHECK(compatibility_defect(pieces, *a) == 0.0);
  }
}

TEST_CASE("glue and theta_embed are mutually inverse") {
  for (const auto& a : {circle(), torus()}) {
    for (int trial = 0; trial < 50; ++trial) {
      const auto gamma = random_section(a, 2, 31, trial);
      const auto glued = glue(theta_embed(gamma), a);
      CHECK(max_node_difference(glued, gamma) < 1e-10);
      // Compatible tuple built from cubic pieces: glue then embed reproduces it.
      std::vector<SampledField> bare;
      for (const auto& p : gamma.pieces()) bare.push_back(p.detached());
      const auto back = theta_embed(glue(bare, a));
      for (std::size_t j = 0; j < bare.size(); ++j)
        for (std::size_t i = 0; i < bare[j].values().size(); ++i)
          CHECK(std::abs(back[j].values()[i] - bare[j].values()[i]) < 1e-10);
    }
  }
  const auto s = sine_section(circle());
  CHECK(s.interpolation() == "representative");
  std::vector<SampledField> bare;
  for (const auto& p : s.pieces()) bare.push_back(p.detached());
  CHECK(glue(bare, circle()).interpolation() == "cubic");
}

TEST_CASE("compatibility defect detects perturbations") {
  const auto a = circle();
  auto pieces = theta_embed(sine_section(a));
  CHECK(compatibility_defect(pieces, *a) < 1e-9);

  // +0.5 on every chart-0 node whose point also lies in chart 1's window.
  std::vector<double> v = pieces[0].values();
  for (std::size_t i = 0; i < pieces[0].size(); ++i) {
    const auto y = pieces[0].domain().node(i);
    if (a->transition_defined(1, 0, y) && a->chart(1).witness.contains(a->transition_eval(1, 0, y))) v[i] += 0.5;
  }
  pieces[0] = SampledField(pieces[0].domain(), 1, v);
  CHECK_THAT(compatibility_defect(pieces, *a), WithinAbs(0.5, 1e-12));
  try {
    (void)glue(pieces, a);
    FAIL("expected IncompatibilityError");
  } catch (const IncompatibilityError& e) {
    CHECK_THAT(e.defect(), WithinAbs(0.5, 1e-12));
    REQUIRE(e.point().size() == 1);
  }
  CHECK_THROWS_AS(Section(a, pieces), IncompatibilityError);

  const Atlas single("single", {Chart{{1}, {0.0}, {}, Box{{0.3}, {kTwoPi - 0.3}}, {32}}});
  const std::vector<SampledField> one{restrict_to(random_decaying_field(1, 4, 1, 1, 0, 2.0), single.chart(0).witness_domain())};
  CHECK(compatibility_defect(one, single) == 0.0);

  CHECK_THROWS_AS(compatibility_defect(std::span(pieces).first(1), *a), InputError);
}

TEST_CASE("glue is linear and preserves constants") {
  const auto a = torus();
  const auto p = random_section(a, 1, 3, 0), q = random_section(a, 1, 3, 1);
  const auto sum = glue(theta_embed(p + q), a);
  const auto parts = glue(theta_embed(p), a) + glue(theta_embed(q), a);
  CHECK(max_node_difference(sum, parts) < 1e-12);
  const double c[] = {0.25};
  const auto k = glue(theta_embed(Section::constant(a, c)), a);
  for (const auto& piece : k.pieces())
    for (double v : piece.values()) CHECK_THAT(v, WithinAbs(0.25, 1e-15));
}

TEST_CASE("hilbert structure") {
  const auto a = circle();
  const SobolevOrder s(1.0);
  const SectionHilbert h(*a, s, 16);
  const auto zero = Section::zero(a, 1);
  const auto g = random_section(a, 1, 9, 0);
  CHECK(h.inner(zero, g) == 0.0);

  for (int trial = 0; trial < 50; ++trial) CHECK(h.inner(random_section(a, 1, 10, trial), random_section(a, 1, 10, trial)) > 0.0);

  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_section(a, 1, 11, 3 * trial), y = random_section(a, 1, 11, 3 * trial + 1),
               z = random_section(a, 1, 11, 3 * trial + 2);
    CHECK_THAT(h.inner(x, y), WithinAbs(h.inner(y, x), 1e-12));
    const double lhs = h.inner(linear_combination(2.0, x, -0.5, y), z);
    const double rhs = 2.0 * h.inner(x, z) - 0.5 * h.inner(y, z);
    CHECK_THAT(lhs, WithinAbs(rhs, 1e-12 * std::max(1.0, std::abs(rhs))));
  }

  // Per-chart constant-extension oracle.
  const double one = 1.0;
  const auto c1 = Section::constant(a, std::span(&one, 1));
  double oracle = 0;
  for (const auto& chart : a->charts()) {
    const auto e = min_norm_extension(restrict_to(BandlimitedField::constant(1, 16, std::span(&one, 1)),
                                                  chart.witness_domain()),
                                      s, 16);
    oracle += hs_inner(e, e, s);
  }
  CHECK_THAT(hilbert_inner(c1, c1, s, 16), WithinRel(oracle, 1e-12));
  CHECK(oracle <= 2.0 + 1e-12);

  CHECK_THROWS_AS(h.inner(g, random_section(torus(), 1, 1, 0)), InputError);
}

TEST_CASE("point evaluation") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (const auto& a : {circle(), torus()}) {
    const double c[] = {3.0, -1.0};
    const auto k = Section::constant(a, c);
    const auto g = random_section(a, 2, 5, 7);
    const double sup = sup_norm(g);
    int dual = 0;
    for (int trial = 0; trial < 400; ++trial) {
      std::vector<double> p(a->dim());
      for (auto& v : p) v = u(rng);
      const auto kv = point_eval(k, p);
      CHECK(kv[0] == 3.0);
      CHECK(kv[1] == -1.0);
      std::vector<std::size_t> covering;
      for (std::size_t j = 0; j < a->size(); ++j)
        if (a->chart(j).covers(p) && a->chart(j).witness.contains(a->chart(j).to_chart(p))) covering.push_back(j);
      REQUIRE(!covering.empty());
      if (covering.size() >= 2) {
        const auto v1 = point_eval_via(g, p, covering[0]);
        const auto v2 = point_eval_via(g, p, covering[1]);
        CHECK(std::abs(v1[0] - v2[0]) < 1e-8);
        CHECK(std::abs(v1[1] - v2[1]) < 1e-8);
        ++dual;
      }
    }
    CHECK(dual > 50);
    // Bound at manifold points that are witness nodes.
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t j = rng() % a->size();
      const auto& dom = g.piece(j).domain();
      const auto p = a->chart(j).from_chart(dom.node(rng() % dom.size()));
      const auto v = point_eval(g, p);
      CHECK(std::hypot(v[0], v[1]) <= sup + 1e-12);
    }
  }
  const Atlas single("single", {Chart{{1}, {0.0}, {}, Box{{0.3}, {kTwoPi - 0.3}}, {32}}});
  const auto lone = Section::zero(std::make_shared<const Atlas>(single), 1);
  const double p0[] = {0.0};
  CHECK_THROWS_AS(point_eval(lone, p0), DomainError);
}

TEST_CASE("openness margins") {
  const auto a = circle();
  CHECK(open_margin(Section::zero(a, 2), OpenSet::ball({0.0, 0.0}, 1.0)).margin == 1.0);

  // cos attains 1 exactly at the node p = 0 (chart 1, y = π).
  const auto c = Section::from_function(a, 1, [](std::span<const double> p, std::span<double> o) { o[0] = std::cos(p[0]); });
  const auto touching = open_margin(c, OpenSet::ball({0.0}, 1.0));
  CHECK(touching.margin == 0.0);
  CHECK_FALSE(touching.member());

  const auto half = c * 0.5;
  const auto m = open_margin(half, OpenSet::ball({0.0}, 1.0));
  CHECK_THAT(m.margin, WithinAbs(0.5, 1e-15));
  const auto eta = random_section(a, 1, 2, 0);
  const double eps = 0.9 * m.margin / sup_norm(eta);
  CHECK(open_margin(linear_combination(1.0, half, eps, eta), OpenSet::ball({0.0}, 1.0)).member());

  CHECK_THAT(open_margin(half, OpenSet::box({-1.0}, {2.0})).margin, WithinAbs(0.5, 1e-15));
  CHECK_THAT(open_margin(half, OpenSet::ball_complement({3.0}, 1.0)).margin, WithinAbs(1.5, 1e-15));
}

TEST_CASE("pushforward") {
  const auto a = circle();
  const auto gamma = sine_section(a);
  const auto anywhere = OpenSet::ball({0.0}, 10.0);
  const ManifoldMap id{1, 1, [](auto, auto y, auto o) { o[0] = y[0]; }, {}};
  CHECK(max_node_difference(pushforward(id, gamma, anywhere), gamma) == 0.0);

  const ManifoldMap lin{1, 2, [](auto, auto y, auto o) { o[0] = 2 * y[0]; o[1] = -y[0]; }, {}};
  const auto l = pushforward(lin, gamma, anywhere);
  for (std::size_t j = 0; j < a->size(); ++j)
    for (std::size_t i = 0; i < l.piece(j).size(); ++i) {
      CHECK(l.piece(j).value(i)[0] == 2 * gamma.piece(j).value(i)[0]);
      CHECK(l.piece(j).value(i)[1] == -gamma.piece(j).value(i)[0]);
    }

  const ManifoldMap twist{1, 1, [](auto p, auto y, auto o) { o[0] = y[0] * std::cos(p[0]); }, {}};
  const auto t = pushforward(twist, gamma, anywhere);
  for (std::size_t j = 0; j < a->size(); ++j)
    for (std::size_t i = 0; i < t.piece(j).size(); ++i) {
      const double th = a->chart(j).from_chart(t.piece(j).domain().node(i))[0];
      CHECK_THAT(t.piece(j).value(i)[0], WithinAbs(std::sin(th) * std::cos(th), 1e-12));
    }
  CHECK(compatibility_defect(t.pieces(), *a) < 1e-9);

  CHECK_THROWS_AS(pushforward(id, gamma, OpenSet::ball({0.0}, 1.0)), DomainError);
}

TEST_CASE("pushforward derivative") {
  const auto a = circle();
  const auto anywhere = OpenSet::ball({0.0}, 10.0);
  const auto gamma = sine_section(a);
  const auto eta = random_section(a, 1, 4, 0);

  const ManifoldMap sq{1, 1, [](auto, auto y, auto o) { o[0] = y[0] * y[0]; },
                       [](auto, auto y, auto v, auto o) { o[0] = 2 * y[0] * v[0]; }};
  const auto d = pushforward_derivative(sq, gamma, eta, anywhere);
  for (std::size_t j = 0; j < a->size(); ++j)
    for (std::size_t i = 0; i < d.piece(j).size(); ++i)
      CHECK(d.piece(j).value(i)[0] == 2 * gamma.piece(j).value(i)[0] * eta.piece(j).value(i)[0]);
  CHECK(sup_norm(pushforward_derivative(sq, gamma, Section::zero(a, 1), anywhere)) == 0.0);

  const ManifoldMap wave{1, 1, [](auto p, auto y, auto o) { o[0] = std::sin(y[0]) * std::cos(p[0]) + std::exp(y[0]); },
                         [](auto p, auto y, auto v, auto o) {
                           o[0] = (std::cos(y[0]) * std::cos(p[0]) + std::exp(y[0])) * v[0];
                         }};
  const double eps[] = {1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
  const auto probe = pushforward_derivative_probe(wave, gamma, eta, anywhere, eps);
  CHECK_THAT(probe.slope, WithinAbs(2.0, 0.2));
}

TEST_CASE("component splitting is lossless") {
  const auto a = torus();
  const auto g = random_section(a, 3, 8, 0);
  const int sizes[] = {1, 2};
  const auto parts = split_components(g, sizes);
  REQUIRE(parts.size() == 2);
  CHECK(parts[1].components() == 2);
  const auto back = concat_components(parts);
  CHECK(max_node_difference(back, g) == 0.0);
  const double p[] = {1.0, 2.0};
  CHECK(point_eval(back, p) == point_eval(g, p));
  const int bad[] = {2, 2};
  CHECK_THROWS_AS(split_components(g, bad), InputError);
}

#include "mapgroups/section.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mapgroups/errors.hpp"
#include "mapgroups/numerics.hpp"

namespace mapgroups {

namespace {

void check_shape(std::span<const SampledField> pieces, const Atlas& atlas) {
  if (pieces.size() != atlas.size())
    throw InputError("expected " + std::to_string(atlas.size()) + " chart pieces, got " +
                     std::to_string(pieces.size()));
  for (std::size_t j = 0; j < pieces.size(); ++j) {
    if (!(pieces[j].domain() == atlas.chart(j).witness_domain()))
      throw InputError("piece " + std::to_string(j) + " is not sampled on its chart's witness grid");
    if (pieces[j].components() != pieces.front().components())
      throw InputError("chart pieces have different component counts");
  }
}

double euclid(std::span<const double> v) {
  double acc = 0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

void require_same(const Section& a, const Section& b) {
  if (a.atlas().fingerprint() != b.atlas().fingerprint()) throw InputError("sections live on different atlases");
  if (a.components() != b.components()) throw InputError("sections have different component counts");
}

}  // namespace

CompatibilityReport compatibility_report(std::span<const SampledField> pieces, const Atlas& atlas) {
  check_shape(pieces, atlas);
  CompatibilityReport r;
  const int n = pieces.front().components();
  std::vector<double> other(n);
  for (std::size_t j = 0; j < atlas.size(); ++j) {
    const GridDomain& dom = pieces[j].domain();
    for (std::size_t node = 0; node < dom.size(); ++node) {
      const auto y = dom.node(node);
      for (std::size_t i = 0; i < atlas.size(); ++i) {
        if (i == j || !atlas.transition_defined(i, j, y)) continue;
        const auto z = atlas.transition_eval(i, j, y);
        if (!atlas.chart(i).witness.contains(z)) continue;
        pieces[i].evaluate(z, other);
        const auto mine = pieces[j].value(node);
        double acc = 0;
        for (int c = 0; c < n; ++c) acc += (other[c] - mine[c]) * (other[c] - mine[c]);
        const double d = std::sqrt(acc);
        if (d > r.defect || r.point.empty()) {
          if (d > r.defect) r.defect = d;
          r.point = atlas.chart(j).from_chart(y);
          r.chart_i = i;
          r.chart_j = j;
        }
      }
    }
  }
  return r;
}

double compatibility_defect(std::span<const SampledField> pieces, const Atlas& atlas) {
  return compatibility_report(pieces, atlas).defect;
}

Section::Section(std::shared_ptr<const Atlas> atlas, std::vector<SampledField> pieces, double tol)
    : atlas_(std::move(atlas)), pieces_(std::move(pieces)), tol_(tol) {
  if (!atlas_) throw InputError("section needs an atlas");
  if (!(tol_ >= 0.0)) throw InputError("compatibility tolerance must be nonnegative");
  const auto r = compatibility_report(pieces_, *atlas_);
  components_ = pieces_.front().components();
  if (r.defect > tol_) {
    std::ostringstream os;
    os << "chart pieces " << r.chart_i << " and " << r.chart_j << " disagree by " << r.defect
       << " (tolerance " << tol_ << ")";
    throw IncompatibilityError(os.str(), r.defect, r.point);
  }
}

Section Section::from_function(std::shared_ptr<const Atlas> atlas, int components, PointFunction f,
                               double tol) {
  std::vector<SampledField> pieces;
  for (const auto& c : atlas->charts()) {
    PointFunction rep = [c, f](std::span<const double> y, std::span<double> out) { f(c.from_chart(y), out); };
    pieces.emplace_back(c.witness_domain(), components, rep);
  }
  return Section(std::move(atlas), std::move(pieces), tol);
}

Section Section::constant(std::shared_ptr<const Atlas> atlas, std::span<const double> value) {
  std::vector<double> v(value.begin(), value.end());
  return from_function(std::move(atlas), static_cast<int>(v.size()),
                       [v](std::span<const double>, std::span<double> out) { std::copy(v.begin(), v.end(), out.begin()); });
}

Section Section::zero(std::shared_ptr<const Atlas> atlas, int components) {
  return constant(std::move(atlas), std::vector<double>(components, 0.0));
}

std::string Section::interpolation() const {
  const auto first = pieces_.front().interpolation();
  for (const auto& p : pieces_)
    if (p.interpolation() != first) return "mixed";
  return interpolation_tag(first);
}

Section linear_combination(double a, const Section& x, double b, const Section& y) {
  require_same(x, y);
  std::vector<SampledField> pieces;
  for (std::size_t j = 0; j < x.pieces().size(); ++j)
    pieces.push_back(linear_combination(a, x.piece(j), b, y.piece(j)));
  const double tol = std::max(x.tolerance(), y.tolerance()) * std::max({1.0, std::abs(a), std::abs(b)});
  return Section(x.atlas_ptr(), std::move(pieces), tol);
}

Section Section::operator+(const Section& other) const { return linear_combination(1.0, *this, 1.0, other); }
Section Section::operator-(const Section& other) const { return linear_combination(1.0, *this, -1.0, other); }
Section Section::operator*(double scale) const { return linear_combination(scale, *this, 0.0, *this); }

std::vector<SampledField> theta_embed(const Section& gamma) { return gamma.pieces(); }

Section glue(std::vector<SampledField> pieces, std::shared_ptr<const Atlas> atlas, double tol) {
  const auto r = compatibility_report(pieces, *atlas);
  if (r.defect > tol) {
    std::ostringstream os;
    os << "cannot glue: pieces " << r.chart_i << " and " << r.chart_j << " disagree by " << r.defect
       << " at manifold point (";
    for (std::size_t a = 0; a < r.point.size(); ++a) os << (a ? ", " : "") << r.point[a];
    os << ")";
    throw IncompatibilityError(os.str(), r.defect, r.point);
  }
  const int n = pieces.front().components();
  bool exact = true;
  for (const auto& p : pieces) exact = exact && p.has_representative();
  auto shared = std::make_shared<const std::vector<SampledField>>(std::move(pieces));

  std::vector<SampledField> out;
  for (std::size_t j = 0; j < atlas->size(); ++j) {
    PointFunction sum = [shared, atlas, j, n](std::span<const double> y, std::span<double> acc) {
      const auto p = atlas->chart(j).from_chart(y);
      const auto h = atlas->partition_all(p);
      std::vector<double> v(n);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(h[i] > 0.0)) continue;
        if (i == j)
          (*shared)[i].evaluate(y, v);
        else
          (*shared)[i].evaluate(atlas->transition_eval(i, j, y), v);
        for (int c = 0; c < n; ++c) acc[c] += h[i] * v[c];
      }
    };
    const GridDomain dom = atlas->chart(j).witness_domain();
    std::vector<double> values(dom.size() * n);
    for (std::size_t node = 0; node < dom.size(); ++node)
      sum(dom.node(node), std::span<double>(values).subspan(node * n, n));
    if (exact)
      out.emplace_back(dom, n, std::move(values), sum);
    else
      out.emplace_back(dom, n, std::move(values));
  }
  return Section(std::move(atlas), std::move(out), tol);
}

SectionHilbert::SectionHilbert(const Atlas& atlas, SobolevOrder s, int modes, WeightConvention convention)
    : fingerprint_(atlas.fingerprint()), s_(s), modes_(modes), convention_(convention) {
  for (const auto& c : atlas.charts()) ext_.emplace_back(c.witness_domain(), s, modes, convention);
}

std::vector<double> SectionHilbert::chart_terms(const Section& a, const Section& b) const {
  require_same(a, b);
  if (a.atlas().fingerprint() != fingerprint_) throw InputError("section atlas differs from the inner product's");
  std::vector<double> t;
  for (std::size_t j = 0; j < ext_.size(); ++j)
    t.push_back(hs_inner(ext_[j].apply(a.piece(j)), ext_[j].apply(b.piece(j)), s_, convention_));
  return t;
}

double SectionHilbert::inner(const Section& a, const Section& b) const {
  double acc = 0;
  for (double t : chart_terms(a, b)) acc += t;
  return acc;
}

double SectionHilbert::norm(const Section& a) const { return std::sqrt(std::max(0.0, inner(a, a))); }

double hilbert_inner(const Section& a, const Section& b, SobolevOrder s, int modes, WeightConvention convention) {
  return SectionHilbert(a.atlas(), s, modes, convention).inner(a, b);
}

std::vector<double> point_eval_via(const Section& gamma, std::span<const double> p, std::size_t j) {
  const Chart& c = gamma.atlas().chart(j);
  const auto y = c.to_chart(p);
  if (!c.covers(p) || !c.witness.contains(y))
    throw DomainError("point is outside the witness window of chart " + std::to_string(j));
  return gamma.piece(j).evaluate(y);
}

std::vector<double> point_eval(const Section& gamma, std::span<const double> p) {
  const auto j = gamma.atlas().best_chart(p);
  if (!j) throw DomainError("point is not covered by any witness window");
  return point_eval_via(gamma, p, *j);
}

double sup_norm(const Section& gamma) {
  double best = 0;
  for (const auto& piece : gamma.pieces())
    for (std::size_t node = 0; node < piece.size(); ++node) best = std::max(best, euclid(piece.value(node)));
  return best;
}

OpenSet OpenSet::ball(std::vector<double> center, double radius) {
  if (!(radius > 0.0)) throw InputError("ball radius must be positive");
  OpenSet u;
  u.kind = Kind::Ball;
  u.center = std::move(center);
  u.radius = radius;
  return u;
}

OpenSet OpenSet::box(std::vector<double> lo, std::vector<double> hi) {
  if (lo.size() != hi.size()) throw InputError("box bounds differ in dimension");
  OpenSet u;
  u.kind = Kind::Box;
  u.lo = std::move(lo);
  u.hi = std::move(hi);
  return u;
}

OpenSet OpenSet::ball_complement(std::vector<double> center, double radius) {
  OpenSet u = ball(std::move(center), radius);
  u.kind = Kind::BallComplement;
  return u;
}

double OpenSet::distance_to_complement(std::span<const double> y) const {
  const std::size_t n = kind == Kind::Box ? lo.size() : center.size();
  if (y.size() != n) throw InputError("open set dimension does not match the value dimension");
  switch (kind) {
    case Kind::Ball: {
      double acc = 0;
      for (std::size_t a = 0; a < n; ++a) acc += (y[a] - center[a]) * (y[a] - center[a]);
      return std::max(0.0, radius - std::sqrt(acc));
    }
    case Kind::BallComplement: {
      double acc = 0;
      for (std::size_t a = 0; a < n; ++a) acc += (y[a] - center[a]) * (y[a] - center[a]);
      return std::max(0.0, std::sqrt(acc) - radius);
    }
    case Kind::Box: {
      double d = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < n; ++a) d = std::min({d, y[a] - lo[a], hi[a] - y[a]});
      return std::max(0.0, d);
    }
  }
  return 0.0;
}

OpennessMargin open_margin(const Section& gamma, const OpenSet& u) {
  OpennessMargin m{std::numeric_limits<double>::infinity()};
  for (const auto& piece : gamma.pieces())
    for (std::size_t node = 0; node < piece.size(); ++node)
      m.margin = std::min(m.margin, u.distance_to_complement(piece.value(node)));
  return m;
}

namespace {

void require_margin(const Section& gamma, const OpenSet& u, const ManifoldMap& f) {
  if (f.in_dim != gamma.components()) throw InputError("map input dimension does not match the section");
  const auto m = open_margin(gamma, u);
  if (!m.member()) throw DomainError("section touches the boundary of the map's open domain (margin 0)");
}

}  // namespace

Section pushforward(const ManifoldMap& f, const Section& gamma, const OpenSet& u) {
  require_margin(gamma, u, f);
  const Atlas& atlas = gamma.atlas();
  std::vector<SampledField> out;
  for (std::size_t j = 0; j < atlas.size(); ++j) {
    const Chart c = atlas.chart(j);
    auto piece = std::make_shared<const SampledField>(gamma.piece(j));
    const int nin = f.in_dim;
    const auto fn = f.f;
    PointFunction rep = [c, piece, nin, fn](std::span<const double> y, std::span<double> o) {
      std::vector<double> v(nin);
      piece->evaluate(y, v);
      fn(c.from_chart(y), v, o);
    };
    const GridDomain& dom = piece->domain();
    std::vector<double> values(dom.size() * f.out_dim);
    for (std::size_t node = 0; node < dom.size(); ++node) {
      std::span<double> o(values.data() + node * f.out_dim, f.out_dim);
      fn(c.from_chart(dom.node(node)), piece->value(node), o);
      for (double v : o)
        if (!std::isfinite(v)) throw NumericError("pushforward produced a non-finite value");
    }
    if (piece->has_representative())
      out.emplace_back(dom, f.out_dim, std::move(values), rep);
    else
      out.emplace_back(dom, f.out_dim, std::move(values));
  }
  return Section(gamma.atlas_ptr(), std::move(out), gamma.tolerance());
}

Section pushforward_derivative(const ManifoldMap& f, const Section& gamma, const Section& eta, const OpenSet& u) {
  require_margin(gamma, u, f);
  require_same(gamma, eta);
  if (!f.d2f) throw InputError("map has no closed-form fibre derivative");
  const Atlas& atlas = gamma.atlas();
  std::vector<SampledField> out;
  for (std::size_t j = 0; j < atlas.size(); ++j) {
    const Chart c = atlas.chart(j);
    auto g = std::make_shared<const SampledField>(gamma.piece(j));
    auto e = std::make_shared<const SampledField>(eta.piece(j));
    const int nin = f.in_dim;
    const auto d = f.d2f;
    PointFunction rep = [c, g, e, nin, d](std::span<const double> y, std::span<double> o) {
      std::vector<double> gv(nin), ev(nin);
      g->evaluate(y, gv);
      e->evaluate(y, ev);
      d(c.from_chart(y), gv, ev, o);
    };
    const GridDomain& dom = g->domain();
    std::vector<double> values(dom.size() * f.out_dim);
    for (std::size_t node = 0; node < dom.size(); ++node)
      d(c.from_chart(dom.node(node)), g->value(node), e->value(node),
        std::span<double>(values.data() + node * f.out_dim, f.out_dim));
    if (g->has_representative() && e->has_representative())
      out.emplace_back(dom, f.out_dim, std::move(values), rep);
    else
      out.emplace_back(dom, f.out_dim, std::move(values));
  }
  return Section(gamma.atlas_ptr(), std::move(out), std::max(gamma.tolerance(), eta.tolerance()));
}

double max_node_difference(const Section& a, const Section& b) {
  require_same(a, b);
  double worst = 0;
  for (std::size_t j = 0; j < a.pieces().size(); ++j) {
    const auto& va = a.piece(j).values();
    const auto& vb = b.piece(j).values();
    for (std::size_t i = 0; i < va.size(); ++i) worst = std::max(worst, std::abs(va[i] - vb[i]));
  }
  return worst;
}

SlopeProbe pushforward_derivative_probe(const ManifoldMap& f, const Section& gamma, const Section& eta,
                                        const OpenSet& u, std::span<const double> eps) {
  SlopeProbe probe;
  const Section exact = pushforward_derivative(f, gamma, eta, u);
  for (double e : eps) {
    const Section plus = pushforward(f, linear_combination(1.0, gamma, e, eta), u);
    const Section minus = pushforward(f, linear_combination(1.0, gamma, -e, eta), u);
    double worst = 0;
    for (std::size_t j = 0; j < exact.pieces().size(); ++j) {
      const auto& p = plus.piece(j).values();
      const auto& m = minus.piece(j).values();
      const auto& x = exact.piece(j).values();
      for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs((p[i] - m[i]) / (2 * e) - x[i]));
    }
    probe.eps.push_back(e);
    probe.errors.push_back(worst);
  }
  probe.slope = loglog_slope(probe.eps, probe.errors);
  return probe;
}

std::vector<Section> split_components(const Section& gamma, std::span<const int> sizes) {
  int total = 0;
  for (int s : sizes) {
    if (s <= 0) throw InputError("component block sizes must be positive");
    total += s;
  }
  if (total != gamma.components()) throw InputError("component block sizes do not add up");
  std::vector<Section> out;
  int offset = 0;
  const int n = gamma.components();
  for (int s : sizes) {
    std::vector<SampledField> pieces;
    for (const auto& piece : gamma.pieces()) {
      std::vector<double> v(piece.size() * s);
      for (std::size_t node = 0; node < piece.size(); ++node)
        for (int c = 0; c < s; ++c) v[node * s + c] = piece.values()[node * n + offset + c];
      if (piece.has_representative()) {
        auto src = std::make_shared<const SampledField>(piece);
        PointFunction rep = [src, n, offset, s](std::span<const double> y, std::span<double> o) {
          std::vector<double> full(n);
          src->evaluate(y, full);
          std::copy(full.begin() + offset, full.begin() + offset + s, o.begin());
        };
        pieces.emplace_back(piece.domain(), s, std::move(v), rep);
      } else {
        pieces.emplace_back(piece.domain(), s, std::move(v));
      }
    }
    out.emplace_back(gamma.atlas_ptr(), std::move(pieces), gamma.tolerance());
    offset += s;
  }
  return out;
}

Section concat_components(std::span<const Section> parts) {
  if (parts.empty()) throw InputError("nothing to concatenate");
  int n = 0;
  for (const auto& p : parts) {
    if (p.atlas().fingerprint() != parts.front().atlas().fingerprint())
      throw InputError("sections live on different atlases");
    n += p.components();
  }
  std::vector<SampledField> pieces;
  double tol = 0;
  for (const auto& p : parts) tol = std::max(tol, p.tolerance());
  for (std::size_t j = 0; j < parts.front().pieces().size(); ++j) {
    const GridDomain& dom = parts.front().piece(j).domain();
    std::vector<double> v(dom.size() * n);
    bool exact = true;
    int offset = 0;
    std::vector<std::shared_ptr<const SampledField>> src;
    for (const auto& p : parts) {
      const auto& piece = p.piece(j);
      const int s = piece.components();
      for (std::size_t node = 0; node < dom.size(); ++node)
        for (int c = 0; c < s; ++c) v[node * n + offset + c] = piece.values()[node * s + c];
      exact = exact && piece.has_representative();
      src.push_back(std::make_shared<const SampledField>(piece));
      offset += s;
    }
    if (exact) {
      PointFunction rep = [src](std::span<const double> y, std::span<double> o) {
        std::size_t at = 0;
        for (const auto& f : src) {
          f->evaluate(y, o.subspan(at, f->components()));
          at += f->components();
        }
      };
      pieces.emplace_back(dom, n, std::move(v), rep);
    } else {
      pieces.emplace_back(dom, n, std::move(v));
    }
  }
  return Section(parts.front().atlas_ptr(), std::move(pieces), tol);
}

}  // namespace mapgroups

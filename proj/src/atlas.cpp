#include "mapgroups/atlas.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "mapgroups/errors.hpp"
#include "mapgroups/numerics.hpp"

namespace mapgroups {

namespace {

Box full_chart_box(int m) { return Box{std::vector<double>(m, 0.0), std::vector<double>(m, kTwoPi)}; }

bool inside_open_torus_box(std::span<const double> y) {
  for (double v : y)
    if (!(v > 0.0 && v < kTwoPi)) return false;
  return true;
}

Transition derive_transition(const Chart& ci, const Chart& cj) {
  Transition t;
  for (int a = 0; a < ci.dim(); ++a) {
    const int s = ci.sign[a] * cj.sign[a];
    t.sign.push_back(s);
    t.offset.push_back(wrap_angle(ci.shift[a] - s * cj.shift[a]));
  }
  return t;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<double> Chart::to_chart(std::span<const double> p) const {
  std::vector<double> y(p.size());
  for (std::size_t a = 0; a < p.size(); ++a) y[a] = wrap_angle(sign[a] * p[a] + shift[a]);
  return y;
}

std::vector<double> Chart::from_chart(std::span<const double> y) const {
  std::vector<double> p(y.size());
  for (std::size_t a = 0; a < y.size(); ++a) p[a] = wrap_angle(sign[a] * (y[a] - shift[a]));
  return p;
}

bool Chart::covers(std::span<const double> p) const {
  const auto y = to_chart(p);
  return inside_open_torus_box(y);
}

GridDomain Chart::witness_domain() const { return GridDomain::window(witness, grid); }

Box Chart::enlarged_witness() const {
  Box e = witness;
  for (int a = 0; a < dim(); ++a) {
    e.lo[a] = 0.5 * (codomain.lo[a] + witness.lo[a]);
    e.hi[a] = 0.5 * (codomain.hi[a] + witness.hi[a]);
  }
  return e;
}

std::string Transition::kind() const {
  for (int s : sign)
    if (s != 1) return "affine";
  return "translation";
}

Atlas::Atlas(std::string name, std::vector<Chart> charts, double plateau_fraction)
    : name_(std::move(name)), charts_(std::move(charts)), plateau_(plateau_fraction) {
  if (charts_.empty()) throw InputError("atlas needs at least one chart");
  m_ = charts_.front().dim();
  if (m_ != 1 && m_ != 2) throw InputError("atlas dimension must be 1 or 2");
  for (auto& c : charts_) {
    if (c.dim() != m_ || static_cast<int>(c.sign.size()) != m_ || static_cast<int>(c.grid.size()) != m_ ||
        c.witness.dim() != m_)
      throw InputError("chart dimensions disagree");
    for (int s : c.sign)
      if (s != 1 && s != -1) throw InputError("chart signs must be +1 or -1");
    c.codomain = full_chart_box(m_);
    if (!c.codomain.contains_closure_of(c.witness))
      throw InputError("witness window must be relatively compact in the chart codomain");
  }
  if (!(plateau_ >= 0.0 && plateau_ < 1.0)) throw InputError("plateau fraction must lie in [0, 1)");
  const std::size_t j = charts_.size();
  transitions_.reserve(j * j);
  for (std::size_t a = 0; a < j; ++a)
    for (std::size_t b = 0; b < j; ++b) transitions_.push_back(derive_transition(charts_[a], charts_[b]));
}

Atlas Atlas::circle_two_charts(int nodes) {
  const double pi = std::numbers::pi;
  const Box w{{0.3}, {kTwoPi - 0.3}};
  return Atlas("circle2", {Chart{{1}, {0.0}, {}, w, {nodes}}, Chart{{1}, {pi}, {}, w, {nodes}}});
}

Atlas Atlas::torus_four_charts(int nodes) {
  const double pi = std::numbers::pi;
  const Box w{{0.3, 0.3}, {kTwoPi - 0.3, kTwoPi - 0.3}};
  std::vector<Chart> c;
  for (auto shift : {std::vector<double>{0.0, 0.0}, {pi, 0.0}, {0.0, pi}, {pi, pi}})
    c.push_back(Chart{{1, 1}, shift, {}, w, {nodes, nodes}});
  return Atlas("torus4", std::move(c));
}

Atlas Atlas::builtin(const std::string& name) {
  if (name == "circle2") return circle_two_charts();
  if (name == "torus4") return torus_four_charts();
  throw InputError("unknown atlas '" + name + "' (built-ins: circle2, torus4)");
}

const Transition& Atlas::transition(std::size_t i, std::size_t j) const {
  if (i >= size() || j >= size()) throw InputError("chart index out of range");
  return transitions_[i * size() + j];
}

bool Atlas::transition_defined(std::size_t i, std::size_t j, std::span<const double> y) const {
  if (!inside_open_torus_box(y)) return false;
  const Transition& t = transition(i, j);
  for (int a = 0; a < m_; ++a) {
    const double z = wrap_angle(t.sign[a] * y[a] + t.offset[a]);
    if (!(z > 0.0)) return false;
  }
  return true;
}

std::vector<double> Atlas::transition_eval(std::size_t i, std::size_t j, std::span<const double> y) const {
  if (static_cast<int>(y.size()) != m_) throw InputError("point dimension does not match atlas");
  if (!transition_defined(i, j, y)) {
    std::string msg = "point (";
    for (std::size_t a = 0; a < y.size(); ++a) msg += (a ? ", " : "") + fmt17(y[a]);
    throw DomainError(msg + ") is outside the overlap of charts " + std::to_string(i) + " and " +
                      std::to_string(j));
  }
  const Transition& t = transition(i, j);
  std::vector<double> z(m_);
  for (int a = 0; a < m_; ++a) z[a] = wrap_angle(t.sign[a] * y[a] + t.offset[a]);
  return z;
}

std::vector<OverlapBranch> Atlas::overlap_branches(std::size_t i, std::size_t j) const {
  const Transition& t = transition(i, j);
  // Per axis: subintervals of (0, 2π) on which the wrap shift is constant.
  std::vector<std::vector<std::pair<double, double>>> pieces(m_);
  std::vector<std::vector<double>> shifts(m_);
  for (int a = 0; a < m_; ++a) {
    std::vector<double> cuts{0.0};
    for (int n = -2; n <= 2; ++n) {
      const double y0 = (kTwoPi * n - t.offset[a]) / t.sign[a];
      if (y0 > 1e-12 && y0 < kTwoPi - 1e-12) cuts.push_back(y0);
    }
    cuts.push_back(kTwoPi);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double mid = 0.5 * (cuts[c] + cuts[c + 1]);
      const double z = t.sign[a] * mid + t.offset[a];
      pieces[a].push_back({cuts[c], cuts[c + 1]});
      shifts[a].push_back(t.offset[a] - kTwoPi * std::floor(z / kTwoPi));
    }
  }
  std::vector<OverlapBranch> out;
  const std::size_t n0 = pieces[0].size();
  const std::size_t n1 = m_ == 2 ? pieces[1].size() : 1;
  for (std::size_t b0 = 0; b0 < n0; ++b0)
    for (std::size_t b1 = 0; b1 < n1; ++b1) {
      Box box;
      Eigen::MatrixXd lin = Eigen::MatrixXd::Zero(m_, m_);
      Eigen::VectorXd off(m_);
      const std::size_t idx[2] = {b0, b1};
      for (int a = 0; a < m_; ++a) {
        box.lo.push_back(pieces[a][idx[a]].first);
        box.hi.push_back(pieces[a][idx[a]].second);
        lin(a, a) = t.sign[a];
        off(a) = shifts[a][idx[a]];
      }
      out.push_back(OverlapBranch{box, Diffeo::affine(lin, off, box)});
    }
  return out;
}

double Atlas::bump(std::size_t i, std::span<const double> p) const {
  const Chart& c = chart(i);
  if (!c.covers(p)) return 0.0;
  const auto y = c.to_chart(p);
  return SmoothCutoff::for_box(c.witness, plateau_)(y);
}

std::vector<double> Atlas::partition_all(std::span<const double> p) const {
  std::vector<double> b(size());
  double total = 0;
  for (std::size_t i = 0; i < size(); ++i) total += (b[i] = bump(i, p));
  for (double& v : b) v = total > 0.0 ? v / total : std::nan("");
  return b;
}

double Atlas::partition(std::size_t i, std::span<const double> p) const { return partition_all(p).at(i); }

std::optional<std::size_t> Atlas::best_chart(std::span<const double> p) const {
  std::optional<std::size_t> best;
  double top = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    const double b = bump(i, p);
    if (b > top) {
      top = b;
      best = i;
    }
  }
  return best;
}

Atlas Atlas::with_transition_offset(std::size_t i, std::size_t j, double delta) const {
  Atlas copy = *this;
  Transition& t = copy.transitions_.at(i * size() + j);
  for (double& o : t.offset) o += delta;
  return copy;
}

Atlas Atlas::with_witness(std::size_t j, Box witness) const {
  std::vector<Chart> c = charts_;
  c.at(j).witness = std::move(witness);
  Atlas copy(name_, std::move(c), plateau_);
  copy.transitions_ = transitions_;
  return copy;
}

void Atlas::set_transition(std::size_t i, std::size_t j, Transition t) {
  if (static_cast<int>(t.sign.size()) != m_ || static_cast<int>(t.offset.size()) != m_)
    throw InputError("transition dimension does not match atlas");
  transitions_.at(i * size() + j) = std::move(t);
}

std::string Atlas::fingerprint() const {
  std::string text = name_ + "|" + std::to_string(m_) + "|" + fmt17(plateau_);
  for (const auto& c : charts_) {
    text += "|c";
    for (int a = 0; a < m_; ++a)
      text += ":" + std::to_string(c.sign[a]) + "," + fmt17(c.shift[a]) + "," + fmt17(c.witness.lo[a]) + "," +
              fmt17(c.witness.hi[a]) + "," + std::to_string(c.grid[a]);
  }
  for (const auto& t : transitions_) {
    text += "|t";
    for (int a = 0; a < m_; ++a) text += ":" + std::to_string(t.sign[a]) + "," + fmt17(t.offset[a]);
  }
  return hex64(fnv1a(text));
}

AtlasReport validate_atlas(const Atlas& a, double tol, int density) {
  if (density < 2) throw InputError("validation density must be at least 2");
  AtlasReport r;
  const int m = a.dim();
  const std::size_t total = m == 1 ? density : static_cast<std::size_t>(density) * density;
  auto point = [&](std::size_t flat, double offset) {
    std::vector<double> p(m);
    std::size_t rest = flat;
    for (int ax = m - 1; ax >= 0; --ax) {
      p[ax] = kTwoPi * (static_cast<double>(rest % density) + offset) / density;
      rest /= density;
    }
    return p;
  };

  r.margin = std::numeric_limits<double>::infinity();
  for (const auto& c : a.charts()) r.margin = std::min(r.margin, c.codomain.margin_to(c.witness));

  // Cover and partition of unity on manifold samples.
  for (std::size_t f = 0; f < total; ++f) {
    const auto p = point(f, 0.0);
    bool covered = false;
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& c : a.charts()) {
      const auto y = c.to_chart(p);
      if (c.covers(p) && c.witness.contains(y)) covered = true;
      gap = std::min(gap, c.witness.distance(y));
    }
    if (!covered) {
      ++r.uncovered;
      r.uncovered_points.push_back(p);
      r.cover_gap = std::max(r.cover_gap, gap);
      r.partition_residual = std::max(r.partition_residual, 1.0);
      continue;
    }
    double sum = 0;
    for (double h : a.partition_all(p)) sum += h;
    r.partition_residual = std::max(r.partition_residual, std::abs(sum - 1.0));
  }

  // Transition identities on chart samples (cell centres, so no sample sits on a cut).
  const std::size_t nc = a.size();
  for (std::size_t k = 0; k < nc; ++k)
    for (std::size_t f = 0; f < total; ++f) {
      const auto y = point(f, 0.5);
      const Chart& ck = a.chart(k);
      const auto back = ck.to_chart(ck.from_chart(y));
      for (int ax = 0; ax < m; ++ax)
        r.inverse_residual = std::max(r.inverse_residual, circular_distance(back[ax], y[ax]));
      for (std::size_t j = 0; j < nc; ++j) {
        if (!a.transition_defined(j, k, y)) continue;
        const auto z = a.transition_eval(j, k, y);
        if (a.transition_defined(k, j, z)) {
          const auto w = a.transition_eval(k, j, z);
          for (int ax = 0; ax < m; ++ax)
            r.inverse_residual = std::max(r.inverse_residual, circular_distance(w[ax], y[ax]));
        }
        for (std::size_t i = 0; i < nc; ++i) {
          if (!a.transition_defined(i, j, z) || !a.transition_defined(i, k, y)) continue;
          const auto lhs = a.transition_eval(i, k, y);
          const auto rhs = a.transition_eval(i, j, z);
          for (int ax = 0; ax < m; ++ax)
            r.cocycle_residual = std::max(r.cocycle_residual, circular_distance(lhs[ax], rhs[ax]));
        }
      }
    }
  r.samples = total;
  r.passed = r.uncovered == 0 && r.cocycle_residual <= tol && r.inverse_residual <= tol &&
             r.partition_residual <= tol && r.margin > 0.0;
  return r;
}

}  // namespace mapgroups

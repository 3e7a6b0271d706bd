#include "mapgroups/sobolev.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mapgroups/errors.hpp"
#include "mapgroups/numerics.hpp"

namespace mapgroups {

namespace {

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

std::string point_string(std::span<const double> x) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

// e^{i k x} for k = −N..N.
std::vector<std::complex<double>> phases(int modes, double x) {
  std::vector<std::complex<double>> out(2 * modes + 1);
  for (int k = -modes; k <= modes; ++k) out[k + modes] = std::polar(1.0, k * x);
  return out;
}

// Lagrange weights for integer nodes `start..start+count-1` at real position r.
void lagrange_weights(int start, int count, double r, std::span<double> w) {
  for (int a = 0; a < count; ++a) {
    double num = 1.0, den = 1.0;
    for (int b = 0; b < count; ++b) {
      if (b == a) continue;
      num *= r - (start + b);
      den *= static_cast<double>(a - b);
    }
    w[a] = num / den;
  }
}

void require_same_shape(const BandlimitedField& a, const BandlimitedField& b) {
  if (a.dim() != b.dim() || a.modes() != b.modes() || a.components() != b.components())
    throw InputError("band-limited fields differ in dimension, mode cutoff, or components");
}

}  // namespace

std::string convention_tag(WeightConvention c) {
  return c == WeightConvention::Paper ? "paper-s/2" : "standard-s";
}

WeightConvention convention_from_tag(std::string_view tag) {
  if (tag == "paper-s/2" || tag == "paper") return WeightConvention::Paper;
  if (tag == "standard-s" || tag == "standard") return WeightConvention::Standard;
  throw InputError("unknown weight exponent convention '" + std::string(tag) + "'");
}

SobolevOrder::SobolevOrder(double s) : s_(s) {
  if (!std::isfinite(s) || s < 0.0) throw InputError("Sobolev order must be finite and >= 0");
}

double mode_weight(double k_norm_sq, SobolevOrder s, WeightConvention convention) {
  const double e = convention == WeightConvention::Paper ? 0.5 * s.value() : s.value();
  return std::pow(1.0 + k_norm_sq, e);
}

// ---------------------------------------------------------------------------
// BandlimitedField

BandlimitedField::BandlimitedField(int m, int modes, int components,
                                   std::vector<std::complex<double>> coeffs, bool real)
    : m_(m), modes_(modes), components_(components), real_(real), coeffs_(std::move(coeffs)) {
  if (m != 1 && m != 2) throw InputError("torus dimension must be 1 or 2");
  if (modes < 0) throw InputError("mode cutoff must be >= 0");
  if (components < 1) throw InputError("component count must be >= 1");
  per_component_ = ipow(2 * static_cast<std::size_t>(modes) + 1, m);
  if (coeffs_.size() != per_component_ * components)
    throw InputError("coefficient array must hold (2N+1)^m entries per component");
  for (const auto& c : coeffs_)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw InputError("non-finite Fourier coefficient");
  if (real_) {
    for (int comp = 0; comp < components_; ++comp) {
      const std::size_t base = comp * per_component_;
      for (std::size_t f = 0; f < per_component_; ++f) {
        const auto& c = coeffs_[base + f];
        const auto& cm = coeffs_[base + per_component_ - 1 - f];
        if (c != std::conj(cm))
          throw InputError("real-flagged field violates c_{-k} = conj(c_k)");
      }
    }
  }
}

BandlimitedField BandlimitedField::zero(int m, int modes, int components) {
  const std::size_t per = ipow(2 * static_cast<std::size_t>(std::max(modes, 0)) + 1, m);
  return BandlimitedField(m, modes, components,
                          std::vector<std::complex<double>>(per * components), true);
}

BandlimitedField BandlimitedField::constant(int m, int modes, std::span<const double> value) {
  BandlimitedField z = zero(m, modes, static_cast<int>(value.size()));
  const std::size_t centre = (z.per_component_ - 1) / 2;
  for (std::size_t c = 0; c < value.size(); ++c) z.coeffs_[c * z.per_component_ + centre] = value[c];
  return z;
}

BandlimitedField BandlimitedField::real_projection(int m, int modes, int components,
                                                   std::vector<std::complex<double>> coeffs) {
  BandlimitedField raw(m, modes, components, std::move(coeffs), false);
  std::vector<std::complex<double>> sym(raw.coeffs_.size());
  const std::size_t per = raw.per_component_;
  for (int comp = 0; comp < components; ++comp) {
    const std::size_t base = comp * per;
    for (std::size_t f = 0; f < per; ++f)
      sym[base + f] = 0.5 * (raw.coeffs_[base + f] + std::conj(raw.coeffs_[base + per - 1 - f]));
  }
  return BandlimitedField(m, modes, components, std::move(sym), true);
}

std::size_t BandlimitedField::flat_index(std::span<const int> k) const {
  if (static_cast<int>(k.size()) != m_) throw InputError("wave vector has wrong dimension");
  std::size_t idx = 0;
  for (int a = 0; a < m_; ++a) {
    if (std::abs(k[a]) > modes_) throw InputError("wave vector exceeds mode cutoff");
    idx = idx * (2 * modes_ + 1) + static_cast<std::size_t>(k[a] + modes_);
  }
  return idx;
}

std::vector<int> BandlimitedField::wave_vector(std::size_t flat) const {
  std::vector<int> k(m_);
  for (int a = m_ - 1; a >= 0; --a) {
    k[a] = static_cast<int>(flat % (2 * modes_ + 1)) - modes_;
    flat /= (2 * modes_ + 1);
  }
  return k;
}

double BandlimitedField::k_norm_sq(std::size_t flat) const {
  double acc = 0;
  for (int k : wave_vector(flat)) acc += static_cast<double>(k) * k;
  return acc;
}

std::complex<double> BandlimitedField::coeff(int component, std::span<const int> k) const {
  return coeffs_.at(component * per_component_ + flat_index(k));
}

void BandlimitedField::evaluate(std::span<const double> x, std::span<double> out) const {
  if (static_cast<int>(x.size()) != m_) throw InputError("evaluation point has wrong dimension");
  const int w = 2 * modes_ + 1;
  const auto e0 = phases(modes_, x[0]);
  for (int comp = 0; comp < components_; ++comp) {
    const std::complex<double>* c = coeffs_.data() + comp * per_component_;
    std::complex<double> acc = 0;
    if (m_ == 1) {
      for (int i = 0; i < w; ++i) acc += c[i] * e0[i];
    } else {
      const auto e1 = phases(modes_, x[1]);
      for (int i = 0; i < w; ++i) {
        std::complex<double> row = 0;
        for (int j = 0; j < w; ++j) row += c[i * w + j] * e1[j];
        acc += e0[i] * row;
      }
    }
    out[comp] = acc.real();
  }
}

std::vector<double> BandlimitedField::evaluate(std::span<const double> x) const {
  std::vector<double> out(components_);
  evaluate(x, out);
  return out;
}

BandlimitedField BandlimitedField::resized(int modes) const {
  BandlimitedField out = zero(m_, modes, components_);
  out.real_ = real_;
  const int lim = std::min(modes, modes_);
  for (int comp = 0; comp < components_; ++comp) {
    for (std::size_t f = 0; f < per_component_; ++f) {
      const auto k = wave_vector(f);
      bool inside = true;
      for (int v : k) inside = inside && std::abs(v) <= lim;
      if (!inside) continue;
      out.coeffs_[comp * out.per_component_ + out.flat_index(k)] = coeffs_[comp * per_component_ + f];
    }
  }
  return out;
}

BandlimitedField BandlimitedField::operator+(const BandlimitedField& other) const {
  require_same_shape(*this, other);
  auto c = coeffs_;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += other.coeffs_[i];
  return BandlimitedField(m_, modes_, components_, std::move(c), real_ && other.real_);
}

BandlimitedField BandlimitedField::operator-(const BandlimitedField& other) const {
  return *this + other * -1.0;
}

BandlimitedField BandlimitedField::operator*(double scale) const {
  auto c = coeffs_;
  for (auto& v : c) v *= scale;
  return BandlimitedField(m_, modes_, components_, std::move(c), real_);
}

double hs_inner(const BandlimitedField& a, const BandlimitedField& b, SobolevOrder s,
                WeightConvention convention) {
  require_same_shape(a, b);
  if (!a.is_real() || !b.is_real()) throw InputError("H^s inner product needs real fields");
  const std::size_t per = a.modes_per_component();
  std::vector<double> weight(per);
  for (std::size_t f = 0; f < per; ++f) weight[f] = mode_weight(a.k_norm_sq(f), s, convention);
  double acc = 0;
  for (int comp = 0; comp < a.components(); ++comp) {
    const std::size_t base = comp * per;
    for (std::size_t f = 0; f < per; ++f) {
      const auto& x = a.coeffs()[base + f];
      const auto& y = b.coeffs()[base + f];
      acc += weight[f] * (x.real() * y.real() + x.imag() * y.imag());
    }
  }
  return acc;
}

double hs_norm(const BandlimitedField& a, SobolevOrder s, WeightConvention convention) {
  return std::sqrt(std::max(0.0, hs_inner(a, a, s, convention)));
}

// ---------------------------------------------------------------------------
// Box / GridDomain

bool Box::contains(std::span<const double> x) const {
  for (int a = 0; a < dim(); ++a)
    if (!(x[a] > lo[a] && x[a] < hi[a])) return false;
  return true;
}

bool Box::contains_closure_of(const Box& inner) const {
  for (int a = 0; a < dim(); ++a)
    if (!(inner.lo[a] > lo[a] && inner.hi[a] < hi[a])) return false;
  return true;
}

double Box::distance(std::span<const double> x) const {
  double acc = 0;
  for (int a = 0; a < dim(); ++a) {
    const double d = std::max({lo[a] - x[a], 0.0, x[a] - hi[a]});
    acc += d * d;
  }
  return std::sqrt(acc);
}

double Box::margin_to(const Box& inner) const {
  double m = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dim(); ++a) m = std::min({m, inner.lo[a] - lo[a], hi[a] - inner.hi[a]});
  return m;
}

GridDomain::GridDomain(bool full, Box w, std::vector<int> counts)
    : full_(full), window_(std::move(w)), counts_(std::move(counts)) {
  const int m = static_cast<int>(counts_.size());
  if (m != 1 && m != 2) throw InputError("grid dimension must be 1 or 2");
  if (window_.dim() != m) throw InputError("window dimension does not match grid");
  for (int a = 0; a < m; ++a) {
    if (counts_[a] < 1) throw InputError("grid counts must be positive");
    if (!(window_.lo[a] >= 0.0 && window_.lo[a] < window_.hi[a] && window_.hi[a] <= kTwoPi))
      throw InputError("window must lie inside the fundamental domain [0, 2π]^m");
  }
  first_.assign(m, 0);
  extent_.assign(m, 0);
  size_ = 1;
  for (int a = 0; a < m; ++a) {
    if (full_) {
      extent_[a] = counts_[a];
    } else {
      int f = -1, l = -1;
      for (int i = 0; i < counts_[a]; ++i) {
        const double x = kTwoPi * i / counts_[a];
        if (x > window_.lo[a] && x < window_.hi[a]) {
          if (f < 0) f = i;
          l = i;
        }
      }
      first_[a] = std::max(f, 0);
      extent_[a] = f < 0 ? 0 : l - f + 1;
    }
    size_ *= static_cast<std::size_t>(extent_[a]);
  }
}

GridDomain GridDomain::full_torus(int m, std::vector<int> counts) {
  if (static_cast<int>(counts.size()) != m) throw InputError("one grid count per axis required");
  return GridDomain(true, Box{std::vector<double>(m, 0.0), std::vector<double>(m, kTwoPi)},
                    std::move(counts));
}

GridDomain GridDomain::full_torus(int m, int count) {
  return full_torus(m, std::vector<int>(m, count));
}

GridDomain GridDomain::window(Box w, std::vector<int> counts) {
  return GridDomain(false, std::move(w), std::move(counts));
}

double GridDomain::spacing(int axis) const { return kTwoPi / counts_.at(axis); }

std::vector<int> GridDomain::grid_index(std::size_t node) const {
  const int m = dim();
  std::vector<int> idx(m);
  for (int a = m - 1; a >= 0; --a) {
    idx[a] = first_[a] + static_cast<int>(node % extent_[a]);
    node /= extent_[a];
  }
  return idx;
}

std::size_t GridDomain::node_from_grid_index(std::span<const int> idx) const {
  std::size_t node = 0;
  for (int a = 0; a < dim(); ++a) {
    const int local = idx[a] - first_[a];
    if (local < 0 || local >= extent_[a]) throw InputError("grid index outside the mask");
    node = node * extent_[a] + local;
  }
  return node;
}

std::vector<double> GridDomain::node(std::size_t i) const {
  const auto idx = grid_index(i);
  std::vector<double> x(dim());
  for (int a = 0; a < dim(); ++a) x[a] = kTwoPi * idx[a] / counts_[a];
  return x;
}

std::size_t GridDomain::grid_flat(std::size_t node) const {
  const auto idx = grid_index(node);
  std::size_t flat = 0;
  for (int a = 0; a < dim(); ++a) flat = flat * counts_[a] + idx[a];
  return flat;
}

bool GridDomain::contains(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) return false;
  if (full_) {
    for (double v : x)
      if (!std::isfinite(v)) return false;
    return true;
  }
  return window_.contains(x);
}

std::optional<std::size_t> GridDomain::node_at(std::span<const double> x, double tol) const {
  if (static_cast<int>(x.size()) != dim()) return std::nullopt;
  std::vector<int> idx(dim());
  for (int a = 0; a < dim(); ++a) {
    const double h = spacing(a);
    double v = full_ ? wrap_angle(x[a]) : x[a];
    long i = std::lround(v / h);
    if (std::abs(v - i * h) > tol) return std::nullopt;
    if (full_) i = ((i % counts_[a]) + counts_[a]) % counts_[a];
    if (i < first_[a] || i >= first_[a] + extent_[a]) return std::nullopt;
    idx[a] = static_cast<int>(i);
  }
  return node_from_grid_index(idx);
}

bool GridDomain::operator==(const GridDomain& other) const {
  return full_ == other.full_ && counts_ == other.counts_ && window_.lo == other.window_.lo &&
         window_.hi == other.window_.hi;
}

// ---------------------------------------------------------------------------
// SampledField

std::string interpolation_tag(Interpolation i) {
  return i == Interpolation::Representative ? "representative" : "cubic";
}

SampledField::SampledField(GridDomain domain, int components, std::vector<double> values)
    : domain_(std::move(domain)), components_(components), values_(std::move(values)) {
  if (components_ < 1) throw InputError("component count must be >= 1");
  if (values_.size() != domain_.size() * components_)
    throw InputError("value count does not match masked-node count");
  for (double v : values_)
    if (!std::isfinite(v)) throw InputError("sampled field holds a non-finite value");
}

SampledField::SampledField(GridDomain domain, int components, PointFunction representative)
    : domain_(std::move(domain)), components_(components), rep_(std::move(representative)) {
  if (components_ < 1) throw InputError("component count must be >= 1");
  values_.resize(domain_.size() * components_);
  for (std::size_t i = 0; i < domain_.size(); ++i) {
    const auto x = domain_.node(i);
    rep_(x, std::span<double>(values_.data() + i * components_, components_));
  }
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i]))
      throw NumericError("non-finite value at node " + std::to_string(i / components_) + " " +
                         point_string(domain_.node(i / components_)));
}

SampledField::SampledField(GridDomain domain, int components, std::vector<double> values,
                           PointFunction representative)
    : SampledField(std::move(domain), components, std::move(values)) {
  rep_ = std::move(representative);
}

std::span<const double> SampledField::value(std::size_t node) const {
  return {values_.data() + node * components_, static_cast<std::size_t>(components_)};
}

void SampledField::evaluate(std::span<const double> x, std::span<double> out) const {
  if (!domain_.contains(x))
    throw DomainError("point " + point_string(x) + " lies outside the field's window");
  if (rep_) {
    rep_(x, out);
    return;
  }
  if (auto node = domain_.node_at(x, 1e-12)) {
    const auto v = value(*node);
    std::copy(v.begin(), v.end(), out.begin());
    return;
  }
  cubic(x, out);
}

std::vector<double> SampledField::evaluate(std::span<const double> x) const {
  std::vector<double> out(components_);
  evaluate(x, out);
  return out;
}

void SampledField::cubic(std::span<const double> x, std::span<double> out) const {
  const int m = domain_.dim();
  // Per-axis stencil: grid indices and weights.
  std::vector<std::vector<int>> idx(m);
  std::vector<std::vector<double>> w(m);
  for (int a = 0; a < m; ++a) {
    const double h = domain_.spacing(a);
    const int n = domain_.counts()[a];
    if (domain_.is_full()) {
      const double r = wrap_angle(x[a]) / h;
      const int count = std::min(4, n);
      const int start = static_cast<int>(std::floor(r)) - (count - 1) / 2;
      w[a].resize(count);
      lagrange_weights(start, count, r, w[a]);
      for (int b = 0; b < count; ++b) idx[a].push_back(((start + b) % n + n) % n);
    } else {
      const int f = domain_.first()[a];
      const int e = domain_.extent()[a];
      const int count = std::min(4, e);
      const double r = x[a] / h;
      int start = static_cast<int>(std::floor(r)) - 1;
      start = std::clamp(start, f, f + e - count);
      w[a].resize(count);
      lagrange_weights(start, count, r, w[a]);
      for (int b = 0; b < count; ++b) idx[a].push_back(start + b);
    }
  }
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<int> at(m);
  if (m == 1) {
    for (std::size_t i = 0; i < idx[0].size(); ++i) {
      at[0] = idx[0][i];
      const auto v = value(domain_.node_from_grid_index(at));
      for (int c = 0; c < components_; ++c) out[c] += w[0][i] * v[c];
    }
  } else {
    for (std::size_t i = 0; i < idx[0].size(); ++i)
      for (std::size_t j = 0; j < idx[1].size(); ++j) {
        at[0] = idx[0][i];
        at[1] = idx[1][j];
        const auto v = value(domain_.node_from_grid_index(at));
        const double ww = w[0][i] * w[1][j];
        for (int c = 0; c < components_; ++c) out[c] += ww * v[c];
      }
  }
}

SampledField SampledField::detached() const { return SampledField(domain_, components_, values_); }

double SampledField::max_abs() const {
  double m = 0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

SampledField linear_combination(double a, const SampledField& x, double b, const SampledField& y) {
  if (!(x.domain() == y.domain()) || x.components() != y.components())
    throw InputError("sampled fields live on different domains");
  std::vector<double> v(x.values().size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * x.values()[i] + b * y.values()[i];
  if (!x.has_representative() && !y.has_representative())
    return SampledField(x.domain(), x.components(), std::move(v));
  auto px = std::make_shared<const SampledField>(x);
  auto py = std::make_shared<const SampledField>(y);
  const int n = x.components();
  return SampledField(x.domain(), n, [px, py, a, b, n](std::span<const double> p, std::span<double> out) {
    std::vector<double> tmp(n);
    px->evaluate(p, out);
    py->evaluate(p, tmp);
    for (int c = 0; c < n; ++c) out[c] = a * out[c] + b * tmp[c];
  });
}

// ---------------------------------------------------------------------------
// sample / synthesize / restrict

SampledField sample(const BandlimitedField& a, const GridDomain& grid) {
  if (grid.dim() != a.dim()) throw InputError("grid and field dimensions differ");
  if (grid.is_full())
    for (int n : grid.counts())
      if (n < 2 * a.modes() + 1)
        throw InputError("aliasing: full-torus grid needs at least 2N+1 nodes per axis (got " +
                         std::to_string(n) + " for N = " + std::to_string(a.modes()) + ")");
  const int N = a.modes();
  const int w = 2 * N + 1;
  const int m = a.dim();
  const int nc = a.components();
  // Phase tables over the masked index ranges.
  std::vector<std::vector<std::vector<std::complex<double>>>> tab(m);
  for (int ax = 0; ax < m; ++ax)
    for (int i = 0; i < grid.extent()[ax]; ++i)
      tab[ax].push_back(phases(N, kTwoPi * (grid.first()[ax] + i) / grid.counts()[ax]));

  std::vector<double> values(grid.size() * nc);
  for (int comp = 0; comp < nc; ++comp) {
    const std::complex<double>* c = a.coeffs().data() + comp * a.modes_per_component();
    if (m == 1) {
      for (int i = 0; i < grid.extent()[0]; ++i) {
        std::complex<double> acc = 0;
        for (int k = 0; k < w; ++k) acc += c[k] * tab[0][i][k];
        values[i * nc + comp] = acc.real();
      }
    } else {
      std::vector<std::complex<double>> row(w);
      for (int i = 0; i < grid.extent()[0]; ++i) {
        std::fill(row.begin(), row.end(), 0.0);
        for (int k0 = 0; k0 < w; ++k0)
          for (int k1 = 0; k1 < w; ++k1) row[k1] += tab[0][i][k0] * c[k0 * w + k1];
        for (int j = 0; j < grid.extent()[1]; ++j) {
          std::complex<double> acc = 0;
          for (int k1 = 0; k1 < w; ++k1) acc += row[k1] * tab[1][j][k1];
          values[(static_cast<std::size_t>(i) * grid.extent()[1] + j) * nc + comp] = acc.real();
        }
      }
    }
  }
  auto parent = std::make_shared<const BandlimitedField>(a);
  return SampledField(grid, nc, std::move(values),
                      [parent](std::span<const double> x, std::span<double> out) { parent->evaluate(x, out); });
}

BandlimitedField synthesize(const SampledField& v, int modes) {
  const GridDomain& g = v.domain();
  if (!g.is_full()) throw InputError("synthesize needs a full-torus grid; use min_norm_extension");
  for (int n : g.counts())
    if (n < 2 * modes + 1)
      throw InputError("aliasing: synthesize needs at least 2N+1 nodes per axis (got " +
                       std::to_string(n) + " for N = " + std::to_string(modes) + ")");
  const int m = g.dim();
  const int w = 2 * modes + 1;
  const int nc = v.components();
  std::vector<std::vector<std::vector<std::complex<double>>>> tab(m);  // [axis][node][k]
  for (int ax = 0; ax < m; ++ax)
    for (int i = 0; i < g.counts()[ax]; ++i)
      tab[ax].push_back(phases(modes, -kTwoPi * i / g.counts()[ax]));

  const std::size_t per = static_cast<std::size_t>(m == 1 ? w : w * w);
  std::vector<std::complex<double>> coeffs(per * nc);
  for (int comp = 0; comp < nc; ++comp) {
    std::complex<double>* c = coeffs.data() + comp * per;
    if (m == 1) {
      const int n0 = g.counts()[0];
      for (int k = 0; k < w; ++k) {
        std::complex<double> acc = 0;
        for (int i = 0; i < n0; ++i) acc += v.values()[i * nc + comp] * tab[0][i][k];
        c[k] = acc / static_cast<double>(n0);
      }
    } else {
      const int n0 = g.counts()[0], n1 = g.counts()[1];
      // Transform along axis 1 first: partial[i][k1].
      std::vector<std::complex<double>> partial(static_cast<std::size_t>(n0) * w);
      for (int i = 0; i < n0; ++i)
        for (int k1 = 0; k1 < w; ++k1) {
          std::complex<double> acc = 0;
          for (int j = 0; j < n1; ++j)
            acc += v.values()[(static_cast<std::size_t>(i) * n1 + j) * nc + comp] * tab[1][j][k1];
          partial[static_cast<std::size_t>(i) * w + k1] = acc;
        }
      for (int k0 = 0; k0 < w; ++k0)
        for (int k1 = 0; k1 < w; ++k1) {
          std::complex<double> acc = 0;
          for (int i = 0; i < n0; ++i) acc += tab[0][i][k0] * partial[static_cast<std::size_t>(i) * w + k1];
          c[k0 * w + k1] = acc / static_cast<double>(n0 * n1);
        }
    }
  }
  return BandlimitedField::real_projection(m, modes, nc, std::move(coeffs));
}

SampledField restrict_to(const BandlimitedField& a, const GridDomain& u) {
  if (u.empty()) throw InputError("restriction to an empty mask");
  return sample(a, u);
}

SampledField restrict_to(const SampledField& field, const GridDomain& smaller) {
  if (smaller.empty()) throw InputError("restriction to an empty mask");
  const GridDomain& big = field.domain();
  if (smaller.counts() != big.counts()) throw InputError("restriction needs matching grid counts");
  const int nc = field.components();
  std::vector<double> values(smaller.size() * nc);
  for (std::size_t i = 0; i < smaller.size(); ++i) {
    const auto x = smaller.node(i);
    if (!big.contains(x)) throw InputError("smaller window is not contained in the field's window");
    const auto src = field.value(big.node_from_grid_index(smaller.grid_index(i)));
    std::copy(src.begin(), src.end(), values.begin() + i * nc);
  }
  if (!field.has_representative()) return SampledField(smaller, nc, std::move(values));
  auto parent = std::make_shared<const SampledField>(field);
  return SampledField(smaller, nc,
                      [parent](std::span<const double> x, std::span<double> out) { parent->evaluate(x, out); });
}

// ---------------------------------------------------------------------------
// Minimum-norm extension

ExtensionOperator::ExtensionOperator(const GridDomain& domain, SobolevOrder s, int modes,
                                     WeightConvention convention)
    : domain_(domain), modes_(modes), m_(domain.dim()) {
  if (domain.empty()) throw InputError("extension from an empty mask");
  if (modes < 0) throw InputError("mode cutoff must be >= 0");
  // Half set: 0, then every k whose first nonzero coordinate is positive.
  half_.push_back(std::vector<int>(m_, 0));
  if (m_ == 1) {
    for (int k = 1; k <= modes; ++k) half_.push_back({k});
  } else {
    for (int k1 = 1; k1 <= modes; ++k1) half_.push_back({0, k1});
    for (int k0 = 1; k0 <= modes; ++k0)
      for (int k1 = -modes; k1 <= modes; ++k1) half_.push_back({k0, k1});
  }
  const Eigen::Index params = 2 * static_cast<Eigen::Index>(half_.size()) - 1;
  const Eigen::Index rows = static_cast<Eigen::Index>(domain.size());
  scale_.resize(params);
  design_.resize(rows, params);
  for (std::size_t h = 0; h < half_.size(); ++h) {
    double ksq = 0;
    for (int v : half_[h]) ksq += static_cast<double>(v) * v;
    const double wgt = mode_weight(ksq, s, convention);
    if (h == 0) {
      scale_(0) = std::sqrt(wgt);
    } else {
      scale_(2 * h - 1) = std::sqrt(2.0 * wgt);
      scale_(2 * h) = std::sqrt(2.0 * wgt);
    }
  }
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto x = domain.node(static_cast<std::size_t>(r));
    design_(r, 0) = 1.0 / scale_(0);
    for (std::size_t h = 1; h < half_.size(); ++h) {
      double phase = 0;
      for (int a = 0; a < m_; ++a) phase += half_[h][a] * x[a];
      design_(r, 2 * h - 1) = 2.0 * std::cos(phase) / scale_(2 * h - 1);
      design_(r, 2 * h) = -2.0 * std::sin(phase) / scale_(2 * h);
    }
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(design_, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double floor = sv.size() ? 1e-10 * sv(0) : 0.0;
  Eigen::VectorXd inv(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    inv(i) = sv(i) > floor ? 1.0 / sv(i) : 0.0;
    if (sv(i) > floor) ++rank_;
  }
  pinv_ = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

BandlimitedField ExtensionOperator::apply(const SampledField& data) const {
  if (!(data.domain() == domain_)) throw InputError("data lives on a different domain");
  const int nc = data.components();
  const Eigen::Index rows = static_cast<Eigen::Index>(domain_.size());
  BandlimitedField shape = BandlimitedField::zero(m_, modes_, nc);
  std::vector<std::complex<double>> coeffs(shape.coeffs().size());
  const std::size_t per = shape.modes_per_component();
  double worst = 0, data_scale = 1.0;
  for (int comp = 0; comp < nc; ++comp) {
    Eigen::VectorXd g(rows);
    for (Eigen::Index r = 0; r < rows; ++r) g(r) = data.values()[r * nc + comp];
    data_scale = std::max(data_scale, g.cwiseAbs().maxCoeff());
    const Eigen::VectorXd u = pinv_ * g;
    worst = std::max(worst, (design_ * u - g).cwiseAbs().maxCoeff());
    std::complex<double>* c = coeffs.data() + comp * per;
    c[shape.flat_index(half_[0])] = u(0) / scale_(0);
    for (std::size_t h = 1; h < half_.size(); ++h) {
      const double re = u(2 * h - 1) / scale_(2 * h - 1);
      const double im = u(2 * h) / scale_(2 * h);
      std::vector<int> neg(half_[h]);
      for (int& v : neg) v = -v;
      c[shape.flat_index(half_[h])] = {re, im};
      c[shape.flat_index(neg)] = {re, -im};
    }
  }
  if (worst > 1e-8 * data_scale) {
    std::ostringstream os;
    os << "interpolation infeasible at cutoff N = " << modes_ << ": residual " << worst;
    throw SolverError(os.str(), worst);
  }
  return BandlimitedField(m_, modes_, nc, std::move(coeffs), true);
}

BandlimitedField min_norm_extension(const SampledField& data, SobolevOrder s, int modes,
                                    WeightConvention convention) {
  return ExtensionOperator(data.domain(), s, modes, convention).apply(data);
}

// ---------------------------------------------------------------------------
// Cutoffs

double smooth_step(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

SmoothCutoff::SmoothCutoff(std::vector<double> center, std::vector<double> radius,
                           double plateau_fraction)
    : center_(std::move(center)), radius_(std::move(radius)), plateau_(plateau_fraction) {
  if (center_.size() != radius_.size() || center_.empty())
    throw InputError("cutoff center and radius must have the same nonzero dimension");
  for (double r : radius_)
    if (!(r > 0.0)) throw InputError("cutoff radius must be positive");
  if (!(plateau_ >= 0.0 && plateau_ < 1.0)) throw InputError("plateau fraction must lie in [0, 1)");
}

SmoothCutoff SmoothCutoff::for_box(const Box& support, double plateau_fraction) {
  std::vector<double> c(support.dim()), r(support.dim());
  for (int a = 0; a < support.dim(); ++a) {
    c[a] = 0.5 * (support.lo[a] + support.hi[a]);
    r[a] = 0.5 * (support.hi[a] - support.lo[a]);
  }
  return SmoothCutoff(std::move(c), std::move(r), plateau_fraction);
}

double SmoothCutoff::operator()(std::span<const double> x) const {
  double v = 1.0;
  for (std::size_t a = 0; a < center_.size(); ++a) {
    const double u = std::abs(x[a] - center_[a]) / radius_[a];
    if (u >= 1.0) return 0.0;
    if (u > plateau_) v *= smooth_step((1.0 - u) / (1.0 - plateau_));
  }
  return v;
}

Box SmoothCutoff::support() const {
  Box b;
  for (std::size_t a = 0; a < center_.size(); ++a) {
    b.lo.push_back(center_[a] - radius_[a]);
    b.hi.push_back(center_[a] + radius_[a]);
  }
  return b;
}

Box SmoothCutoff::plateau() const {
  Box b;
  for (std::size_t a = 0; a < center_.size(); ++a) {
    b.lo.push_back(center_[a] - plateau_ * radius_[a]);
    b.hi.push_back(center_[a] + plateau_ * radius_[a]);
  }
  return b;
}

namespace {
void require_support_inside(const SmoothCutoff& h, const Box& outer) {
  const Box s = h.support();
  if (s.dim() != outer.dim()) throw InputError("cutoff dimension does not match the field");
  for (int a = 0; a < s.dim(); ++a)
    if (s.lo[a] < outer.lo[a] || s.hi[a] > outer.hi[a])
      throw InputError("cutoff support is not contained in the field's domain");
}
}  // namespace

SampledField cutoff_multiply(const SmoothCutoff& h, const SampledField& field) {
  require_support_inside(h, field.domain().window_box());
  auto parent = std::make_shared<const SampledField>(field);
  const int nc = field.components();
  return SampledField(field.domain(), nc, [parent, h, nc](std::span<const double> x, std::span<double> out) {
    const double hv = h(x);
    if (hv == 0.0) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    parent->evaluate(x, out);
    for (int c = 0; c < nc; ++c) out[c] *= hv;
  });
}

BandlimitedField cutoff_multiply(const SmoothCutoff& h, const BandlimitedField& field) {
  const int m = field.dim();
  require_support_inside(h, Box{std::vector<double>(m, 0.0), std::vector<double>(m, kTwoPi)});
  const int modes = 2 * field.modes();
  const GridDomain grid = GridDomain::full_torus(m, 2 * modes + 1);
  const SampledField values = sample(field, grid);
  const int nc = field.components();
  std::vector<double> prod(values.values());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double hv = h(grid.node(i));
    for (int c = 0; c < nc; ++c) prod[i * nc + c] *= hv;
  }
  return synthesize(SampledField(grid, nc, std::move(prod)), modes);
}

// ---------------------------------------------------------------------------
// Diffeomorphisms and pullback

Diffeo Diffeo::identity(const Box& box) {
  const int m = box.dim();
  return Diffeo{[](std::span<const double> x) { return std::vector<double>(x.begin(), x.end()); },
                [](std::span<const double> y) { return std::vector<double>(y.begin(), y.end()); },
                [m](std::span<const double>) { return Eigen::MatrixXd::Identity(m, m).eval(); },
                box, box};
}

Diffeo Diffeo::translation(std::vector<double> offset, const Box& domain) {
  const int m = static_cast<int>(offset.size());
  Box codomain = domain;
  for (int a = 0; a < m && a < domain.dim(); ++a) {
    codomain.lo[a] += offset[a];
    codomain.hi[a] += offset[a];
  }
  return Diffeo{[offset](std::span<const double> x) {
                  std::vector<double> y(x.begin(), x.end());
                  for (std::size_t a = 0; a < y.size(); ++a) y[a] += offset[a];
                  return y;
                },
                [offset](std::span<const double> y) {
                  std::vector<double> x(y.begin(), y.end());
                  for (std::size_t a = 0; a < x.size(); ++a) x[a] -= offset[a];
                  return x;
                },
                [m](std::span<const double>) { return Eigen::MatrixXd::Identity(m, m).eval(); },
                domain, codomain};
}

Diffeo Diffeo::affine(Eigen::MatrixXd linear, Eigen::VectorXd offset, const Box& domain) {
  const Eigen::MatrixXd inv = linear.inverse();
  if (!inv.allFinite() || std::abs(linear.determinant()) < 1e-14)
    throw InputError("affine map is not invertible");
  Box codomain{std::vector<double>(domain.dim(), std::numeric_limits<double>::infinity()),
               std::vector<double>(domain.dim(), -std::numeric_limits<double>::infinity())};
  for (int corner = 0; corner < (1 << domain.dim()); ++corner) {
    Eigen::VectorXd x(domain.dim());
    for (int a = 0; a < domain.dim(); ++a) x(a) = (corner >> a) & 1 ? domain.hi[a] : domain.lo[a];
    const Eigen::VectorXd y = linear * x + offset;
    for (int a = 0; a < domain.dim(); ++a) {
      codomain.lo[a] = std::min(codomain.lo[a], y(a));
      codomain.hi[a] = std::max(codomain.hi[a], y(a));
    }
  }
  return Diffeo{[linear, offset](std::span<const double> x) {
                  const Eigen::VectorXd y =
                      linear * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size()) + offset;
                  return std::vector<double>(y.data(), y.data() + y.size());
                },
                [inv, offset](std::span<const double> y) {
                  const Eigen::VectorXd x =
                      inv * (Eigen::Map<const Eigen::VectorXd>(y.data(), y.size()) - offset);
                  return std::vector<double>(x.data(), x.data() + x.size());
                },
                [linear](std::span<const double>) { return linear; }, domain, codomain};
}

Diffeo Diffeo::compose(const Diffeo& inner) const {
  auto outer_f = forward, outer_i = inverse;
  auto outer_j = jacobian;
  auto inner_f = inner.forward, inner_i = inner.inverse;
  auto inner_j = inner.jacobian;
  return Diffeo{[outer_f, inner_f](std::span<const double> x) { return outer_f(inner_f(x)); },
                [outer_i, inner_i](std::span<const double> y) { return inner_i(outer_i(y)); },
                [outer_j, inner_j, inner_f](std::span<const double> x) {
                  return (outer_j(inner_f(x)) * inner_j(x)).eval();
                },
                inner.domain, codomain};
}

DiffeoCheck check_diffeo(const Diffeo& theta, std::span<const std::vector<double>> points) {
  DiffeoCheck out;
  out.min_abs_det = std::numeric_limits<double>::infinity();
  for (const auto& y : points) {
    const auto back = theta.forward(theta.inverse(y));
    double d = 0;
    for (std::size_t a = 0; a < y.size(); ++a) d = std::max(d, std::abs(back[a] - y[a]));
    out.inverse_residual = std::max(out.inverse_residual, d);
    out.min_abs_det = std::min(out.min_abs_det, std::abs(theta.jacobian(theta.inverse(y)).determinant()));
  }
  return out;
}

SampledField pullback(const Diffeo& theta, const SampledField& field, const GridDomain& target) {
  if (target.dim() != field.domain().dim()) throw InputError("pullback dimension mismatch");
  if (target.empty()) throw InputError("pullback onto an empty mask");
  if (!target.is_full() && theta.domain.dim() == target.dim()) {
    const Box& w = target.window_box();
    for (int a = 0; a < w.dim(); ++a)
      if (w.lo[a] < theta.domain.lo[a] || w.hi[a] > theta.domain.hi[a])
        throw InputError("target window is not contained in the diffeomorphism's domain");
  }
  for (std::size_t i = 0; i < target.size(); ++i) {
    const auto x = target.node(i);
    const auto y = theta.forward(x);
    if (!field.domain().contains(y))
      throw DomainError("pullback: node " + std::to_string(i) + " " + point_string(x) +
                        " maps to " + point_string(y) + " outside the field's window");
  }
  auto parent = std::make_shared<const SampledField>(field);
  auto fwd = theta.forward;
  return SampledField(target, field.components(),
                      [parent, fwd](std::span<const double> x, std::span<double> out) {
                        parent->evaluate(fwd(x), out);
                      });
}

SampledField nemytskij(const PointwiseMap& f, const SampledField& field) {
  if (f.in_dim != field.components()) throw InputError("nemytskij: map input dimension mismatch");
  const GridDomain& d = field.domain();
  std::vector<double> values(d.size() * f.out_dim);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto x = d.node(i);
    std::span<double> out(values.data() + i * f.out_dim, f.out_dim);
    f.fn(x, field.value(i), out);
    for (double v : out)
      if (!std::isfinite(v))
        throw NumericError("nemytskij: non-finite value at node " + std::to_string(i) + " " + point_string(x));
  }
  auto parent = std::make_shared<const SampledField>(field);
  auto fn = f.fn;
  const int in = f.in_dim;
  return SampledField(d, f.out_dim, [parent, fn, in](std::span<const double> x, std::span<double> out) {
    std::vector<double> y(in);
    parent->evaluate(x, y);
    fn(x, y, out);
  });
}

SampledField extend_by_zero(const SampledField& field, const GridDomain& larger) {
  const GridDomain& small = field.domain();
  if (larger.counts() != small.counts()) throw InputError("extension needs matching grid counts");
  if (!larger.is_full()) {
    for (int a = 0; a < small.dim(); ++a)
      if (small.window_box().lo[a] < larger.window_box().lo[a] ||
          small.window_box().hi[a] > larger.window_box().hi[a])
        throw InputError("field window is not contained in the larger window");
  }
  const int nc = field.components();
  // Support must stay off the outermost layer of nodes.
  for (std::size_t i = 0; i < small.size(); ++i) {
    const auto idx = small.grid_index(i);
    bool edge = false;
    for (int a = 0; a < small.dim(); ++a)
      edge = edge || idx[a] == small.first()[a] || idx[a] == small.first()[a] + small.extent()[a] - 1;
    if (!edge) continue;
    for (double v : field.value(i))
      if (v != 0.0) throw InputError("field support is not compact in its window");
  }
  std::vector<double> values(larger.size() * nc, 0.0);
  for (std::size_t i = 0; i < larger.size(); ++i) {
    const auto x = larger.node(i);
    if (!small.contains(x)) continue;
    const auto src = field.value(small.node_from_grid_index(larger.grid_index(i)));
    std::copy(src.begin(), src.end(), values.begin() + i * nc);
  }
  auto parent = std::make_shared<const SampledField>(field);
  auto inner = small;
  return SampledField(larger, nc, std::move(values), [parent, inner](std::span<const double> x, std::span<double> out) {
    if (inner.contains(x))
      parent->evaluate(x, out);
    else
      std::fill(out.begin(), out.end(), 0.0);
  });
}

std::vector<double> rellich_spectrum(SobolevOrder s, SobolevOrder t, int modes, int m,
                                     WeightConvention convention) {
  if (!(s.value() > t.value())) throw InputError("rellich_spectrum needs s > t");
  if (m != 1 && m != 2) throw InputError("torus dimension must be 1 or 2");
  if (modes < 0) throw InputError("mode cutoff must be >= 0");
  const double e = (t.value() - s.value()) / (convention == WeightConvention::Paper ? 4.0 : 2.0);
  std::vector<double> out;
  if (m == 1) {
    out.reserve(2 * static_cast<std::size_t>(modes) + 1);
    out.push_back(1.0);
    for (int k = 1; k <= modes; ++k) {
      const double v = std::pow(1.0 + static_cast<double>(k) * k, e);
      out.push_back(v);
      out.push_back(v);
    }
    return out;
  }
  for (int k0 = -modes; k0 <= modes; ++k0)
    for (int k1 = -modes; k1 <= modes; ++k1)
      out.push_back(std::pow(1.0 + static_cast<double>(k0) * k0 + static_cast<double>(k1) * k1, e));
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

}  // namespace mapgroups

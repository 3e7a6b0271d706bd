#include "mapgroups/lie_group.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mapgroups/errors.hpp"
#include "mapgroups/numerics.hpp"

namespace mapgroups {

MatrixGroup::MatrixGroup(std::string name, std::vector<Eigen::MatrixXd> basis, double q_radius, double v_radius)
    : name_(std::move(name)), basis_(std::move(basis)), q_radius_(q_radius), v_radius_(v_radius) {
  const Eigen::Index d = basis_.front().rows();
  Eigen::MatrixXd b(d * d, static_cast<Eigen::Index>(basis_.size()));
  for (std::size_t i = 0; i < basis_.size(); ++i) b.col(i) = basis_[i].reshaped();
  coord_solver_ = (b.transpose() * b).inverse() * b.transpose();
}

Eigen::MatrixXd MatrixGroup::hat(std::span<const double> v) const {
  if (static_cast<int>(v.size()) != algebra_dim()) throw InputError("algebra coordinate count mismatch");
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(matrix_dim(), matrix_dim());
  for (std::size_t i = 0; i < v.size(); ++i) x += v[i] * basis_[i];
  return x;
}

std::vector<double> MatrixGroup::vee(const Eigen::MatrixXd& x) const {
  const Eigen::VectorXd c = coord_solver_ * x.reshaped();
  return {c.begin(), c.end()};
}

double MatrixGroup::algebra_norm(std::span<const double> v) const {
  double acc = 0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

Eigen::MatrixXd MatrixGroup::inverse(const Eigen::MatrixXd& g) const { return g.inverse(); }

Eigen::MatrixXd MatrixGroup::identity() const { return Eigen::MatrixXd::Identity(matrix_dim(), matrix_dim()); }

std::vector<double> MatrixGroup::adjoint(const Eigen::MatrixXd& g, std::span<const double> v) const {
  return vee(g * hat(v) * inverse(g));
}

std::vector<double> MatrixGroup::bracket(std::span<const double> a, std::span<const double> b) const {
  const Eigen::MatrixXd x = hat(a), y = hat(b);
  return vee(x * y - y * x);
}

Eigen::Matrix3d rodrigues(const Eigen::Vector3d& v) {
  const double th = v.norm();
  Eigen::Matrix3d x;
  x << 0, -v(2), v(1), v(2), 0, -v(0), -v(1), v(0), 0;
  double a, b;
  if (th < 1e-4) {
    a = 1 - th * th / 6;
    b = 0.5 - th * th / 24;
  } else {
    a = std::sin(th) / th;
    b = (1 - std::cos(th)) / (th * th);
  }
  return Eigen::Matrix3d::Identity() + a * x + b * x * x;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

class SO3 final : public MatrixGroup {
 public:
  SO3() : MatrixGroup("SO3", basis(), std::numbers::pi - 0.1, (std::numbers::pi - 0.1) / 2) {}

  static std::vector<Eigen::MatrixXd> basis() {
    std::vector<Eigen::MatrixXd> b(3, Eigen::MatrixXd::Zero(3, 3));
    b[0](2, 1) = 1, b[0](1, 2) = -1;
    b[1](0, 2) = 1, b[1](2, 0) = -1;
    b[2](1, 0) = 1, b[2](0, 1) = -1;
    return b;
  }

  Eigen::MatrixXd exp(std::span<const double> v) const override {
    if (v.size() != 3) throw InputError("so(3) coordinates need 3 entries");
    return rodrigues(Eigen::Vector3d(v[0], v[1], v[2]));
  }

  double angle(const Eigen::MatrixXd& g) const {
    const Eigen::Vector3d a(g(2, 1) - g(1, 2), g(0, 2) - g(2, 0), g(1, 0) - g(0, 1));
    return std::atan2(0.5 * a.norm(), 0.5 * (g.trace() - 1));
  }

  bool in_chart(const Eigen::MatrixXd& g) const override { return angle(g) < q_radius(); }

  std::vector<double> log(const Eigen::MatrixXd& g) const override {
    const double th = angle(g);
    if (!(th < q_radius())) throw ChartDomainError("rotation angle " + fmt(th) + " is outside the log chart");
    const Eigen::Vector3d a = 0.5 * Eigen::Vector3d(g(2, 1) - g(1, 2), g(0, 2) - g(2, 0), g(1, 0) - g(0, 1));
    const double f = th < 1e-6 ? 1 + th * th / 6 : th / std::sin(th);
    return {f * a(0), f * a(1), f * a(2)};
  }

  double relation_defect(const Eigen::MatrixXd& g) const override {
    if (g.rows() != 3 || g.cols() != 3) return std::numeric_limits<double>::infinity();
    return std::max((g.transpose() * g - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(),
                    std::abs(g.determinant() - 1));
  }

  Eigen::MatrixXd project(const Eigen::MatrixXd& g) const override {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::MatrixXd u = svd.matrixU();
    if ((u * svd.matrixV().transpose()).determinant() < 0) u.col(2) *= -1;
    return u * svd.matrixV().transpose();
  }

  Eigen::MatrixXd inverse(const Eigen::MatrixXd& g) const override { return g.transpose(); }
};

// Left multiplication by the quaternion (w, x, y, z) on ℝ⁴.
Eigen::Matrix4d left_quaternion(double w, double x, double y, double z) {
  Eigen::Matrix4d l;
  l << w, -x, -y, -z, x, w, -z, y, y, z, w, -x, z, -y, x, w;
  return l;
}

class SU2 final : public MatrixGroup {
 public:
  SU2() : MatrixGroup("SU2", basis(), 2 * std::numbers::pi - 0.1, (2 * std::numbers::pi - 0.1) / 2) {}

  static std::vector<Eigen::MatrixXd> basis() {
    return {0.5 * left_quaternion(0, 1, 0, 0), 0.5 * left_quaternion(0, 0, 1, 0), 0.5 * left_quaternion(0, 0, 0, 1)};
  }

  static Eigen::Vector4d quaternion(const Eigen::MatrixXd& g) {
    Eigen::Vector4d q;
    const Eigen::Matrix4d e[4] = {left_quaternion(1, 0, 0, 0), left_quaternion(0, 1, 0, 0),
                                  left_quaternion(0, 0, 1, 0), left_quaternion(0, 0, 0, 1)};
    for (int a = 0; a < 4; ++a) q(a) = (g.array() * e[a].array()).sum() / 4;
    return q;
  }

  Eigen::MatrixXd exp(std::span<const double> v) const override {
    if (v.size() != 3) throw InputError("su(2) coordinates need 3 entries");
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    const double half = n / 2;
    const double f = half < 1e-4 ? 0.5 * (1 - half * half / 6) : std::sin(half) / n;
    return left_quaternion(std::cos(half), f * v[0], f * v[1], f * v[2]);
  }

  double angle(const Eigen::MatrixXd& g) const {
    const Eigen::Vector4d q = quaternion(g);
    return 2 * std::atan2(q.tail<3>().norm(), q(0));
  }

  bool in_chart(const Eigen::MatrixXd& g) const override { return angle(g) < q_radius(); }

  std::vector<double> log(const Eigen::MatrixXd& g) const override {
    const Eigen::Vector4d q = quaternion(g);
    const double s = q.tail<3>().norm();
    const double th = 2 * std::atan2(s, q(0));
    if (!(th < q_radius())) throw ChartDomainError("quaternion angle " + fmt(th) + " is outside the log chart");
    const double f = s < 1e-12 ? 2 / q(0) : th / s;
    return {f * q(1), f * q(2), f * q(3)};
  }

  double relation_defect(const Eigen::MatrixXd& g) const override {
    if (g.rows() != 4 || g.cols() != 4) return std::numeric_limits<double>::infinity();
    const Eigen::Vector4d q = quaternion(g);
    return std::max((g.transpose() * g - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(),
                    (g - left_quaternion(q(0), q(1), q(2), q(3))).cwiseAbs().maxCoeff());
  }

  Eigen::MatrixXd project(const Eigen::MatrixXd& g) const override {
    const Eigen::Vector4d q = quaternion(g).normalized();
    return left_quaternion(q(0), q(1), q(2), q(3));
  }

  Eigen::MatrixXd inverse(const Eigen::MatrixXd& g) const override { return g.transpose(); }
};

// expm1(x)/x, continuous at 0.
double phi1(double x) { return std::abs(x) < 1e-8 ? 1 + x / 2 : std::expm1(x) / x; }

class UT2 final : public MatrixGroup {
 public:
  UT2()
      : MatrixGroup("UT2", basis(), std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity()) {}

  static std::vector<Eigen::MatrixXd> basis() {
    std::vector<Eigen::MatrixXd> b(3, Eigen::MatrixXd::Zero(2, 2));
    b[0](0, 0) = 1;
    b[1](1, 1) = 1;
    b[2](0, 1) = 1;
    return b;
  }

  Eigen::MatrixXd exp(std::span<const double> v) const override {
    if (v.size() != 3) throw InputError("ut(2) coordinates need 3 entries");
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
    g(0, 0) = std::exp(v[0]);
    g(1, 1) = std::exp(v[1]);
    g(0, 1) = v[2] * std::exp(v[1]) * phi1(v[0] - v[1]);
    return g;
  }

  bool in_chart(const Eigen::MatrixXd& g) const override {
    return g.rows() == 2 && g(0, 0) > 0 && g(1, 1) > 0 && std::isfinite(g(0, 1));
  }

  std::vector<double> log(const Eigen::MatrixXd& g) const override {
    if (!in_chart(g)) throw ChartDomainError("matrix has a nonpositive diagonal entry");
    const double p = std::log(g(0, 0)), q = std::log(g(1, 1));
    return {p, q, g(0, 1) / (g(1, 1) * phi1(p - q))};
  }

  double relation_defect(const Eigen::MatrixXd& g) const override {
    if (g.rows() != 2 || g.cols() != 2) return std::numeric_limits<double>::infinity();
    if (!(g(0, 0) > 0 && g(1, 1) > 0)) return std::numeric_limits<double>::infinity();
    return std::abs(g(1, 0));
  }

  Eigen::MatrixXd project(const Eigen::MatrixXd& g) const override {
    Eigen::MatrixXd p = g;
    p(1, 0) = 0;
    return p;
  }

  Eigen::MatrixXd inverse(const Eigen::MatrixXd& g) const override {
    Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(2, 2);
    inv(0, 0) = 1 / g(0, 0);
    inv(1, 1) = 1 / g(1, 1);
    inv(0, 1) = -g(0, 1) / (g(0, 0) * g(1, 1));
    return inv;
  }
};

void require_same(const GroupSection& a, const GroupSection& b) {
  if (a.atlas().fingerprint() != b.atlas().fingerprint()) throw InputError("group sections live on different atlases");
  if (a.group().name() != b.group().name()) throw InputError("group sections take values in different groups");
}

void require_algebra(const Section& s, const MatrixGroup& g) {
  if (s.components() != g.algebra_dim())
    throw InputError("section has " + std::to_string(s.components()) + " components but the algebra of " + g.name() +
                     " has dimension " + std::to_string(g.algebra_dim()));
}

Section values_section(std::shared_ptr<const Atlas> atlas, int n, std::vector<std::vector<double>> values,
                       double tol) {
  std::vector<SampledField> pieces;
  for (std::size_t j = 0; j < atlas->size(); ++j)
    pieces.emplace_back(atlas->chart(j).witness_domain(), n, std::move(values[j]));
  return Section(std::move(atlas), std::move(pieces), tol);
}

}  // namespace

std::shared_ptr<const MatrixGroup> make_group(const std::string& name) {
  if (name == "SO3") return std::make_shared<const SO3>();
  if (name == "SU2") return std::make_shared<const SU2>();
  if (name == "UT2") return std::make_shared<const UT2>();
  throw InputError("unknown group '" + name + "' (built-ins: SO3, SU2, UT2)");
}

GroupSection::GroupSection(std::shared_ptr<const Atlas> atlas, std::shared_ptr<const MatrixGroup> group,
                           std::vector<std::vector<Eigen::MatrixXd>> values, double tol)
    : atlas_(std::move(atlas)), group_(std::move(group)), values_(std::move(values)), tol_(tol) {
  if (!atlas_ || !group_) throw InputError("group section needs an atlas and a group");
  if (values_.size() != atlas_->size()) throw InputError("one matrix array per chart expected");
  const int d = group_->matrix_dim();
  for (std::size_t j = 0; j < values_.size(); ++j) {
    if (values_[j].size() != atlas_->chart(j).witness_domain().size())
      throw InputError("matrix count of chart " + std::to_string(j) + " does not match its witness grid");
    for (std::size_t k = 0; k < values_[j].size(); ++k) {
      const auto& g = values_[j][k];
      if (g.rows() != d || g.cols() != d) throw InputError("matrix has the wrong shape for " + group_->name());
      if (!g.allFinite()) throw NumericError("non-finite matrix entry in chart " + std::to_string(j));
      const double r = group_->relation_defect(g);
      if (r > 1e-10)
        throw InputError("chart " + std::to_string(j) + " node " + std::to_string(k) + " violates the relations of " +
                         group_->name() + " by " + fmt(r));
    }
  }
  const double c = compatibility_defect();
  if (c > tol_) throw IncompatibilityError("group section pieces disagree on overlaps by " + fmt(c), c, {});
}

GroupSection GroupSection::identity(std::shared_ptr<const Atlas> atlas, std::shared_ptr<const MatrixGroup> group) {
  std::vector<std::vector<Eigen::MatrixXd>> v;
  for (const auto& c : atlas->charts()) v.emplace_back(c.witness_domain().size(), group->identity());
  return GroupSection(std::move(atlas), std::move(group), std::move(v));
}

void GroupSection::append_log(std::vector<std::string> lines) {
  for (auto& l : lines) log_.push_back(std::move(l));
}

double GroupSection::max_relation_defect() const {
  double worst = 0;
  for (const auto& chart : values_)
    for (const auto& g : chart) worst = std::max(worst, group_->relation_defect(g));
  return worst;
}

double GroupSection::compatibility_defect() const {
  double worst = 0;
  for (std::size_t j = 0; j < atlas_->size(); ++j) {
    const GridDomain dom = atlas_->chart(j).witness_domain();
    for (std::size_t k = 0; k < dom.size(); ++k) {
      const auto y = dom.node(k);
      for (std::size_t i = 0; i < atlas_->size(); ++i) {
        if (i == j || !atlas_->transition_defined(i, j, y)) continue;
        const auto z = atlas_->transition_eval(i, j, y);
        const GridDomain other = atlas_->chart(i).witness_domain();
        const auto node = other.node_at(z, 1e-9);
        if (!node) continue;
        worst = std::max(worst, (values_[i][*node] - values_[j][k]).cwiseAbs().maxCoeff());
      }
    }
  }
  return worst;
}

namespace {

std::vector<std::string> project_drift(const MatrixGroup& group, std::vector<std::vector<Eigen::MatrixXd>>& v,
                                       double threshold) {
  std::vector<std::string> lines;
  for (std::size_t j = 0; j < v.size(); ++j)
    for (std::size_t k = 0; k < v[j].size(); ++k) {
      const double r = group.relation_defect(v[j][k]);
      if (r > threshold) {
        v[j][k] = group.project(v[j][k]);
        lines.push_back("chart " + std::to_string(j) + " node " + std::to_string(k) + ": relation defect " + fmt(r) +
                        " re-projected");
      }
    }
  return lines;
}

// Builds a section from unchecked nodewise values, projecting drift before validation.
GroupSection assemble(const GroupSection& like, std::vector<std::vector<Eigen::MatrixXd>> v) {
  auto lines = project_drift(like.group(), v, kProjectionThreshold);
  GroupSection out(like.atlas_ptr(), like.group_ptr(), std::move(v), like.tolerance());
  out.append_log(std::move(lines));
  return out;
}

}  // namespace

GroupSection normalize(const GroupSection& g, double threshold) {
  auto v = g.values();
  auto lines = project_drift(g.group(), v, threshold);
  if (lines.empty()) return g;
  GroupSection out(g.atlas_ptr(), g.group_ptr(), std::move(v), g.tolerance());
  out.append_log(g.projection_log());
  out.append_log(std::move(lines));
  return out;
}

GroupSection group_multiply(const GroupSection& a, const GroupSection& b) {
  require_same(a, b);
  auto v = a.values();
  for (std::size_t j = 0; j < v.size(); ++j)
    for (std::size_t k = 0; k < v[j].size(); ++k) v[j][k] = a.at(j, k) * b.at(j, k);
  return assemble(a, std::move(v));
}

GroupSection group_invert(const GroupSection& a) {
  auto v = a.values();
  for (auto& chart : v)
    for (auto& g : chart) g = a.group().inverse(g);
  return assemble(a, std::move(v));
}

GroupSection exp_section(const Section& xi, std::shared_ptr<const MatrixGroup> group) {
  require_algebra(xi, *group);
  std::vector<std::vector<Eigen::MatrixXd>> v;
  for (const auto& piece : xi.pieces()) {
    std::vector<Eigen::MatrixXd> chart;
    for (std::size_t k = 0; k < piece.size(); ++k) chart.push_back(group->exp(piece.value(k)));
    v.push_back(std::move(chart));
  }
  return GroupSection(xi.atlas_ptr(), std::move(group), std::move(v), xi.tolerance());
}

Section log_section(const GroupSection& g) {
  const int n = g.group().algebra_dim();
  std::vector<std::vector<double>> values;
  for (std::size_t j = 0; j < g.values().size(); ++j) {
    std::vector<double> chart;
    const GridDomain dom = g.atlas().chart(j).witness_domain();
    for (std::size_t k = 0; k < g.values()[j].size(); ++k) {
      try {
        const auto v = g.group().log(g.at(j, k));
        chart.insert(chart.end(), v.begin(), v.end());
      } catch (const ChartDomainError& e) {
        const auto p = g.atlas().chart(j).from_chart(dom.node(k));
        std::string where = "(";
        for (std::size_t a = 0; a < p.size(); ++a) where += (a ? ", " : "") + fmt(p[a]);
        throw ChartDomainError("chart " + std::to_string(j) + " node " + std::to_string(k) + " at manifold point " +
                               where + "): " + e.what());
      }
    }
    values.push_back(std::move(chart));
  }
  return values_section(g.atlas_ptr(), n, std::move(values), g.tolerance());
}

Section adjoint_operator(const GroupSection& g, const Section& eta) {
  require_algebra(eta, g.group());
  if (eta.atlas().fingerprint() != g.atlas().fingerprint()) throw InputError("sections live on different atlases");
  std::vector<std::vector<double>> values;
  for (std::size_t j = 0; j < eta.pieces().size(); ++j) {
    std::vector<double> chart;
    for (std::size_t k = 0; k < eta.piece(j).size(); ++k) {
      const auto v = g.group().adjoint(g.at(j, k), eta.piece(j).value(k));
      chart.insert(chart.end(), v.begin(), v.end());
    }
    values.push_back(std::move(chart));
  }
  return values_section(eta.atlas_ptr(), eta.components(), std::move(values), eta.tolerance());
}

Section bracket(const Section& xi, const Section& eta, const MatrixGroup& group) {
  require_algebra(xi, group);
  require_algebra(eta, group);
  if (xi.atlas().fingerprint() != eta.atlas().fingerprint()) throw InputError("sections live on different atlases");
  std::vector<std::vector<double>> values;
  for (std::size_t j = 0; j < xi.pieces().size(); ++j) {
    std::vector<double> chart;
    for (std::size_t k = 0; k < xi.piece(j).size(); ++k) {
      const auto v = group.bracket(xi.piece(j).value(k), eta.piece(j).value(k));
      chart.insert(chart.end(), v.begin(), v.end());
    }
    values.push_back(std::move(chart));
  }
  return values_section(xi.atlas_ptr(), xi.components(), std::move(values), std::max(xi.tolerance(), eta.tolerance()));
}

double max_difference(const GroupSection& a, const GroupSection& b) {
  require_same(a, b);
  double worst = 0;
  for (std::size_t j = 0; j < a.values().size(); ++j)
    for (std::size_t k = 0; k < a.values()[j].size(); ++k)
      worst = std::max(worst, (a.at(j, k) - b.at(j, k)).cwiseAbs().maxCoeff());
  return worst;
}

Eigen::MatrixXd group_point_eval(const GroupSection& g, std::span<const double> p) {
  const auto j = g.atlas().best_chart(p);
  if (!j) throw DomainError("point is not covered by any witness window");
  const GridDomain dom = g.atlas().chart(*j).witness_domain();
  const auto y = g.atlas().chart(*j).to_chart(p);
  if (const auto node = dom.node_at(y, 1e-9)) return g.at(*j, *node);
  const int d = g.group().matrix_dim();
  std::vector<double> flat;
  for (const auto& m : g.values()[*j]) flat.insert(flat.end(), m.reshaped().begin(), m.reshaped().end());
  const SampledField entries(dom, d * d, std::move(flat));
  const auto v = entries.evaluate(y);
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), d, d);
}

namespace {

template <typename Fn>
void for_node_pairs(const Section& xi, const Section& eta, Fn&& fn) {
  if (xi.atlas().fingerprint() != eta.atlas().fingerprint()) throw InputError("sections live on different atlases");
  for (std::size_t j = 0; j < xi.pieces().size(); ++j)
    for (std::size_t k = 0; k < xi.piece(j).size(); ++k) fn(j, k, xi.piece(j).value(k), eta.piece(j).value(k));
}

std::vector<double> scaled(std::span<const double> v, double t) {
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x *= t;
  return out;
}

}  // namespace

SlopeProbe bch_order2_probe(const Section& xi, const Section& eta, std::shared_ptr<const MatrixGroup> group,
                            std::span<const double> ts) {
  require_algebra(xi, *group);
  require_algebra(eta, *group);
  SlopeProbe probe;
  for (double t : ts) {
    double worst = 0;
    for_node_pairs(xi, eta, [&](std::size_t, std::size_t, std::span<const double> x, std::span<const double> y) {
      const auto z = group->log(group->exp(scaled(x, t)) * group->exp(scaled(y, t)));
      const auto br = group->bracket(x, y);
      double acc = 0;
      for (std::size_t c = 0; c < z.size(); ++c) {
        const double r = z[c] - t * (x[c] + y[c]) - 0.5 * t * t * br[c];
        acc += r * r;
      }
      worst = std::max(worst, std::sqrt(acc));
    });
    probe.eps.push_back(t);
    probe.errors.push_back(worst);
  }
  probe.slope = loglog_slope(probe.eps, probe.errors);
  return probe;
}

Section bch_bracket(const Section& xi, const Section& eta, std::shared_ptr<const MatrixGroup> group, double t) {
  require_algebra(xi, *group);
  require_algebra(eta, *group);
  std::vector<std::vector<double>> values(xi.pieces().size());
  for_node_pairs(xi, eta, [&](std::size_t j, std::size_t, std::span<const double> x, std::span<const double> y) {
    const auto ex = group->exp(scaled(x, t)), ey = group->exp(scaled(y, t));
    const auto z1 = group->log(ex * ey), z2 = group->log(ey * ex);
    for (std::size_t c = 0; c < z1.size(); ++c) values[j].push_back((z1[c] - z2[c]) / (t * t));
  });
  return values_section(xi.atlas_ptr(), xi.components(), std::move(values), std::max(xi.tolerance(), eta.tolerance()));
}

}  // namespace mapgroups

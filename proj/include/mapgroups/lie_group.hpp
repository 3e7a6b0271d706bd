#pragma once

// Matrix Lie groups with closed-form exponential charts, and maps from a compact
// manifold into them stored chart-wise at witness nodes.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mapgroups/probes.hpp"
#include "mapgroups/section.hpp"

namespace mapgroups {

inline constexpr double kProjectionThreshold = 1e-12;

class MatrixGroup {
 public:
  MatrixGroup(std::string name, std::vector<Eigen::MatrixXd> basis, double q_radius, double v_radius);
  virtual ~MatrixGroup() = default;

  const std::string& name() const noexcept { return name_; }
  int matrix_dim() const noexcept { return static_cast<int>(basis_.front().rows()); }
  int algebra_dim() const noexcept { return static_cast<int>(basis_.size()); }
  const std::vector<Eigen::MatrixXd>& basis() const noexcept { return basis_; }
  /// Radius of the ball Q on which exp is a diffeomorphism onto its image.
  double q_radius() const noexcept { return q_radius_; }
  /// Radius of V with exp(V)·exp(V) ⊆ exp(Q).
  double v_radius() const noexcept { return v_radius_; }

  Eigen::MatrixXd hat(std::span<const double> v) const;
  /// Basis coordinates of an algebra element (least squares in the basis).
  std::vector<double> vee(const Eigen::MatrixXd& x) const;
  /// Norm used for the chart balls.
  virtual double algebra_norm(std::span<const double> v) const;

  virtual Eigen::MatrixXd exp(std::span<const double> v) const = 0;
  /// Chart inverse of exp; ChartDomainError outside exp(Q).
  virtual std::vector<double> log(const Eigen::MatrixXd& g) const = 0;
  virtual bool in_chart(const Eigen::MatrixXd& g) const = 0;
  /// Max violation of the defining relations.
  virtual double relation_defect(const Eigen::MatrixXd& g) const = 0;
  /// Nearest group element.
  virtual Eigen::MatrixXd project(const Eigen::MatrixXd& g) const = 0;
  virtual Eigen::MatrixXd inverse(const Eigen::MatrixXd& g) const;

  Eigen::MatrixXd identity() const;
  std::vector<double> adjoint(const Eigen::MatrixXd& g, std::span<const double> v) const;
  std::vector<double> bracket(std::span<const double> a, std::span<const double> b) const;

 private:
  std::string name_;
  std::vector<Eigen::MatrixXd> basis_;
  Eigen::MatrixXd coord_solver_;  // (BᵀB)⁻¹Bᵀ on flattened matrices
  double q_radius_;
  double v_radius_;
};

/// "SO3", "SU2" (as real 4×4 left-quaternion matrices), "UT2" (upper triangular,
/// positive diagonal). InputError for other names.
std::shared_ptr<const MatrixGroup> make_group(const std::string& name);

/// Rotation by angle ‖v‖ about v/‖v‖.
Eigen::Matrix3d rodrigues(const Eigen::Vector3d& v);

class GroupSection {
 public:
  GroupSection(std::shared_ptr<const Atlas> atlas, std::shared_ptr<const MatrixGroup> group,
               std::vector<std::vector<Eigen::MatrixXd>> values, double tol = kDefaultCompatibilityTol);

  static GroupSection identity(std::shared_ptr<const Atlas> atlas, std::shared_ptr<const MatrixGroup> group);

  const Atlas& atlas() const noexcept { return *atlas_; }
  const std::shared_ptr<const Atlas>& atlas_ptr() const noexcept { return atlas_; }
  const MatrixGroup& group() const noexcept { return *group_; }
  const std::shared_ptr<const MatrixGroup>& group_ptr() const noexcept { return group_; }
  const std::vector<std::vector<Eigen::MatrixXd>>& values() const noexcept { return values_; }
  const Eigen::MatrixXd& at(std::size_t chart, std::size_t node) const { return values_.at(chart).at(node); }
  double tolerance() const noexcept { return tol_; }

  /// Re-projections performed while producing this section, one line each.
  const std::vector<std::string>& projection_log() const noexcept { return log_; }
  void append_log(std::vector<std::string> lines);

  double max_relation_defect() const;
  /// Max entry difference at node-matched overlap points.
  double compatibility_defect() const;

 private:
  std::shared_ptr<const Atlas> atlas_;
  std::shared_ptr<const MatrixGroup> group_;
  std::vector<std::vector<Eigen::MatrixXd>> values_;
  double tol_;
  std::vector<std::string> log_;
};

/// Projects nodes whose relation defect exceeds the threshold and logs each correction.
GroupSection normalize(const GroupSection& g, double threshold = kProjectionThreshold);

GroupSection group_multiply(const GroupSection& a, const GroupSection& b);
GroupSection group_invert(const GroupSection& a);
GroupSection exp_section(const Section& xi, std::shared_ptr<const MatrixGroup> group);
/// ChartDomainError naming the first node outside the chart.
Section log_section(const GroupSection& g);
Section adjoint_operator(const GroupSection& g, const Section& eta);
Section bracket(const Section& xi, const Section& eta, const MatrixGroup& group);

/// Max entry difference over all nodes.
double max_difference(const GroupSection& a, const GroupSection& b);
/// γ(p) read at a witness node through the best chart (entrywise interpolation between nodes).
Eigen::MatrixXd group_point_eval(const GroupSection& g, std::span<const double> p);

/// Residual ‖log(exp(tξ)exp(tη)) − t(ξ+η) − (t²/2)[ξ,η]‖_sup against t.
SlopeProbe bch_order2_probe(const Section& xi, const Section& eta, std::shared_ptr<const MatrixGroup> group,
                            std::span<const double> ts);
/// (log(exp(tξ)exp(tη)) − log(exp(tη)exp(tξ))) / t², which tends to [ξ, η].
Section bch_bracket(const Section& xi, const Section& eta, std::shared_ptr<const MatrixGroup> group, double t);

}  // namespace mapgroups

#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "attnav/so3.hpp"

namespace attnav {

using VectorX = Eigen::VectorXd;
using MatrixX = Eigen::MatrixXd;

inline constexpr double kAverageEps = 1e-6;
inline constexpr double kRankEps = 1e-8;

/// n rigid bodies R_1..R_n with their z-axes d_i = R_i e_3 and the
/// normalized average direction.
class NetworkState {
 public:
  /// Throws InvalidArgument for n = 0 and DegenerateAverage when
  /// |sum d_i| <= eps_avg.
  explicit NetworkState(std::vector<Rotation> bodies, double eps_avg = kAverageEps);

  int size() const { return static_cast<int>(bodies_.size()); }
  const std::vector<Rotation>& bodies() const { return bodies_; }
  const Rotation& body(int i) const { return bodies_[static_cast<std::size_t>(i)]; }

  /// Stacked d = [d_1; ...; d_n], 3n entries.
  VectorX stacked_directions() const;
  Vector3 direction(int i) const { return body(i).matrix().col(2); }
  const Vector3& direction_sum() const { return sum_; }
  const UnitVector3& average() const { return average_; }
  double eps_avg() const { return eps_avg_; }

 private:
  std::vector<Rotation> bodies_;
  Vector3 sum_;
  UnitVector3 average_;
  double eps_avg_;
};

/// d-bar as a function of a stacked direction vector (no unit-norm check on
/// the blocks). Throws DegenerateAverage.
UnitVector3 average_direction(const VectorX& stacked, double eps_avg = kAverageEps);

/// Ω = Ω_h + Ω_a, each 3n stacked body-frame velocities.
struct CommandDecomposition {
  VectorX omega_h;
  VectorX omega_a;
  VectorX omega_total;
};

/// Block-diagonal S(d) with blocks -R_i hat(e_3); d' = S(d) Ω.
MatrixX collective_jacobian_S(const NetworkState& net);

/// ∂d̄/∂d, 3 x 3n with blocks (I - d̄ d̄^T) / |Σ d_j|.
MatrixX average_jacobian(const NetworkState& net);

/// W(d) = (∂d̄/∂d S(d))^T, 3n x 3.
MatrixX average_velocity_map(const NetworkState& net);

/// Orthogonal projector onto the null space of W^T. W always has rank 2
/// (its columns annihilate d̄), so the inverse Gram matrix is taken on the
/// tangent plane of d̄. Throws RankDeficient when that 2x2 Gram matrix has
/// smallest eigenvalue <= eps_rank.
MatrixX stealthy_projector_A(const NetworkState& net, double eps_rank = kRankEps);

/// omega_h stacks R_i^T ω̃; omega_a = A(d) omega_a_raw.
CommandDecomposition assemble_command(const NetworkState& net,
                                      const Vector3& omega_h_spatial_tilde,
                                      const VectorX& omega_a_raw,
                                      double eps_rank = kRankEps);

/// Advances each body with step_rotation on its slice of omega_total.
NetworkState step_network(const NetworkState& net, const CommandDecomposition& cmd, double dt);

/// Undirected edge list over body indices 0..n-1.
using Graph = std::vector<std::pair<int, int>>;

/// Ring graph 0-1-...-(n-1)-0 (a single edge for n = 2, empty for n = 1).
Graph ring_graph(int n);
bool is_connected(const Graph& graph, int n);

/// Consensus payload ω̃_ai = gain Σ_{j∈N_i} sk(R_i^T R_j)^∨, to be filtered
/// through A(d). Throws InvalidArgument for a disconnected graph.
VectorX demo_autonomous_law(const NetworkState& net, const Graph& graph, double gain = 1.0);

}  // namespace attnav

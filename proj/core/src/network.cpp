#include "attnav/network.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>

#include "attnav/error.hpp"

namespace attnav {

namespace {

Vector3 sum_of_directions(const std::vector<Rotation>& bodies) {
  Vector3 sum = Vector3::Zero();
  for (const auto& r : bodies) sum += r.matrix().col(2);
  return sum;
}

UnitVector3 checked_average(const Vector3& sum, double eps_avg) {
  const double norm = sum.norm();
  if (!(norm > eps_avg)) {
    throw Error(Errc::DegenerateAverage, "sum of body directions vanishes");
  }
  return UnitVector3::normalize(sum);
}

// Columns span the plane orthogonal to `n`.
Eigen::Matrix<double, 3, 2> tangent_basis(const Vector3& n) {
  const Vector3 seed = std::abs(n.x()) < 0.9 ? Vector3::UnitX() : Vector3::UnitY();
  const Vector3 t1 = (seed - seed.dot(n) * n).normalized();
  Eigen::Matrix<double, 3, 2> basis;
  basis.col(0) = t1;
  basis.col(1) = n.cross(t1);
  return basis;
}

}  // namespace

NetworkState::NetworkState(std::vector<Rotation> bodies, double eps_avg)
    : bodies_(std::move(bodies)),
      sum_(sum_of_directions(bodies_)),
      average_(bodies_.empty() ? UnitVector3::e3() : checked_average(sum_, eps_avg)),
      eps_avg_(eps_avg) {
  if (bodies_.empty()) throw Error(Errc::InvalidArgument, "network needs at least one body");
}

VectorX NetworkState::stacked_directions() const {
  VectorX d(3 * size());
  for (int i = 0; i < size(); ++i) d.segment<3>(3 * i) = direction(i);
  return d;
}

UnitVector3 average_direction(const VectorX& stacked, double eps_avg) {
  Vector3 sum = Vector3::Zero();
  for (Eigen::Index i = 0; i + 2 < stacked.size(); i += 3) sum += stacked.segment<3>(i);
  return checked_average(sum, eps_avg);
}

MatrixX collective_jacobian_S(const NetworkState& net) {
  const int n = net.size();
  MatrixX s = MatrixX::Zero(3 * n, 3 * n);
  const Matrix3 e3_hat = hat(Vector3::UnitZ());
  for (int i = 0; i < n; ++i) s.block<3, 3>(3 * i, 3 * i) = -net.body(i).matrix() * e3_hat;
  return s;
}

MatrixX average_jacobian(const NetworkState& net) {
  const int n = net.size();
  const double norm = net.direction_sum().norm();
  if (!(norm > net.eps_avg())) {
    throw Error(Errc::DegenerateAverage, "sum of body directions vanishes");
  }
  const Vector3& avg = net.average().vec();
  const Matrix3 block = (Matrix3::Identity() - avg * avg.transpose()) / norm;
  MatrixX j(3, 3 * n);
  for (int i = 0; i < n; ++i) j.block<3, 3>(0, 3 * i) = block;
  return j;
}

MatrixX average_velocity_map(const NetworkState& net) {
  // Block i of (∂d̄/∂d S)^T is (-P R_i ê3)^T / |Σd| = -ê3^T R_i^T P / |Σd|.
  const int n = net.size();
  const MatrixX j = average_jacobian(net);
  const Matrix3 e3_hat = hat(Vector3::UnitZ());
  MatrixX w(3 * n, 3);
  for (int i = 0; i < n; ++i) {
    w.block<3, 3>(3 * i, 0) =
        (-j.block<3, 3>(0, 3 * i) * net.body(i).matrix() * e3_hat).transpose();
  }
  return w;
}

MatrixX stealthy_projector_A(const NetworkState& net, double eps_rank) {
  const MatrixX w = average_velocity_map(net);
  const MatrixX w_t = w * tangent_basis(net.average().vec());
  const Eigen::Matrix2d gram = w_t.transpose() * w_t;
  const double lambda_min = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(
                                gram, Eigen::EigenvaluesOnly)
                                .eigenvalues()
                                .minCoeff();
  if (!(lambda_min > eps_rank)) {
    throw Error(Errc::RankDeficient, "W^T W is near-singular on the tangent plane");
  }
  const Eigen::LLT<Eigen::Matrix2d> llt(gram);
  MatrixX a = -w_t * llt.solve(w_t.transpose());
  a.diagonal().array() += 1.0;
  return 0.5 * (a + a.transpose());
}

CommandDecomposition assemble_command(const NetworkState& net, const Vector3& omega_h_spatial_tilde,
                                      const VectorX& omega_a_raw, double eps_rank) {
  const int n = net.size();
  if (omega_a_raw.size() != 3 * n) {
    throw Error(Errc::InvalidArgument, "autonomous command must have 3n entries");
  }
  CommandDecomposition cmd;
  cmd.omega_h.resize(3 * n);
  for (int i = 0; i < n; ++i) {
    cmd.omega_h.segment<3>(3 * i) = net.body(i).matrix().transpose() * omega_h_spatial_tilde;
  }
  if (omega_a_raw.isZero(0.0)) {
    cmd.omega_a = VectorX::Zero(3 * n);
  } else {
    cmd.omega_a = stealthy_projector_A(net, eps_rank) * omega_a_raw;
  }
  cmd.omega_total = cmd.omega_h + cmd.omega_a;
  return cmd;
}

NetworkState step_network(const NetworkState& net, const CommandDecomposition& cmd, double dt) {
  const int n = net.size();
  if (cmd.omega_total.size() != 3 * n) {
    throw Error(Errc::InvalidArgument, "command size does not match network");
  }
  std::vector<Rotation> next;
  next.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    next.push_back(step_rotation(net.body(i), cmd.omega_total.segment<3>(3 * i), dt));
  }
  return NetworkState(std::move(next), net.eps_avg());
}

Graph ring_graph(int n) {
  Graph g;
  if (n == 2) g.emplace_back(0, 1);
  if (n > 2) {
    for (int i = 0; i < n; ++i) g.emplace_back(i, (i + 1) % n);
  }
  return g;
}

bool is_connected(const Graph& graph, int n) {
  if (n <= 1) return true;
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    }
    return x;
  };
  int components = n;
  for (const auto& [a, b] : graph) {
    if (a < 0 || b < 0 || a >= n || b >= n) return false;
    const int ra = find(a);
    const int rb = find(b);
    if (ra != rb) {
      parent[static_cast<std::size_t>(ra)] = rb;
      --components;
    }
  }
  return components == 1;
}

VectorX demo_autonomous_law(const NetworkState& net, const Graph& graph, double gain) {
  const int n = net.size();
  if (!is_connected(graph, n)) {
    throw Error(Errc::InvalidArgument, "consensus graph must be connected");
  }
  VectorX out = VectorX::Zero(3 * n);
  for (const auto& [i, j] : graph) {
    const Matrix3 rel = net.body(i).matrix().transpose() * net.body(j).matrix();
    const Vector3 v = vee(sk(rel));
    // sk(R_j^T R_i) = -sk(R_i^T R_j), so each edge contributes antisymmetrically.
    out.segment<3>(3 * i) += gain * v;
    out.segment<3>(3 * j) -= gain * v;
  }
  return out;
}

}  // namespace attnav

#include "nolm/quantum.hpp"

#include "nolm/optimize.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nolm::quantum {
namespace {

constexpr Complex kI{0.0, 1.0};
const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

bool all_finite(const Eigen::MatrixXcd& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (!std::isfinite(m.data()[i].real()) || !std::isfinite(m.data()[i].imag())) return false;
  }
  return true;
}

Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& m) {
  return 0.5 * (m + m.adjoint());
}

void require_two_qubit(const DensityMatrix& rho, const char* what) {
  if (rho.dim() != 4) throw std::invalid_argument(std::string(what) + ": expects a two-qubit state");
}

Eigen::Vector4cd maximally_entangled(double a, double b, double g) {
  // (I x U)|Phi+> with U acting on the idler.
  const Eigen::Matrix2cd u = su2(a, b, g);
  Eigen::Vector4cd e;
  e(0) = kInvSqrt2 * u(0, 0);  // HH
  e(1) = kInvSqrt2 * u(1, 0);  // HV
  e(2) = kInvSqrt2 * u(0, 1);  // VH
  e(3) = kInvSqrt2 * u(1, 1);  // VV
  return e;
}

double entangled_overlap(const Eigen::Matrix4cd& rho, double a, double b, double g) {
  const Eigen::Vector4cd e = maximally_entangled(a, b, g);
  return (e.adjoint() * rho * e)(0, 0).real();
}

}  // namespace

PolarizationKet::PolarizationKet(Eigen::VectorXcd amplitudes) : amplitudes_(std::move(amplitudes)) {
  if (dim() != 2 && dim() != 4) throw std::invalid_argument("PolarizationKet: dim must be 2 or 4");
  if (!all_finite(amplitudes_)) throw std::invalid_argument("PolarizationKet: non-finite amplitude");
  if (std::abs(amplitudes_.norm() - 1.0) > kStateTolerance) {
    throw std::invalid_argument("PolarizationKet: not normalized");
  }
}

PolarizationKet PolarizationKet::normalized(Eigen::VectorXcd amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0.0)) throw std::invalid_argument("PolarizationKet: zero vector");
  return PolarizationKet(amplitudes / n);
}

PolarizationKet PolarizationKet::horizontal() { return PolarizationKet(Eigen::Vector2cd(1.0, 0.0)); }
PolarizationKet PolarizationKet::vertical() { return PolarizationKet(Eigen::Vector2cd(0.0, 1.0)); }
PolarizationKet PolarizationKet::diagonal() {
  return PolarizationKet(Eigen::Vector2cd(kInvSqrt2, kInvSqrt2));
}
PolarizationKet PolarizationKet::antidiagonal() {
  return PolarizationKet(Eigen::Vector2cd(kInvSqrt2, -kInvSqrt2));
}
PolarizationKet PolarizationKet::right() {
  return PolarizationKet(Eigen::Vector2cd(kInvSqrt2, -kI * kInvSqrt2));
}
PolarizationKet PolarizationKet::left() {
  return PolarizationKet(Eigen::Vector2cd(kInvSqrt2, kI * kInvSqrt2));
}

PolarizationKet bell_state(BellState kind) {
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
  switch (kind) {
    case BellState::PhiPlus: v << kInvSqrt2, 0.0, 0.0, kInvSqrt2; break;
    case BellState::PhiMinus: v << kInvSqrt2, 0.0, 0.0, -kInvSqrt2; break;
    case BellState::PsiPlus: v << 0.0, kInvSqrt2, kInvSqrt2, 0.0; break;
    case BellState::PsiMinus: v << 0.0, kInvSqrt2, -kInvSqrt2, 0.0; break;
  }
  return PolarizationKet(v);
}

PolarizationKet tensor(const PolarizationKet& a, const PolarizationKet& b) {
  if (a.dim() != 2 || b.dim() != 2) throw std::invalid_argument("tensor: both kets must be dim 2");
  Eigen::VectorXcd v = Eigen::kroneckerProduct(a.amplitudes(), b.amplitudes()).eval();
  return PolarizationKet::normalized(v);
}

double overlap(const PolarizationKet& a, const PolarizationKet& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("overlap: dimension mismatch");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

JonesOperator::JonesOperator(const Eigen::Matrix2cd& m) : m_(m) {
  if (!all_finite(m_)) throw std::invalid_argument("JonesOperator: non-finite entry");
  if (!(m_.adjoint() * m_).isIdentity(kStateTolerance)) {
    throw std::invalid_argument("JonesOperator: not unitary");
  }
}

PolarizationKet JonesOperator::apply(const PolarizationKet& k) const {
  if (k.dim() != 2) throw std::invalid_argument("JonesOperator::apply: ket must be dim 2");
  return PolarizationKet::normalized(m_ * k.amplitudes());
}

DensityMatrix::DensityMatrix(const Eigen::MatrixXcd& m) : m_(m) {
  if (m_.rows() != m_.cols() || (m_.rows() != 2 && m_.rows() != 4)) {
    throw std::invalid_argument("DensityMatrix: must be 2x2 or 4x4");
  }
  if (!all_finite(m_)) throw std::invalid_argument("DensityMatrix: non-finite entry");
  if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kStateTolerance) {
    throw std::invalid_argument("DensityMatrix: not Hermitian");
  }
  if (std::abs(m_.trace() - Complex(1.0)) > kStateTolerance) {
    throw std::invalid_argument("DensityMatrix: trace is not 1");
  }
  if (eigenvalues().minCoeff() < -kStateTolerance) {
    throw std::invalid_argument("DensityMatrix: negative eigenvalue");
  }
}

DensityMatrix DensityMatrix::pure(const PolarizationKet& k) {
  return DensityMatrix(k.amplitudes() * k.amplitudes().adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  return DensityMatrix(Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::mixture(std::span<const double> weights,
                                     std::span<const DensityMatrix> states) {
  if (weights.empty() || weights.size() != states.size()) {
    throw std::invalid_argument("mixture: weights and states must be non-empty and aligned");
  }
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("mixture: negative weight");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("mixture: zero total weight");
  const int d = states.front().dim();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (states[k].dim() != d) throw std::invalid_argument("mixture: dimension mismatch");
    m += (weights[k] / total) * states[k].matrix();
  }
  return DensityMatrix(hermitian_part(m));
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

Eigen::VectorXd DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

DensityMatrix depolarize(const DensityMatrix& rho, double white_fraction) {
  if (white_fraction < 0.0 || white_fraction > 1.0) {
    throw std::invalid_argument("depolarize: fraction must lie in [0, 1]");
  }
  const int d = rho.dim();
  return DensityMatrix((1.0 - white_fraction) * rho.matrix() +
                       white_fraction * Eigen::MatrixXcd::Identity(d, d) / static_cast<double>(d));
}

DensityMatrix apply_local(const JonesOperator& u_signal, const JonesOperator& u_idler,
                          const DensityMatrix& rho) {
  require_two_qubit(rho, "apply_local");
  const Eigen::Matrix4cd u = Eigen::kroneckerProduct(u_signal.matrix(), u_idler.matrix()).eval();
  return DensityMatrix(hermitian_part(u * rho.matrix() * u.adjoint()));
}

double fidelity_to_pure(const PolarizationKet& psi, const DensityMatrix& rho) {
  if (psi.dim() != rho.dim()) throw std::invalid_argument("fidelity_to_pure: dimension mismatch");
  const Complex f = psi.amplitudes().dot(rho.matrix() * psi.amplitudes());
  return std::clamp(f.real(), 0.0, 1.0);
}

double fully_entangled_fraction(const DensityMatrix& rho) {
  require_two_qubit(rho, "fully_entangled_fraction");
  const Eigen::Matrix4cd m = rho.matrix();
  auto objective = [&m](std::span<const double> p) { return -entangled_overlap(m, p[0], p[1], p[2]); };

  // Coarse 16^3 grid over the Euler angles, then simplex refinement from the best
  // few grid points.
  constexpr int kGrid = 16;
  constexpr int kStarts = 4;
  std::vector<std::pair<double, std::array<double, 3>>> grid;
  grid.reserve(kGrid * kGrid * kGrid);
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      for (int k = 0; k < kGrid; ++k) {
        const std::array<double, 3> p{2.0 * std::numbers::pi * i / kGrid,
                                      std::numbers::pi * (j + 0.5) / kGrid,
                                      2.0 * std::numbers::pi * k / kGrid};
        grid.emplace_back(objective(p), p);
      }
    }
  }
  std::partial_sort(grid.begin(), grid.begin() + kStarts, grid.end(),
                    [](const auto& a, const auto& b) { return a.first < b.first; });

  double best = -grid.front().first;
  opt::SimplexOptions so;
  so.initial_step = 0.2;
  so.size_tolerance = 1e-10;
  for (int s = 0; s < kStarts; ++s) {
    const auto& p = grid[s].second;
    const auto r = opt::minimize_simplex(objective, {p[0], p[1], p[2]}, so);
    best = std::max(best, -r.value);
  }
  return std::clamp(best, 0.0, 1.0);
}

double tangle(const DensityMatrix& rho) {
  require_two_qubit(rho, "tangle");
  Eigen::Matrix4cd sy2 = Eigen::Matrix4cd::Zero();
  // sigma_y x sigma_y
  sy2(0, 3) = -1.0;
  sy2(1, 2) = 1.0;
  sy2(2, 1) = 1.0;
  sy2(3, 0) = -1.0;
  const Eigen::Matrix4cd r = rho.matrix();
  const Eigen::Matrix4cd flipped = sy2 * r.conjugate() * sy2;

  // Eigenvalues of rho * flipped equal those of the Hermitian sqrt(rho) flipped sqrt(rho).
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(r);
  const Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
  const Eigen::Matrix4cd sqrt_rho =
      es.eigenvectors() * ev.cwiseSqrt().cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  const Eigen::Matrix4cd h = sqrt_rho * flipped * sqrt_rho;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> hs(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  std::array<double, 4> lambda{};
  for (int i = 0; i < 4; ++i) lambda[i] = std::sqrt(std::max(hs.eigenvalues()(i), 0.0));
  std::sort(lambda.begin(), lambda.end(), std::greater<>());
  const double c = std::max(0.0, lambda[0] - lambda[1] - lambda[2] - lambda[3]);
  return std::clamp(c * c, 0.0, 1.0);
}

double linear_entropy(const DensityMatrix& rho) {
  require_two_qubit(rho, "linear_entropy");
  return std::clamp(4.0 / 3.0 * (1.0 - rho.purity()), 0.0, 1.0);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("trace_distance: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.matrix() - b.matrix(), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

EntanglementMetrics entanglement_metrics(const DensityMatrix& rho) {
  return {fully_entangled_fraction(rho), tangle(rho), linear_entropy(rho)};
}

Eigen::Matrix2cd su2(double alpha, double beta, double gamma) {
  auto rz = [](double t) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(0, 0) = std::polar(1.0, -0.5 * t);
    m(1, 1) = std::polar(1.0, 0.5 * t);
    return m;
  };
  Eigen::Matrix2cd ry;
  ry << std::cos(0.5 * beta), -std::sin(0.5 * beta), std::sin(0.5 * beta), std::cos(0.5 * beta);
  return rz(alpha) * ry * rz(gamma);
}

}  // namespace nolm::quantum

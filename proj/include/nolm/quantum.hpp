#pragma once

// Two-qubit polarization states and the entanglement figures of merit used to
// characterize them. Basis order is H=0, V=1 per qubit, signal qubit first:
// HH, HV, VH, VV.

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

namespace nolm::quantum {

using Complex = std::complex<double>;

inline constexpr double kStateTolerance = 1e-9;

class PolarizationKet {
 public:
  // Throws unless dim is 2 or 4, all amplitudes finite, and the norm is 1 within 1e-9.
  explicit PolarizationKet(Eigen::VectorXcd amplitudes);
  // Normalizes first; throws on a zero vector.
  static PolarizationKet normalized(Eigen::VectorXcd amplitudes);

  static PolarizationKet horizontal();
  static PolarizationKet vertical();
  static PolarizationKet diagonal();      // (H + V)/sqrt2
  static PolarizationKet antidiagonal();  // (H - V)/sqrt2
  static PolarizationKet right();         // (H - iV)/sqrt2
  static PolarizationKet left();          // (H + iV)/sqrt2

  int dim() const { return static_cast<int>(amplitudes_.size()); }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  Complex operator[](int i) const { return amplitudes_(i); }

 private:
  Eigen::VectorXcd amplitudes_;
};

enum class BellState { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

PolarizationKet bell_state(BellState kind);

// Kronecker product a (signal) x b (idler).
PolarizationKet tensor(const PolarizationKet& a, const PolarizationKet& b);

// |<a|b>|^2
double overlap(const PolarizationKet& a, const PolarizationKet& b);

class JonesOperator {
 public:
  // Throws unless U^dagger U = I within 1e-9.
  explicit JonesOperator(const Eigen::Matrix2cd& m);
  static JonesOperator identity() { return JonesOperator(Eigen::Matrix2cd::Identity()); }

  const Eigen::Matrix2cd& matrix() const { return m_; }
  PolarizationKet apply(const PolarizationKet& k) const;

 private:
  Eigen::Matrix2cd m_;
};

class DensityMatrix {
 public:
  // Validates Hermiticity, unit trace and eigenvalues >= -1e-9.
  explicit DensityMatrix(const Eigen::MatrixXcd& m);

  static DensityMatrix pure(const PolarizationKet& k);
  static DensityMatrix maximally_mixed(int dim);
  // sum_k w_k rho_k with w normalized by its sum. Throws on empty input or zero total.
  static DensityMatrix mixture(std::span<const double> weights,
                               std::span<const DensityMatrix> states);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return m_; }
  Complex operator()(int r, int c) const { return m_(r, c); }

  double purity() const;
  Eigen::VectorXd eigenvalues() const;

 private:
  Eigen::MatrixXcd m_;
};

// (1 - w) rho + w I/d
DensityMatrix depolarize(const DensityMatrix& rho, double white_fraction);

DensityMatrix apply_local(const JonesOperator& u_signal, const JonesOperator& u_idler,
                          const DensityMatrix& rho);

double fidelity_to_pure(const PolarizationKet& psi, const DensityMatrix& rho);

// Maximum of <e|rho|e> over maximally entangled e = (I x U)|Phi+>.
double fully_entangled_fraction(const DensityMatrix& rho);

// Wootters concurrence squared.
double tangle(const DensityMatrix& rho);

// (4/3)(1 - Tr rho^2)
double linear_entropy(const DensityMatrix& rho);

// (1/2) || a - b ||_1
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

struct EntanglementMetrics {
  double fidelity_max = 0.0;
  double tangle = 0.0;
  double linear_entropy = 0.0;
};

EntanglementMetrics entanglement_metrics(const DensityMatrix& rho);

// SU(2) element Rz(alpha) Ry(beta) Rz(gamma).
Eigen::Matrix2cd su2(double alpha, double beta, double gamma);

}  // namespace nolm::quantum

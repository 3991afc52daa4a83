#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "nicons/kernels.hpp"

namespace nicons {

// Linear time-invariant system  xdot = A x + B u,  y = C x + D u.
struct StateSpace {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  Eigen::MatrixXd D;

  std::size_t states() const { return static_cast<std::size_t>(A.rows()); }
  std::size_t inputs() const { return static_cast<std::size_t>(B.cols()); }
  std::size_t outputs() const { return static_cast<std::size_t>(C.rows()); }

  // Throws std::invalid_argument unless A is square and B, C, D conform with
  // square (m x m) input/output dimensions.
  void validate() const;
};

// Minimal realisation of M(s) = a / (s + b): (A, B, C, D) = (-b, a, 1, 0).
StateSpace first_order(double a, double b);

// Strictly increasing, positive, finite angular frequencies in rad/s.
class FreqGrid {
 public:
  explicit FreqGrid(std::vector<double> points);

  static FreqGrid log_spaced(double lo, double hi, std::size_t count);
  // 400 log-spaced points over [1e-3, 1e4] rad/s.
  static FreqGrid standard();

  const std::vector<double>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

 private:
  std::vector<double> points_;
};

inline constexpr double kPsdTolerance = 1e-9;
inline constexpr double kCertificateTolerance = 1e-9;

bool is_hurwitz(const StateSpace& sys);

// M(0) = -C A^{-1} B + D. Throws std::domain_error for a non-Hurwitz A.
Eigen::MatrixXd dc_gain(const StateSpace& sys);

// M(jw) = C (jwI - A)^{-1} B + D. Throws std::domain_error when the resolvent
// is singular.
Eigen::MatrixXcd freq_response(const StateSpace& sys, double w);

// M(jw) - M(inf).
Eigen::MatrixXcd strictly_proper_response(const StateSpace& sys, double w);

// lim_{w -> inf} M(jw) = D.
inline const Eigen::MatrixXd& high_freq_gain(const StateSpace& sys) { return sys.D; }

// Hermitian matrix  jw[M - M*] - 2 delta w^2 (M - D)^*(M - D)  at one
// frequency; delta = 0 gives the plain negative-imaginary test matrix.
Eigen::MatrixXcd osni_test_matrix(const StateSpace& sys, double delta, double w);

struct FreqSweepReport {
  bool pass = true;
  double worst_eigenvalue = 0.0;  // most negative eigenvalue seen
  double worst_frequency = 0.0;
};

FreqSweepReport osni_freq_sweep(const StateSpace& sys, double delta, const FreqGrid& grid,
                                Execution exec = Execution::kParallel);

// Requires a Hurwitz A (std::domain_error otherwise).
bool ni_freq_test(const StateSpace& sys, const FreqGrid& grid,
                  Execution exec = Execution::kParallel);

// Requires delta > 0 (std::invalid_argument) and a Hurwitz A with symmetric D.
bool osni_freq_test(const StateSpace& sys, double delta, const FreqGrid& grid,
                    Execution exec = Execution::kParallel);

// Largest delta passing osni_freq_test, found by doubling from 1 and then
// bisecting to within `tolerance`. Returns +inf when every tested delta
// passes (e.g. a static gain). Throws std::domain_error when sys is not NI.
double osni_max_delta(const StateSpace& sys, const FreqGrid& grid, double tolerance = 1e-6,
                      Execution exec = Execution::kParallel);

// Realisation of (L ⊗ M(s)):  (I⊗A, I⊗B, L⊗C, L⊗D).
StateSpace laplacian_realization(const Eigen::MatrixXd& laplacian, const StateSpace& sys);

// State-space OSNI certificate:
//   Y = Y^T > 0,   AY + YA^T + 2 delta (CAY)^T (CAY) <= 0,   B = -A Y C^T.
struct CertificateReport {
  bool y_positive_definite = false;
  bool inequality_holds = false;
  bool b_equation_holds = false;
  double y_min_eigenvalue = 0.0;
  double inequality_residual = 0.0;  // max eigenvalue of the inequality matrix
  double b_residual = 0.0;           // ||B + A Y C^T||_inf

  bool pass() const { return y_positive_definite && inequality_holds && b_equation_holds; }
};

CertificateReport osni_certificate_check(const StateSpace& sys, const Eigen::MatrixXd& Y,
                                         double delta);

// Y = [a / b], the certificate matching V(x) = (b / 2a) x^2 for a / (s + b).
Eigen::MatrixXd first_order_certificate(double a, double b);

// Minimality diagnostics; ranks use singular values above tol * sigma_max.
std::size_t controllability_rank(const StateSpace& sys, double tol = 1e-8);
std::size_t observability_rank(const StateSpace& sys, double tol = 1e-8);
bool is_minimal(const StateSpace& sys, double tol = 1e-8);

}  // namespace nicons

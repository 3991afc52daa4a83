#include "nicons/linsys.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "nicons/graph.hpp"

namespace nicons {

namespace {

void require_hurwitz(const StateSpace& sys, const char* what) {
  if (!is_hurwitz(sys)) throw std::domain_error(std::string(what) + " undefined for non-Hurwitz A");
}

void require_symmetric_d(const StateSpace& sys) {
  const double scale = std::max(1.0, sys.D.cwiseAbs().maxCoeff());
  if ((sys.D - sys.D.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("OSNI tests require a symmetric feedthrough D");
  }
}

double min_hermitian_eigenvalue(const Eigen::MatrixXcd& m) {
  const Eigen::MatrixXcd sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

// j[M(jw) - M(jw)^*], the plain NI test matrix.
Eigen::MatrixXcd ni_test_matrix(const StateSpace& sys, double w) {
  const Eigen::MatrixXcd m = freq_response(sys, w);
  return std::complex<double>(0.0, 1.0) * (m - m.adjoint());
}

FreqSweepReport sweep(const FreqGrid& grid, Execution exec,
                      const auto& min_eigenvalue_at) {
  const auto& w = grid.points();
  const ArgMax worst = kernels::argmin(w.size(), exec, [&](std::size_t k) {
    return min_eigenvalue_at(w[k]);
  });
  FreqSweepReport report;
  if (worst.count == 0) return report;
  report.worst_eigenvalue = worst.value;
  report.worst_frequency = w[worst.index];
  report.pass = worst.value >= -kPsdTolerance;
  return report;
}

std::size_t numerical_rank(const Eigen::MatrixXd& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * s(0)) ++rank;
  return rank;
}

}  // namespace

void StateSpace::validate() const {
  if (A.rows() != A.cols()) throw std::invalid_argument("A must be square");
  if (A.rows() == 0) throw std::invalid_argument("A must be non-empty");
  if (B.rows() != A.rows()) throw std::invalid_argument("B must have as many rows as A");
  if (C.cols() != A.cols()) throw std::invalid_argument("C must have as many columns as A");
  if (C.rows() != B.cols()) {
    throw std::invalid_argument("system must be square: C rows must equal B columns");
  }
  if (D.rows() != C.rows() || D.cols() != B.cols()) {
    throw std::invalid_argument("D must be m x m with m the input dimension");
  }
}

StateSpace first_order(double a, double b) {
  StateSpace sys;
  sys.A = Eigen::MatrixXd::Constant(1, 1, -b);
  sys.B = Eigen::MatrixXd::Constant(1, 1, a);
  sys.C = Eigen::MatrixXd::Constant(1, 1, 1.0);
  sys.D = Eigen::MatrixXd::Zero(1, 1);
  return sys;
}

FreqGrid::FreqGrid(std::vector<double> points) : points_(std::move(points)) {
  for (std::size_t k = 0; k < points_.size(); ++k) {
    if (!std::isfinite(points_[k]) || points_[k] <= 0.0) {
      throw std::invalid_argument("frequency grid points must be positive and finite");
    }
    if (k > 0 && points_[k] <= points_[k - 1]) {
      throw std::invalid_argument("frequency grid must be strictly increasing");
    }
  }
}

FreqGrid FreqGrid::log_spaced(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) {
    throw std::invalid_argument("log_spaced needs 0 < lo < hi and count >= 2");
  }
  std::vector<double> pts(count);
  const double l0 = std::log10(lo);
  const double l1 = std::log10(hi);
  for (std::size_t k = 0; k < count; ++k) {
    pts[k] = std::pow(10.0, l0 + (l1 - l0) * static_cast<double>(k) / static_cast<double>(count - 1));
  }
  return FreqGrid(std::move(pts));
}

FreqGrid FreqGrid::standard() { return log_spaced(1e-3, 1e4, 400); }

bool is_hurwitz(const StateSpace& sys) {
  if (sys.A.rows() != sys.A.cols() || sys.A.rows() == 0) {
    throw std::invalid_argument("is_hurwitz: A must be square and non-empty");
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(sys.A, false);
  if (solver.info() != Eigen::Success) return false;
  return (solver.eigenvalues().real().array() < 0.0).all();
}

Eigen::MatrixXd dc_gain(const StateSpace& sys) {
  sys.validate();
  require_hurwitz(sys, "dc-gain");
  return -sys.C * sys.A.partialPivLu().solve(sys.B) + sys.D;
}

Eigen::MatrixXcd freq_response(const StateSpace& sys, double w) {
  sys.validate();
  const auto q = sys.A.rows();
  Eigen::MatrixXcd resolvent =
      std::complex<double>(0.0, w) * Eigen::MatrixXcd::Identity(q, q) - sys.A.cast<std::complex<double>>();
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(resolvent);
  if (!lu.isInvertible()) {
    throw std::domain_error("resolvent (jwI - A) is singular at w = " + std::to_string(w));
  }
  return sys.C.cast<std::complex<double>>() * lu.solve(sys.B.cast<std::complex<double>>()) +
         sys.D.cast<std::complex<double>>();
}

Eigen::MatrixXcd strictly_proper_response(const StateSpace& sys, double w) {
  return freq_response(sys, w) - sys.D.cast<std::complex<double>>();
}

Eigen::MatrixXcd osni_test_matrix(const StateSpace& sys, double delta, double w) {
  const Eigen::MatrixXcd m = freq_response(sys, w);
  const Eigen::MatrixXcd check = m - sys.D.cast<std::complex<double>>();
  return std::complex<double>(0.0, w) * (m - m.adjoint()) -
         (2.0 * delta * w * w) * (check.adjoint() * check);
}

FreqSweepReport osni_freq_sweep(const StateSpace& sys, double delta, const FreqGrid& grid,
                                Execution exec) {
  sys.validate();
  require_hurwitz(sys, "OSNI frequency test");
  require_symmetric_d(sys);
  // At w -> inf the test matrix is j w (D - D^T) - 0 = 0, so only the grid matters.
  return sweep(grid, exec, [&](double w) {
    return min_hermitian_eigenvalue(osni_test_matrix(sys, delta, w));
  });
}

bool ni_freq_test(const StateSpace& sys, const FreqGrid& grid, Execution exec) {
  sys.validate();
  require_hurwitz(sys, "NI frequency test");
  return sweep(grid, exec, [&](double w) {
           return min_hermitian_eigenvalue(ni_test_matrix(sys, w));
         }).pass;
}

bool osni_freq_test(const StateSpace& sys, double delta, const FreqGrid& grid, Execution exec) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  return osni_freq_sweep(sys, delta, grid, exec).pass;
}

double osni_max_delta(const StateSpace& sys, const FreqGrid& grid, double tolerance,
                      Execution exec) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (!ni_freq_test(sys, grid, exec)) {
    throw std::domain_error("not NI, no strictness level exists");
  }
  auto passes = [&](double delta) { return osni_freq_sweep(sys, delta, grid, exec).pass; };
  double lo = 0.0;
  double hi = 1.0;
  while (passes(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e15) return std::numeric_limits<double>::infinity();
  }
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (passes(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

StateSpace laplacian_realization(const Eigen::MatrixXd& laplacian, const StateSpace& sys) {
  sys.validate();
  if (laplacian.rows() != laplacian.cols()) {
    throw std::invalid_argument("Laplacian must be square");
  }
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(laplacian.rows(), laplacian.cols());
  StateSpace out;
  out.A = kron(eye, sys.A);
  out.B = kron(eye, sys.B);
  out.C = kron(laplacian, sys.C);
  out.D = kron(laplacian, sys.D);
  return out;
}

CertificateReport osni_certificate_check(const StateSpace& sys, const Eigen::MatrixXd& Y,
                                         double delta) {
  sys.validate();
  if (Y.rows() != sys.A.rows() || Y.cols() != sys.A.cols()) {
    throw std::invalid_argument("certificate Y must be q x q with q the state dimension");
  }
  const double scale = std::max(1.0, Y.cwiseAbs().maxCoeff());
  if ((Y - Y.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("certificate Y must be symmetric");
  }
  CertificateReport r;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> y_eig(Y, Eigen::EigenvaluesOnly);
  r.y_min_eigenvalue = y_eig.eigenvalues().minCoeff();
  r.y_positive_definite = r.y_min_eigenvalue > 0.0;

  const Eigen::MatrixXd cay = sys.C * sys.A * Y;
  Eigen::MatrixXd lmi = sys.A * Y + Y * sys.A.transpose() + 2.0 * delta * cay.transpose() * cay;
  lmi = 0.5 * (lmi + lmi.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> lmi_eig(lmi, Eigen::EigenvaluesOnly);
  r.inequality_residual = lmi_eig.eigenvalues().maxCoeff();
  r.inequality_holds = r.inequality_residual <= kCertificateTolerance;

  const Eigen::MatrixXd b_gap = sys.B + sys.A * Y * sys.C.transpose();
  r.b_residual = b_gap.rowwise().lpNorm<1>().maxCoeff();
  r.b_equation_holds = r.b_residual <= kCertificateTolerance;
  return r;
}

Eigen::MatrixXd first_order_certificate(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("a and b must be positive");
  return Eigen::MatrixXd::Constant(1, 1, a / b);
}

std::size_t controllability_rank(const StateSpace& sys, double tol) {
  sys.validate();
  const auto q = sys.A.rows();
  Eigen::MatrixXd ctrb(q, q * sys.B.cols());
  Eigen::MatrixXd block = sys.B;
  for (Eigen::Index k = 0; k < q; ++k) {
    ctrb.middleCols(k * sys.B.cols(), sys.B.cols()) = block;
    block = sys.A * block;
  }
  return numerical_rank(ctrb, tol);
}

std::size_t observability_rank(const StateSpace& sys, double tol) {
  sys.validate();
  const auto q = sys.A.rows();
  Eigen::MatrixXd obsv(q * sys.C.rows(), q);
  Eigen::MatrixXd block = sys.C;
  for (Eigen::Index k = 0; k < q; ++k) {
    obsv.middleRows(k * sys.C.rows(), sys.C.rows()) = block;
    block = block * sys.A;
  }
  return numerical_rank(obsv, tol);
}

bool is_minimal(const StateSpace& sys, double tol) {
  return controllability_rank(sys, tol) == sys.states() && observability_rank(sys, tol) == sys.states();
}

}  // namespace nicons

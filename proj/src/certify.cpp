#include "qtf/certify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

namespace qtf {

bool is_prime(int n) {
  if (n < 2) return false;
  for (int k = 2; k * k <= n; ++k)
    if (n % k == 0) return false;
  return true;
}

TargetState TargetState::maximally_entangled(int d) {
  TargetState t;
  t.d = d;
  t.lambdas.assign(d, 1.0 / std::sqrt(static_cast<double>(d)));
  return t;
}

void TargetState::validate() const {
  if (d < 1 || static_cast<int>(lambdas.size()) != d)
    throw std::invalid_argument("target: dimension mismatch");
  double sum = 0.0;
  for (int i = 0; i < d; ++i) {
    if (lambdas[i] < 0) throw std::invalid_argument("target: negative coefficient");
    if (i > 0 && lambdas[i] > lambdas[i - 1] + 1e-15)
      throw std::invalid_argument("target: coefficients not non-increasing");
    sum += lambdas[i] * lambdas[i];
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("target: coefficients not normalized");
}

bool TargetState::is_uniform(double tol) const {
  const double u = 1.0 / std::sqrt(static_cast<double>(d));
  for (double l : lambdas)
    if (std::abs(l - u) > tol) return false;
  return true;
}

double b_k(const TargetState& target, int k) {
  if (k < 1 || k > target.d) throw std::out_of_range("b_k: k out of range");
  double sum = 0.0;
  for (int i = 0; i < k; ++i) sum += target.lambdas[i] * target.lambdas[i];
  return sum;
}

double f1(const Eigen::MatrixXd& jti_probs, const TargetState& target) {
  if (jti_probs.rows() != target.d || jti_probs.cols() != target.d)
    throw std::invalid_argument("f1: dimension mismatch");
  double sum = 0.0;
  for (int m = 0; m < target.d; ++m)
    sum += target.lambdas[m] * target.lambdas[m] * jti_probs(m, m);
  return sum;
}

double gamma_tilde(int m, int mp, int n, int np, int d, GammaConvention convention) {
  if (m < 0 || mp < 0 || n < 0 || np < 0 || m >= d || mp >= d || n >= d || np >= d)
    throw std::out_of_range("gamma_tilde: index out of range");
  const int raw = convention == GammaConvention::kOraclePassing ? m - mp - n + np
                                                                : m - mp - n - np;
  const int mod = ((raw % d) + d) % d;
  return mod == 0 ? 1.0 / d : 0.0;
}

double f2_tilde(const Eigen::MatrixXd& jti_probs, const Eigen::MatrixXd& jsi_probs,
                int d, GammaConvention convention) {
  if (jti_probs.rows() != d || jti_probs.cols() != d || jsi_probs.rows() != d ||
      jsi_probs.cols() != d)
    throw std::invalid_argument("f2_tilde: dimension mismatch");

  double tilted_diag = 0.0;
  for (int j = 0; j < d; ++j) tilted_diag += jsi_probs(j, j);

  // Penalty over {m != m', n != n', m != n, m' != n'} with the modular
  // condition solved for n', so the sweep is O(d^3).
  double penalty = 0.0;
  for (int m = 0; m < d; ++m) {
    for (int mp = 0; mp < d; ++mp) {
      if (mp == m) continue;
      for (int n = 0; n < d; ++n) {
        if (n == m) continue;
        const int raw = convention == GammaConvention::kOraclePassing
                            ? mp + n - m   // (m - m' - n + n') = 0
                            : m - mp - n;  // (m - m' - n - n') = 0
        const int np = ((raw % d) + d) % d;
        if (np == n || np == mp) continue;
        penalty += std::sqrt(jti_probs(mp, np) * jti_probs(m, n));
      }
    }
  }
  return tilted_diag - 1.0 / d - penalty / d;
}

int certified_dimension(double f_tilde, const TargetState& target) {
  int d_ent = 1;
  for (int k = 2; k <= target.d; ++k)
    if (f_tilde >= b_k(target, k - 1)) d_ent = k;
  return d_ent;
}

namespace {

void check_certification_inputs(const JointCountMatrix& jti, const JointCountMatrix& jsi,
                                bool allow_nonprime) {
  if (jti.d_a != jti.d_b || jsi.d_a != jsi.d_b || jti.d_a != jsi.d_a)
    throw std::invalid_argument("certify: matrices must be square with equal d");
  if (!is_prime(jti.d_a) && !allow_nonprime)
    throw std::invalid_argument(
        "certify: d = " + std::to_string(jti.d_a) +
        " is not prime; the tilted-basis construction is validated only for prime d "
        "(pass allow_nonprime to compute a non-rigorous certificate)");
}

}  // namespace

FidelityResult fidelity_certify(const JointCountMatrix& jti, const JointCountMatrix& jsi,
                                const TargetState& target, bool allow_nonprime) {
  check_certification_inputs(jti, jsi, allow_nonprime);
  target.validate();
  if (target.d != jti.d_a) throw std::invalid_argument("certify: target dimension mismatch");

  const Eigen::MatrixXd p_time = normalize(jti);
  const Eigen::MatrixXd p_freq = normalize(jsi);

  FidelityResult r;
  r.f1 = f1(p_time, target);
  r.f2_tilde = f2_tilde(p_time, p_freq, target.d);
  r.f_tilde = r.f1 + r.f2_tilde;
  r.b_k.resize(target.d);
  for (int k = 1; k <= target.d; ++k) r.b_k[k - 1] = b_k(target, k);
  r.d_ent = certified_dimension(r.f_tilde, target);
  return r;
}

double conditional_entropy_bits(const Eigen::MatrixXd& joint_probs) {
  double h_joint = 0.0;
  Eigen::VectorXd marginal_b = Eigen::VectorXd::Zero(joint_probs.cols());
  for (int i = 0; i < joint_probs.rows(); ++i) {
    for (int j = 0; j < joint_probs.cols(); ++j) {
      const double p = joint_probs(i, j);
      if (p > 0) h_joint -= p * std::log2(p);
      marginal_b(j) += p;
    }
  }
  double h_b = 0.0;
  for (int j = 0; j < joint_probs.cols(); ++j)
    if (marginal_b(j) > 0) h_b -= marginal_b(j) * std::log2(marginal_b(j));
  return h_joint - h_b;
}

EofResult eof_certify(const JointCountMatrix& jti, const JointCountMatrix& jsi,
                      double max_overlap) {
  if (max_overlap <= 0.0 || max_overlap > 1.0)
    throw std::invalid_argument("eof_certify: max_overlap outside (0, 1]");
  EofResult r;
  r.max_overlap = max_overlap;
  r.h1 = conditional_entropy_bits(normalize(jti));
  r.h2 = conditional_entropy_bits(normalize(jsi));
  r.eof_lb_raw = -std::log2(max_overlap) - r.h1 - r.h2;
  r.eof_lb = std::max(0.0, r.eof_lb_raw);
  return r;
}

int schmidt_number_from_delta(double delta) {
  const double r = std::round(delta);
  if (std::abs(delta - r) < 1e-9) return std::max(1, static_cast<int>(r));
  return std::max(1, static_cast<int>(std::ceil(delta)));
}

SteeringResult steering_certify(const JointCountMatrix& jti, const JointCountMatrix& jsi,
                                int d, bool allow_nonprime) {
  check_certification_inputs(jti, jsi, allow_nonprime);
  if (d != jti.d_a) throw std::invalid_argument("steering_certify: d mismatch");
  const Eigen::MatrixXd p_time = normalize(jti);
  const Eigen::MatrixXd p_freq = normalize(jsi);

  SteeringResult r;
  for (int a = 0; a < d; ++a) r.s += p_time(a, a) + p_freq(a, a);
  const double sr_raw = r.s / (1.0 + 1.0 / std::sqrt(static_cast<double>(d))) - 1.0;
  if (sr_raw >= 1.0)
    throw std::runtime_error("steering_certify: witness value implies SR >= 1; input "
                             "correlations are not valid probabilities");
  r.sr_lb = std::max(0.0, sr_raw);
  const double ratio = (1.0 + r.sr_lb) / (1.0 - r.sr_lb);
  r.delta = ratio * ratio;
  r.n_cert = schmidt_number_from_delta(r.delta);
  return r;
}

ExactProbabilities exact_probabilities(const Eigen::MatrixXcd& rho, int d) {
  if (d < 2 || d > 4) throw std::invalid_argument("exact_probabilities: d must be in [2, 4]");
  const int n = d * d;
  if (rho.rows() != n || rho.cols() != n)
    throw std::invalid_argument("exact_probabilities: density matrix must be d^2 x d^2");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("exact_probabilities: not hermitian");
  if (std::abs(rho.trace().real() - 1.0) > 1e-10 || std::abs(rho.trace().imag()) > 1e-10)
    throw std::invalid_argument("exact_probabilities: trace != 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw std::invalid_argument("exact_probabilities: not positive semidefinite");

  ExactProbabilities out;
  out.jti_probs.resize(d, d);
  for (int m = 0; m < d; ++m)
    for (int nn = 0; nn < d; ++nn)
      out.jti_probs(m, nn) = rho(m * d + nn, m * d + nn).real();

  // Fourier basis on A, conjugate Fourier on B: |j~ k~*> has coefficients
  // (1/d) w^{jm} w^{-kn} on |mn>, w = exp(2 pi i / d).
  const std::complex<double> iu(0.0, 1.0);
  out.jsi_probs.resize(d, d);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) {
      Eigen::VectorXcd v(n);
      for (int m = 0; m < d; ++m)
        for (int nn = 0; nn < d; ++nn)
          v(m * d + nn) = std::exp(iu * (2.0 * M_PI / d) * double(j * m - k * nn)) /
                          static_cast<double>(d);
      out.jsi_probs(j, k) = (v.adjoint() * rho * v)(0, 0).real();
    }
  }

  Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(n);
  for (int m = 0; m < d; ++m) phi(m * d + m) = 1.0 / std::sqrt(static_cast<double>(d));
  out.true_fidelity = (phi.adjoint() * rho * phi)(0, 0).real();
  return out;
}

std::vector<double> schmidt_decompose(const JointCountMatrix& m) {
  if (m.total() == 0) throw std::runtime_error("schmidt_decompose: zero matrix");
  Eigen::MatrixXd amp(m.d_a, m.d_b);
  for (int i = 0; i < m.d_a; ++i)
    for (int j = 0; j < m.d_b; ++j)
      amp(i, j) = std::sqrt(static_cast<double>(m.at(i, j)));
  Eigen::BDCSVD<Eigen::MatrixXd> svd(amp);
  Eigen::VectorXd sv = svd.singularValues();
  std::vector<double> eig(sv.size());
  double sum = 0.0;
  for (int i = 0; i < sv.size(); ++i) {
    eig[i] = sv(i) * sv(i);
    sum += eig[i];
  }
  for (double& e : eig) e /= sum;
  return eig;  // Eigen returns singular values in non-increasing order
}

}  // namespace qtf

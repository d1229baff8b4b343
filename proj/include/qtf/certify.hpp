#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "qtf/count_matrix.hpp"

namespace qtf {

bool is_prime(int n);

/// Schmidt coefficients of the certification target, non-increasing,
/// sum of squares = 1.
struct TargetState {
  int d = 0;
  std::vector<double> lambdas;

  static TargetState maximally_entangled(int d);
  void validate() const;  // throws on invariant violation
  bool is_uniform(double tol = 1e-9) const;
};

struct FidelityResult {
  double f1 = 0.0;
  double f2_tilde = 0.0;
  double f_tilde = 0.0;
  std::vector<double> b_k;  // thresholds for k = 1..d
  int d_ent = 1;
};

struct EofResult {
  double h1 = 0.0;          // H(A1|B1), bits
  double h2 = 0.0;          // H(A2|B2), bits
  double max_overlap = 0.0;
  double eof_lb = 0.0;      // floored at 0
  double eof_lb_raw = 0.0;  // unfloored
};

struct SteeringResult {
  double s = 0.0;      // sum of the two diagonal correlations
  double sr_lb = 0.0;  // clamped at 0
  double delta = 0.0;  // ((1 + sr)/(1 - sr))^2
  int n_cert = 1;
};

/// Sum of the k largest squared Schmidt coefficients (k/d for the maximally
/// entangled target).
double b_k(const TargetState& target, int k);

/// One-basis fidelity term: sum_m lambda_m^2 p(m,m).
double f1(const Eigen::MatrixXd& jti_probs, const TargetState& target);

// Modular prefactor of the second-basis bound. The implemented condition is
// (m - m' - n + n') mod d == 0; the printed variant (m - m' - n - n') fails
// the bound-validity oracle and is kept only for comparison.
enum class GammaConvention { kOraclePassing, kPrintedVariant };
double gamma_tilde(int m, int mp, int n, int np, int d,
                   GammaConvention convention = GammaConvention::kOraclePassing);

/// Second-basis fidelity bound: sum_j p~(j,j) - 1/d - penalty over the index
/// set {m != m', n != n', m != n, m' != n'}.
double f2_tilde(const Eigen::MatrixXd& jti_probs, const Eigen::MatrixXd& jsi_probs,
                int d, GammaConvention convention = GammaConvention::kOraclePassing);

/// Full fidelity certificate from count matrices. d must be prime unless
/// allow_nonprime is set (the tilted-basis construction assumes prime d).
FidelityResult fidelity_certify(const JointCountMatrix& jti, const JointCountMatrix& jsi,
                                const TargetState& target, bool allow_nonprime = false);

/// d_ent = maximal k with f_tilde >= B_{k-1}(target).
int certified_dimension(double f_tilde, const TargetState& target);

/// H(A|B) = H(joint) - H(B marginal), base 2; B is the column index.
double conditional_entropy_bits(const Eigen::MatrixXd& joint_probs);

EofResult eof_certify(const JointCountMatrix& jti, const JointCountMatrix& jsi,
                      double max_overlap);

SteeringResult steering_certify(const JointCountMatrix& jti, const JointCountMatrix& jsi,
                                int d, bool allow_nonprime = false);

/// Certified Schmidt number from the steering-robustness lower bound.
int schmidt_number_from_delta(double delta);

struct ExactProbabilities {
  Eigen::MatrixXd jti_probs;  // computational-basis outcome probabilities
  Eigen::MatrixXd jsi_probs;  // Fourier basis on A, conjugate Fourier on B
  double true_fidelity = 0.0; // <Phi+|rho|Phi+>
};

/// Exact two-basis outcome probabilities of an explicit d^2 x d^2 density
/// matrix (2 <= d <= 4). Oracle for the F~ <= F chain.
ExactProbabilities exact_probabilities(const Eigen::MatrixXcd& rho, int d);

/// Squared, normalized singular values of the element-wise square root,
/// non-increasing.
std::vector<double> schmidt_decompose(const JointCountMatrix& m);

}  // namespace qtf

#pragma once

#include <Eigen/Dense>
#include <vector>

namespace gle {

/// Quadrature settings shared by the mmse / mutual-information integrals.
/// B=1 integrals use Gauss-Hermite with `gh_nodes` points; B>1 integrals use
/// `qmc_samples` quasi-random Gaussian vectors.
struct QuadratureSpec {
  int gh_nodes = 101;
  int qmc_samples = 1 << 14;
};

/// Gauss-Hermite rule rewritten for expectations over N(0,1):
/// E[f(Z)] ~ sum_i weight[i] * f(node[i]), weights summing to 1.
struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Rule of order n via Golub-Welsch. Results are cached per n.
const GaussHermiteRule& gauss_hermite(int n);

/// Inverse standard normal CDF (Wichura's AS241, ~1e-15 relative accuracy).
double inverse_normal_cdf(double p);

/// Low-discrepancy Gaussian points in dimension dim: an additive-recurrence
/// (Kronecker) sequence mapped through the inverse normal CDF.
/// Row i of the result is the i-th sample.
Eigen::MatrixXd qmc_gaussian(int n, int dim);

}  // namespace gle

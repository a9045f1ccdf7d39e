#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "gle/instance.hpp"
#include "gle/prior.hpp"

namespace gle {

/// phi0 = phi / sqrt(alphaB), y0 = y / sqrt(alphaB).
std::pair<Eigen::MatrixXd, Eigen::VectorXd> rescale(const CsInstance& instance);

struct AmpState {
  Eigen::VectorXd estimate;  // s_hat^(t)
  Eigen::VectorXd residual;  // z^(t-1)
  int t = 0;
  /// Uncoupled: tau_t^2 sequence precomputed from SE.
  std::vector<double> tau2;
  /// Coupled: per-iteration per-column-block effective variances from the
  /// coupled SE recursion, (T+1) x Gamma.
  Eigen::MatrixXd tau2_blocks;
  std::vector<double> mse_trace;   // ||s - s_hat^(t)||^2 / L
  std::vector<double> ymse_trace;  // ||phi (s - s_hat^(t))||^2 / M
  /// sum_i [eta']_ii at the previous denoiser input (drives the Onsager term)
  double onsager_sum = 0.0;
  Eigen::VectorXd onsager_block;  // coupled variant, per row block
  bool diverged = false;
};

/// Fresh state at t = 0: s_hat = 0 (pinned sections at their true value),
/// tau sequence precomputed for T iterations.
AmpState init_amp(const CsInstance& instance, const DiscretePrior& prior,
                  int T, const QuadratureSpec& quad = {});

/// Onsager coefficient (1/(N alpha)) sum_i [eta']_i of the current state.
double onsager_coefficient(const AmpState& state, const CsInstance& instance);

/// One AMP iteration:
///   z^(t)       = y0 - phi0 s_hat^(t) + z^(t-1) * onsager
///   s_hat^(t+1) = eta(phi0^T z^(t) + s_hat^(t); tau_t^2)
void amp_iterate(AmpState& state, const CsInstance& instance,
                 const DiscretePrior& prior);

/// Run until t = T, the MSE stalls below stop_eps, or divergence
/// (mse > 10 v sets the diverged flag). stop_eps < 0 means 1e-8 v.
AmpState run_amp(const CsInstance& instance, const DiscretePrior& prior,
                 int T = 200, double stop_eps = -1.0,
                 const QuadratureSpec& quad = {});

struct FixedPointReport {
  double ymse;
  double mse;
  double identity_gap;  // |ymse - E/(1 + E/Delta)|
};

FixedPointReport amp_fixedpoint_identity(const AmpState& state,
                                         const CsInstance& instance);

}  // namespace gle

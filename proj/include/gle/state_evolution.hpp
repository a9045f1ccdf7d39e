#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gle/potential.hpp"
#include "gle/prior.hpp"

namespace gle {

/// One SE step: E -> mmse(Sigma(E; Delta)^-2).
double se_step(double E, const DiscretePrior& prior,
               const ChannelParams& params, const QuadratureSpec& quad = {});

struct SeTrajectory {
  std::vector<double> values;  // E^(0) = v, E^(1), ...
  bool converged;
  double fixed_point;
};

/// Iterate SE from E^(0) = v until |E^(t+1) - E^(t)| < eps or max_iter.
/// The sequence must be non-increasing (slack 1e-10 for quadrature noise).
SeTrajectory run_se(const DiscretePrior& prior, const ChannelParams& params,
                    const QuadratureSpec& quad = {}, double eps = 1e-12,
                    int max_iter = 100000);

/// tau_t^2 effective AWGN variances: tau_0^2 = (Delta+v)/(alphaB),
/// tau_{t+1}^2 = (Delta + mmse(tau_t^-2)) / (alphaB). Returns T+1 values.
std::vector<double> tau_sequence(const DiscretePrior& prior,
                                 const ChannelParams& params, int T,
                                 const QuadratureSpec& quad = {});

enum class CouplingKind { Periodic, Seeded };

/// Spatially coupled ensemble: Gamma x Gamma block variance matrix J with
/// coupling window w, plus the seeded boundary block set.
struct CouplingSpec {
  int Gamma;
  int w;
  CouplingKind kind;
  Eigen::MatrixXd J;          // Gamma x Gamma, rows sum to Gamma
  std::vector<int> boundary;  // 0-based pinned block indices (seeded only)

  bool is_pinned(int block) const;
};

/// Periodic: circulant band, J = Gamma/(2w+1) on |r-c| <= w (mod Gamma).
/// Seeded: band with periodicity broken at the edges and rows renormalized
/// to sum Gamma; boundary set = first and last 4w blocks.
/// Gamma must be odd unless allow_even is set (tiny verification runs only).
CouplingSpec build_coupling(int Gamma, int w, CouplingKind kind,
                            bool allow_even = false);

struct CoupledProfile {
  Eigen::VectorXd E;          // per-block MSE, length Gamma
  std::vector<bool> pinned;   // pinned blocks hold E_r = 0
};

CoupledProfile initial_profile(const CouplingSpec& spec, double v);

/// Per-column effective variances Sigma_c^2 of the coupled SE recursion:
/// Sigma_c^-2 = (alphaB/Gamma) sum_r J_rc / (Delta + E_r).
Eigen::VectorXd coupled_sigma2(const CoupledProfile& profile,
                               const CouplingSpec& spec,
                               const ChannelParams& params);

/// Synchronous coupled SE step: E_r <- (1/Gamma) sum_c J_rc mmse(Sigma_c^-2)
/// for unpinned r; pinned blocks stay at 0.
CoupledProfile coupled_se_step(const CoupledProfile& profile,
                               const CouplingSpec& spec,
                               const DiscretePrior& prior,
                               const ChannelParams& params,
                               const QuadratureSpec& quad = {});

struct CoupledSeResult {
  CoupledProfile profile;
  int iterations;
  bool converged;
};

/// Iterate until max_r |dE_r| < eps (default 1e-10 v) or max_iter.
CoupledSeResult run_coupled_se(const CouplingSpec& spec,
                               const DiscretePrior& prior,
                               const ChannelParams& params,
                               const QuadratureSpec& quad = {},
                               double eps = -1.0, int max_iter = 100000);

/// Smallest stationary point of the RS potential (the "good" SE branch).
double e_good(const DiscretePrior& prior, const ChannelParams& params,
              const QuadratureSpec& quad = {});

/// Finite-(Gamma, w) proxy of the coupled algorithmic threshold: sup Delta
/// with max_r E_r^(inf) <= e_good(Delta) + slack on the seeded ensemble.
double delta_amp_coupled(const DiscretePrior& prior,
                         const ChannelParams& params, int Gamma, int w,
                         const QuadratureSpec& quad = {}, double tol = 1e-4,
                         double delta_cap = 0.0, double slack = -1.0,
                         double se_eps = -1.0, int se_max_iter = 100000,
                         bool allow_even = false);

}  // namespace gle

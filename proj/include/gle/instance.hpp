#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "gle/potential.hpp"
#include "gle/prior.hpp"
#include "gle/rng.hpp"
#include "gle/state_evolution.hpp"

namespace gle {

/// One realization of the measurement model y = phi s + z sqrt(Delta).
struct CsInstance {
  Eigen::MatrixXd phi;  // M x N; homogeneous N(0,1/L) or SC block variances
  Eigen::VectorXd s;    // planted signal, length N = L*B
  Eigen::VectorXd z;    // standard Gaussian noise, length M
  Eigen::VectorXd y;    // measurements
  double delta;
  ChannelParams params;
  int L;
  std::optional<CouplingSpec> coupling;
  /// Pinned (seeded) sections: treated as known at their true values.
  /// Empty means none.
  std::vector<bool> pinned_sections;

  int M() const { return static_cast<int>(phi.rows()); }
  int N() const { return static_cast<int>(phi.cols()); }
  bool has_pins() const;
};

/// Sample an instance; M = round(alpha N). When coupled, L and M must be
/// divisible by Gamma.
CsInstance generate_instance(const DiscretePrior& prior, int L,
                             const ChannelParams& params,
                             const std::optional<CouplingSpec>& coupling,
                             Rng& rng);

/// Exact posterior by enumeration of all section assignments
/// (K^L_free <= 2^20). Pinned sections are handled by column subtraction.
class ExactPosterior {
 public:
  ExactPosterior(const CsInstance& instance, const DiscretePrior& prior);

  double log_partition() const { return log_z_; }
  /// -ln Z / L, per section of the full signal.
  double free_energy() const;
  /// Posterior marginals of the free sections, (#free) x K.
  const Eigen::MatrixXd& marginals() const { return marginals_; }
  /// Posterior mean, full length N (pinned sections at their true value).
  Eigen::VectorXd mean() const;
  /// Posterior expectation of ||X||^2.
  double mean_square_norm() const;
  /// Normalized configuration weights, enumeration order (odometer over
  /// free sections, last section fastest).
  const std::vector<double>& weights() const { return weights_; }

 private:
  const CsInstance& instance_;
  const DiscretePrior& prior_;
  std::vector<int> free_sections_;
  double log_z_;
  Eigen::MatrixXd marginals_;
  std::vector<double> weights_;
};

struct McEstimate {
  double value;
  double stderr;
  int n;
};

/// Monte Carlo MI per section, i = -M/(2L) - E[ln Z]/L over fresh instances.
McEstimate mc_mutual_information(const DiscretePrior& prior, int L,
                                 const ChannelParams& params,
                                 const std::optional<CouplingSpec>& coupling,
                                 int n_inst, Rng& rng);

struct EmpiricalMmse {
  McEstimate mmse;   // E||s - <X>||^2 / L
  McEstimate ymmse;  // E||phi(s - <X>)||^2 / M
};

EmpiricalMmse empirical_mmse(const DiscretePrior& prior, int L,
                             const ChannelParams& params, int n_inst, Rng& rng);

struct NishimoriReport {
  McEstimate overlap_gap;        // E[<X_i> S_i] - E[<X_i>^2], per coordinate
  McEstimate second_moment_gap;  // E[||S||^2]/L - E[<||X||^2>]/L
  bool pass;                     // both within 3 standard errors of 0
};

NishimoriReport nishimori_check(const DiscretePrior& prior, int L,
                                const ChannelParams& params, int n_inst,
                                Rng& rng);

struct ImmseReport {
  double fd_derivative;  // central difference of MI in Delta^-1
  double rhs;            // (alphaB/2) * empirical ymmse at Delta
  McEstimate gap;        // per-instance paired difference, common randomness
  double slack;          // discretization allowance O(h^2)
  bool pass;
};

ImmseReport immse_check(const DiscretePrior& prior, int L,
                        const ChannelParams& params, int n_inst, double h_step,
                        Rng& rng);

struct MmseRelationReport {
  EmpiricalMmse estimates;
  double identity_gap;  // |ymmse - mmse/(1 + mmse/Delta)|
  double tolerance;
  bool pass;
};

MmseRelationReport mmse_relation_check(const DiscretePrior& prior, int L,
                                       const ChannelParams& params, int n_inst,
                                       Rng& rng, double extra_slack = 0.05);

struct ScInvarianceReport {
  McEstimate mi_homogeneous;
  McEstimate mi_coupled;
  double diff;
  double tolerance;
  bool pass;
};

ScInvarianceReport sc_mi_invariance_check(const DiscretePrior& prior, int L,
                                          const ChannelParams& params,
                                          int Gamma, int w, int n_inst,
                                          Rng& rng, double slack = 0.05,
                                          bool allow_even = false);

struct FeSpreadReport {
  std::vector<int> Ls;
  std::vector<double> spread;  // sample std of -ln Z / L across instances
  bool pass;                   // non-increasing within 20% slack
};

FeSpreadReport free_energy_spread(const DiscretePrior& prior,
                                  const std::vector<int>& Ls,
                                  const ChannelParams& params, int n_inst,
                                  Rng& rng);

}  // namespace gle

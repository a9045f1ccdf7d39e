#pragma once

#include <limits>
#include <vector>

#include "gle/prior.hpp"

namespace gle {

/// Measurement channel parameters: rate alpha = M/N, section dimension B,
/// noise variance delta.
struct ChannelParams {
  double alpha;
  int B;
  double delta;

  double alphaB() const { return alpha * B; }
};

/// Sigma(E; Delta)^2 = (Delta + E) / (alpha B).
double effective_variance(double E, const ChannelParams& params);

/// psi(E; Delta) = (alphaB ln(1 + E/Delta) - E Sigma^-2) / 2. psi(0;.) = 0.
double psi(double E, const ChannelParams& params);

/// RS potential i_RS(E; Delta) = psi + denoising MI at Sigma(E; Delta)^2.
double rs_potential(double E, const DiscretePrior& prior,
                    const ChannelParams& params, const QuadratureSpec& quad = {});

/// Closed-form E-derivative:
/// d i_RS / dE = alphaB / (2 (Delta+E)^2) * (E - mmse(Sigma(E)^-2)).
double rs_potential_dE(double E, const DiscretePrior& prior,
                       const ChannelParams& params,
                       const QuadratureSpec& quad = {});

/// d i_RS(E_tilde; Delta) / d Delta^-1 = (alphaB/2) E_tilde / (1 + E_tilde/Delta),
/// valid at the global minimizer E_tilde for Delta != Delta_RS.
double rs_mi_noise_derivative(double E_tilde, const ChannelParams& params);

struct PotentialCurve {
  std::vector<double> E_grid;
  std::vector<double> values;
  std::vector<double> derivative;
};

/// Evaluate the potential and its derivative on the default E-grid
/// (log-refined near 0).
PotentialCurve scan_potential(const DiscretePrior& prior,
                              const ChannelParams& params,
                              const QuadratureSpec& quad = {},
                              int grid_n = 512);

enum class StationaryKind { LocalMin, LocalMax };

struct StationaryPoint {
  double E;
  double value;  // i_RS(E)
  StationaryKind kind;
};

struct StationarySet {
  std::vector<StationaryPoint> points;  // sorted by E
  double global_min_E;
  double global_min_value;
  bool degenerate;        // two minima with equal value within tolerance
  bool extra_roots;       // more than 3 stationary points were found
};

/// Locate all sign changes of d i_RS/dE on the grid, refine by bisection to
/// |dE| < 1e-9 v, classify and pick the global minimum (ties toward smaller E).
StationarySet stationary_points(const DiscretePrior& prior,
                                const ChannelParams& params,
                                const QuadratureSpec& quad = {},
                                int grid_n = 512);

constexpr double kDeltaInfinity = std::numeric_limits<double>::infinity();

struct Thresholds {
  double delta_amp;
  double delta_rs;
  double tol;
  bool cap_hit;  // no transition found below the Delta cap
};

/// Default Delta search cap when none is given: 10 v / (alpha B).
double default_delta_cap(const DiscretePrior& prior, const ChannelParams& params);

/// Algorithmic threshold: largest Delta with a unique SE fixed point on
/// [0, Delta]. Returns kDeltaInfinity if unique up to the cap.
double delta_amp(const DiscretePrior& prior, const ChannelParams& params,
                 const QuadratureSpec& quad = {}, double tol = 1e-6,
                 double delta_cap = 0.0);

/// Static threshold: the Delta where the two local minima of i_RS exchange
/// the global-minimum role. Requires delta_amp (pass the computed value to
/// avoid recomputation, or a negative value to compute it here).
double delta_rs(const DiscretePrior& prior, const ChannelParams& params,
                const QuadratureSpec& quad = {}, double tol = 1e-6,
                double delta_cap = 0.0, double delta_amp_hint = -1.0);

Thresholds compute_thresholds(const DiscretePrior& prior,
                              const ChannelParams& params,
                              const QuadratureSpec& quad = {},
                              double tol = 1e-6, double delta_cap = 0.0);

}  // namespace gle

#include "gle/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gle {

double effective_variance(double E, const ChannelParams& params) {
  if (E < 0.0) throw std::domain_error("effective_variance: E must be >= 0");
  const double s = params.delta + E;
  if (!(s > 0.0))
    throw std::domain_error("effective_variance: Delta + E must be > 0");
  return s / params.alphaB();
}

double psi(double E, const ChannelParams& params) {
  if (E == 0.0) return 0.0;
  if (!(params.delta > 0.0))
    throw std::domain_error("psi: Delta must be > 0 for E > 0");
  const double sigma2_inv = params.alphaB() / (params.delta + E);
  return 0.5 * (params.alphaB() * std::log1p(E / params.delta) -
                E * sigma2_inv);
}

double rs_potential(double E, const DiscretePrior& prior,
                    const ChannelParams& params, const QuadratureSpec& quad) {
  return psi(E, params) +
         denoising_mi(prior, effective_variance(E, params), quad);
}

double rs_potential_dE(double E, const DiscretePrior& prior,
                       const ChannelParams& params,
                       const QuadratureSpec& quad) {
  const double snr = 1.0 / effective_variance(E, params);
  const double m = mmse_fn(prior, snr, quad);
  const double s = params.delta + E;
  return params.alphaB() / (2.0 * s * s) * (E - m);
}

double rs_mi_noise_derivative(double E_tilde, const ChannelParams& params) {
  return 0.5 * params.alphaB() * E_tilde / (1.0 + E_tilde / params.delta);
}

namespace {

// [0, v] grid, log-refined near 0: half the points log-spaced on
// [1e-10 v, 0.1 v], half linear on [0.1 v, v].
std::vector<double> default_E_grid(double v, int n) {
  std::vector<double> grid;
  grid.reserve(n + 1);
  grid.push_back(0.0);
  const int n_log = n / 2;
  const int n_lin = n - n_log;
  const double lo = std::log(1e-10 * v);
  const double hi = std::log(0.1 * v);
  for (int i = 0; i < n_log; ++i)
    grid.push_back(std::exp(lo + (hi - lo) * i / (n_log - 1.0)));
  for (int i = 1; i <= n_lin; ++i)
    grid.push_back(0.1 * v + 0.9 * v * i / static_cast<double>(n_lin));
  return grid;
}

}  // namespace

PotentialCurve scan_potential(const DiscretePrior& prior,
                              const ChannelParams& params,
                              const QuadratureSpec& quad, int grid_n) {
  const double v = prior.second_moment();
  PotentialCurve curve;
  curve.E_grid = default_E_grid(v, grid_n);
  curve.values.reserve(curve.E_grid.size());
  curve.derivative.reserve(curve.E_grid.size());
  for (double E : curve.E_grid) {
    curve.values.push_back(rs_potential(E, prior, params, quad));
    curve.derivative.push_back(rs_potential_dE(E, prior, params, quad));
  }
  return curve;
}

StationarySet stationary_points(const DiscretePrior& prior,
                                const ChannelParams& params,
                                const QuadratureSpec& quad, int grid_n) {
  if (!(params.delta > 0.0))
    throw std::domain_error("stationary_points: Delta must be > 0");
  const double v = prior.second_moment();
  const auto grid = default_E_grid(v, grid_n);
  const auto deriv = [&](double E) {
    return rs_potential_dE(E, prior, params, quad);
  };

  StationarySet set;
  set.degenerate = false;

  std::vector<double> f(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) f[i] = deriv(grid[i]);

  // E = 0 is a stationary minimum iff the derivative rises from zero there
  // (deterministic-signal corner: mmse vanishes identically).
  if (f[1] > 0.0 && mmse_fn(prior, 1.0 / effective_variance(0.0, params),
                            quad) == 0.0) {
    set.points.push_back(
        {0.0, rs_potential(0.0, prior, params, quad), StationaryKind::LocalMin});
  }

  const double E_tol = 1e-9 * v;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (f[i] == 0.0 || f[i] * f[i + 1] > 0.0) continue;
    double lo = grid[i], hi = grid[i + 1];
    double flo = f[i];
    while (hi - lo > E_tol) {
      const double mid = 0.5 * (lo + hi);
      const double fm = deriv(mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if (flo * fm < 0.0) {
        hi = mid;
      } else {
        lo = mid;
        flo = fm;
      }
    }
    const double root = 0.5 * (lo + hi);
    const StationaryKind kind =
        (f[i] < 0.0) ? StationaryKind::LocalMin : StationaryKind::LocalMax;
    set.points.push_back({root, rs_potential(root, prior, params, quad), kind});
  }

  set.extra_roots = set.points.size() > 3;

  double best = std::numeric_limits<double>::infinity();
  double best_E = 0.0;
  const double value_tol = 1e-8;
  for (const auto& p : set.points) {
    if (p.kind != StationaryKind::LocalMin) continue;
    if (p.value < best - value_tol) {
      best = p.value;
      best_E = p.E;
    } else if (std::abs(p.value - best) <= value_tol && p.E != best_E) {
      set.degenerate = true;  // ties broken toward smaller E (points sorted)
    }
  }
  if (!std::isfinite(best))
    throw std::runtime_error("stationary_points: no minimum found");
  set.global_min_E = best_E;
  set.global_min_value = best;
  return set;
}

double default_delta_cap(const DiscretePrior& prior,
                         const ChannelParams& params) {
  return 10.0 * prior.second_moment() / params.alphaB();
}

namespace {

StationarySet at_delta(const DiscretePrior& prior, ChannelParams params,
                       double delta, const QuadratureSpec& quad) {
  params.delta = delta;
  return stationary_points(prior, params, quad);
}

}  // namespace

double delta_amp(const DiscretePrior& prior, const ChannelParams& params,
                 const QuadratureSpec& quad, double tol, double delta_cap) {
  if (!(tol > 0.0)) throw std::invalid_argument("delta_amp: tol must be > 0");
  const double cap =
      delta_cap > 0.0 ? delta_cap : default_delta_cap(prior, params);
  // Log-spaced scan for the first Delta with multiple stationary points,
  // then bisection on the boundary.
  const int n_scan = 256;
  const double lo0 = cap * 1e-4;
  double prev = 0.0;
  double first_multi = -1.0;
  for (int i = 0; i < n_scan; ++i) {
    const double d =
        lo0 * std::pow(cap / lo0, i / static_cast<double>(n_scan - 1));
    if (at_delta(prior, params, d, quad).points.size() > 1) {
      first_multi = d;
      break;
    }
    prev = d;
  }
  if (first_multi < 0.0) return kDeltaInfinity;
  double lo = std::max(prev, cap * 1e-6), hi = first_multi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (at_delta(prior, params, mid, quad).points.size() > 1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

double delta_rs(const DiscretePrior& prior, const ChannelParams& params,
                const QuadratureSpec& quad, double tol, double delta_cap,
                double delta_amp_hint) {
  const double cap =
      delta_cap > 0.0 ? delta_cap : default_delta_cap(prior, params);
  const double d_amp = delta_amp_hint >= 0.0
                           ? delta_amp_hint
                           : delta_amp(prior, params, quad, tol, cap);
  if (!std::isfinite(d_amp)) return kDeltaInfinity;

  // g(Delta) = i_RS(good min) - i_RS(bad min); negative while the small-E
  // minimum is global, crosses zero at Delta_RS.
  const auto gap = [&](double d) -> double {
    const auto s = at_delta(prior, params, d, quad);
    double good = std::numeric_limits<double>::quiet_NaN();
    double bad = std::numeric_limits<double>::quiet_NaN();
    double good_E = std::numeric_limits<double>::infinity();
    double bad_E = -std::numeric_limits<double>::infinity();
    for (const auto& p : s.points) {
      if (p.kind != StationaryKind::LocalMin) continue;
      if (p.E < good_E) {
        good_E = p.E;
        good = p.value;
      }
      if (p.E > bad_E) {
        bad_E = p.E;
        bad = p.value;
      }
    }
    if (good_E == bad_E) return std::numeric_limits<double>::quiet_NaN();
    return good - bad;
  };

  // Walk up from just above Delta_AMP in small relative steps; the two
  // minima coexist on a window starting at Delta_AMP, so the crossing is
  // bracketed before the bad branch becomes the only minimum.
  double lo = -1.0, hi = -1.0;
  double prev_d = d_amp;
  bool inside_window = false;
  for (double d = d_amp + tol; d <= cap;
       d = std::max(d * 1.02, d + tol)) {
    const double g = gap(d);
    if (std::isnan(g)) {
      // single minimum: either still within tol of d_amp, or the good
      // branch vanished before any crossing
      if (inside_window) return kDeltaInfinity;
      continue;
    }
    inside_window = true;
    if (g >= 0.0) {
      lo = prev_d;
      hi = d;
      break;
    }
    prev_d = d;
  }
  if (lo < 0.0) return kDeltaInfinity;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double g = gap(mid);
    if (std::isnan(g) || g >= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  const double result = 0.5 * (lo + hi);
  return std::max(result, d_amp);
}

Thresholds compute_thresholds(const DiscretePrior& prior,
                              const ChannelParams& params,
                              const QuadratureSpec& quad, double tol,
                              double delta_cap) {
  const double cap =
      delta_cap > 0.0 ? delta_cap : default_delta_cap(prior, params);
  Thresholds t;
  t.tol = tol;
  t.delta_amp = delta_amp(prior, params, quad, tol, cap);
  t.delta_rs = delta_rs(prior, params, quad, tol, cap, t.delta_amp);
  t.cap_hit = !std::isfinite(t.delta_amp) || !std::isfinite(t.delta_rs);
  return t;
}

}  // namespace gle

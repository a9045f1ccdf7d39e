#include "gle/state_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gle {

double se_step(double E, const DiscretePrior& prior,
               const ChannelParams& params, const QuadratureSpec& quad) {
  return mmse_fn(prior, 1.0 / effective_variance(E, params), quad);
}

SeTrajectory run_se(const DiscretePrior& prior, const ChannelParams& params,
                    const QuadratureSpec& quad, double eps, int max_iter) {
  if (!(eps > 0.0)) throw std::invalid_argument("run_se: eps must be > 0");
  SeTrajectory traj;
  traj.converged = false;
  double E = prior.second_moment();
  traj.values.push_back(E);
  for (int t = 0; t < max_iter; ++t) {
    const double next = se_step(E, prior, params, quad);
    if (next > E + 1e-10)
      throw std::runtime_error(
          "run_se: non-monotone SE step; quadrature under-resolved");
    traj.values.push_back(next);
    if (std::abs(next - E) < eps) {
      E = next;
      traj.converged = true;
      break;
    }
    E = next;
  }
  traj.fixed_point = E;
  return traj;
}

std::vector<double> tau_sequence(const DiscretePrior& prior,
                                 const ChannelParams& params, int T,
                                 const QuadratureSpec& quad) {
  if (T < 0) throw std::invalid_argument("tau_sequence: T must be >= 0");
  std::vector<double> tau2;
  tau2.reserve(T + 1);
  double t2 = (params.delta + prior.second_moment()) / params.alphaB();
  tau2.push_back(t2);
  for (int t = 0; t < T; ++t) {
    t2 = (params.delta + mmse_fn(prior, 1.0 / t2, quad)) / params.alphaB();
    tau2.push_back(t2);
  }
  return tau2;
}

bool CouplingSpec::is_pinned(int block) const {
  return std::find(boundary.begin(), boundary.end(), block) != boundary.end();
}

CouplingSpec build_coupling(int Gamma, int w, CouplingKind kind,
                            bool allow_even) {
  if (Gamma < 1 || (Gamma % 2 == 0 && !allow_even))
    throw std::domain_error("build_coupling: Gamma must be odd and positive");
  if (w < 0 || w > (Gamma - 1) / 2)
    throw std::domain_error("build_coupling: w must be in [0, (Gamma-1)/2]");
  CouplingSpec spec;
  spec.Gamma = Gamma;
  spec.w = w;
  spec.kind = kind;
  spec.J = Eigen::MatrixXd::Zero(Gamma, Gamma);
  const double band_value = static_cast<double>(Gamma) / (2 * w + 1);
  if (kind == CouplingKind::Periodic) {
    for (int r = 0; r < Gamma; ++r)
      for (int c = 0; c < Gamma; ++c) {
        int d = std::abs(r - c);
        d = std::min(d, Gamma - d);
        if (d <= w) spec.J(r, c) = band_value;
      }
  } else {
    for (int r = 0; r < Gamma; ++r) {
      int nnz = 0;
      for (int c = 0; c < Gamma; ++c)
        if (std::abs(r - c) <= w) ++nnz;
      // broken periodicity; renormalize so every row still sums to Gamma,
      // which upweights the surviving boundary entries
      const double val = static_cast<double>(Gamma) / nnz;
      for (int c = 0; c < Gamma; ++c)
        if (std::abs(r - c) <= w) spec.J(r, c) = val;
    }
    for (int b = 0; b < 4 * w && b < Gamma; ++b) spec.boundary.push_back(b);
    for (int b = std::max(Gamma - 4 * w, 4 * w); b < Gamma; ++b)
      spec.boundary.push_back(b);
  }
  return spec;
}

CoupledProfile initial_profile(const CouplingSpec& spec, double v) {
  CoupledProfile p;
  p.E = Eigen::VectorXd::Constant(spec.Gamma, v);
  p.pinned.assign(spec.Gamma, false);
  for (int b : spec.boundary) {
    p.pinned[b] = true;
    p.E[b] = 0.0;
  }
  return p;
}

Eigen::VectorXd coupled_sigma2(const CoupledProfile& profile,
                               const CouplingSpec& spec,
                               const ChannelParams& params) {
  const int Gamma = spec.Gamma;
  Eigen::VectorXd inv_noise =
      (profile.E.array() + params.delta).inverse().matrix();
  Eigen::VectorXd sigma2_inv =
      (params.alphaB() / Gamma) * (spec.J.transpose() * inv_noise);
  return sigma2_inv.array().inverse().matrix();
}

CoupledProfile coupled_se_step(const CoupledProfile& profile,
                               const CouplingSpec& spec,
                               const DiscretePrior& prior,
                               const ChannelParams& params,
                               const QuadratureSpec& quad) {
  const int Gamma = spec.Gamma;
  if (profile.E.size() != Gamma)
    throw std::invalid_argument("coupled_se_step: profile length != Gamma");
  const Eigen::VectorXd sigma2 = coupled_sigma2(profile, spec, params);
  Eigen::VectorXd m(Gamma);
  for (int c = 0; c < Gamma; ++c)
    m[c] = mmse_fn(prior, 1.0 / sigma2[c], quad);
  CoupledProfile next = profile;
  for (int r = 0; r < Gamma; ++r) {
    if (next.pinned[r]) continue;
    next.E[r] = spec.J.row(r).dot(m) / Gamma;
  }
  return next;
}

CoupledSeResult run_coupled_se(const CouplingSpec& spec,
                               const DiscretePrior& prior,
                               const ChannelParams& params,
                               const QuadratureSpec& quad, double eps,
                               int max_iter) {
  const double v = prior.second_moment();
  if (eps <= 0.0) eps = 1e-10 * v;
  CoupledSeResult res;
  res.profile = initial_profile(spec, v);
  res.converged = false;
  res.iterations = 0;
  for (int t = 0; t < max_iter; ++t) {
    CoupledProfile next = coupled_se_step(res.profile, spec, prior, params, quad);
    const double diff = (next.E - res.profile.E).cwiseAbs().maxCoeff();
    res.profile = std::move(next);
    ++res.iterations;
    if (diff < eps) {
      res.converged = true;
      break;
    }
  }
  return res;
}

double e_good(const DiscretePrior& prior, const ChannelParams& params,
              const QuadratureSpec& quad) {
  const auto set = stationary_points(prior, params, quad);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : set.points) best = std::min(best, p.E);
  return best;
}

double delta_amp_coupled(const DiscretePrior& prior,
                         const ChannelParams& params, int Gamma, int w,
                         const QuadratureSpec& quad, double tol,
                         double delta_cap, double slack, double se_eps,
                         int se_max_iter, bool allow_even) {
  const double v = prior.second_moment();
  if (slack < 0.0) slack = 1e-3 * v;
  const double cap =
      delta_cap > 0.0 ? delta_cap : default_delta_cap(prior, params);
  const auto spec = build_coupling(Gamma, w, CouplingKind::Seeded, allow_even);

  const auto reconstructs = [&](double delta) -> bool {
    ChannelParams p = params;
    p.delta = delta;
    const auto res = run_coupled_se(spec, prior, p, quad, se_eps, se_max_iter);
    return res.profile.E.maxCoeff() <= e_good(prior, p, quad) + slack;
  };

  // The coupled threshold lies in [delta_amp, delta_rs]: seeding can only
  // help (lower bound), and above delta_rs the small-E branch is no longer
  // the global minimum, so the search is confined to that interval where
  // the reconstruction predicate is monotone.
  const Thresholds th =
      compute_thresholds(prior, params, quad, std::min(tol, 1e-6), cap);
  if (!std::isfinite(th.delta_rs)) return kDeltaInfinity;
  double lo = th.delta_amp;
  double hi = th.delta_rs;
  if (!reconstructs(lo)) return lo;
  if (reconstructs(hi)) return hi;  // saturated up to the static threshold
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (reconstructs(mid))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace gle

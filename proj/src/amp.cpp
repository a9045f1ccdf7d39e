#include "gle/amp.hpp"

#include <cmath>
#include <stdexcept>

#include "gle/state_evolution.hpp"

namespace gle {

std::pair<Eigen::MatrixXd, Eigen::VectorXd> rescale(const CsInstance& instance) {
  const double scale = 1.0 / std::sqrt(instance.params.alphaB());
  return {instance.phi * scale, instance.y * scale};
}

namespace {

void record_traces(AmpState& state, const CsInstance& instance) {
  const Eigen::VectorXd err = instance.s - state.estimate;
  state.mse_trace.push_back(err.squaredNorm() / instance.L);
  state.ymse_trace.push_back((instance.phi * err).squaredNorm() /
                             instance.M());
}

bool section_pinned(const CsInstance& instance, int l) {
  return !instance.pinned_sections.empty() && instance.pinned_sections[l];
}

}  // namespace

AmpState init_amp(const CsInstance& instance, const DiscretePrior& prior,
                  int T, const QuadratureSpec& quad) {
  if (T < 1) throw std::invalid_argument("init_amp: T must be >= 1");
  AmpState state;
  state.estimate = Eigen::VectorXd::Zero(instance.N());
  const int B = prior.section_dim();
  for (int l = 0; l < instance.L; ++l)
    if (section_pinned(instance, l))
      state.estimate.segment(static_cast<Eigen::Index>(l) * B, B) =
          instance.s.segment(static_cast<Eigen::Index>(l) * B, B);
  state.residual = Eigen::VectorXd::Zero(instance.M());
  state.onsager_sum = 0.0;

  if (instance.coupling) {
    // SC-AMP (experimental): per-block variances from the coupled SE
    // trajectory, per-row-block Onsager sums.
    const auto& spec = *instance.coupling;
    CoupledProfile profile = initial_profile(spec, prior.second_moment());
    if (spec.kind == CouplingKind::Seeded && !instance.has_pins())
      throw std::invalid_argument(
          "init_amp: seeded coupling requires apply_seed on the instance");
    state.tau2_blocks.resize(T + 1, spec.Gamma);
    for (int t = 0; t <= T; ++t) {
      state.tau2_blocks.row(t) =
          coupled_sigma2(profile, spec, instance.params).transpose();
      if (t < T)
        profile = coupled_se_step(profile, spec, prior, instance.params, quad);
    }
    state.onsager_block = Eigen::VectorXd::Zero(spec.Gamma);
  } else {
    state.tau2 = tau_sequence(prior, instance.params, T, quad);
  }
  record_traces(state, instance);
  return state;
}

double onsager_coefficient(const AmpState& state, const CsInstance& instance) {
  return state.onsager_sum / (instance.N() * instance.params.alpha);
}

void amp_iterate(AmpState& state, const CsInstance& instance,
                 const DiscretePrior& prior) {
  const int B = prior.section_dim();
  const int L = instance.L;
  const int N = instance.N();
  const double root_ab = std::sqrt(instance.params.alphaB());
  const int max_t = instance.coupling
                        ? static_cast<int>(state.tau2_blocks.rows()) - 1
                        : static_cast<int>(state.tau2.size()) - 1;
  if (state.t > max_t)
    throw std::out_of_range("amp_iterate: tau sequence exhausted");

  // z^(t) = y0 - phi0 s_hat^(t) + z^(t-1) * onsager
  Eigen::VectorXd z_new =
      (instance.y - instance.phi * state.estimate) / root_ab;
  if (instance.coupling) {
    const int rows_per_block = instance.M() / instance.coupling->Gamma;
    for (int r = 0; r < instance.coupling->Gamma; ++r) {
      const double b =
          state.onsager_block[r] / (N * instance.params.alpha);
      z_new.segment(static_cast<Eigen::Index>(r) * rows_per_block,
                    rows_per_block) +=
          b * state.residual.segment(
                  static_cast<Eigen::Index>(r) * rows_per_block,
                  rows_per_block);
    }
  } else {
    z_new += onsager_coefficient(state, instance) * state.residual;
  }

  const Eigen::VectorXd r_eff =
      instance.phi.transpose() * z_new / root_ab + state.estimate;

  double onsager_sum = 0.0;
  Eigen::VectorXd block_sums;
  const CouplingSpec* spec =
      instance.coupling ? &*instance.coupling : nullptr;
  const int sections_per_block = spec ? L / spec->Gamma : 0;
  if (spec) block_sums = Eigen::VectorXd::Zero(spec->Gamma);

  for (int l = 0; l < L; ++l) {
    const Eigen::Index off = static_cast<Eigen::Index>(l) * B;
    if (section_pinned(instance, l)) continue;  // estimate stays exact
    double tau2;
    if (spec) {
      const int c = l / sections_per_block;
      tau2 = state.tau2_blocks(state.t, c);
    } else {
      tau2 = state.tau2[state.t];
    }
    const Eigen::VectorXd yl = r_eff.segment(off, B);
    state.estimate.segment(off, B) = prior.denoise(yl, tau2);
    const double jac_trace =
        prior.denoiser_jacobian(yl, tau2).trace();
    if (spec)
      block_sums[l / sections_per_block] += jac_trace;
    else
      onsager_sum += jac_trace;
  }

  if (spec) {
    // b_r mixes column-block sums through J, reducing to the homogeneous
    // coefficient when J is all ones
    state.onsager_block = spec->J * block_sums;
  } else {
    state.onsager_sum = onsager_sum;
  }
  state.residual = std::move(z_new);
  state.t += 1;
  record_traces(state, instance);
}

AmpState run_amp(const CsInstance& instance, const DiscretePrior& prior, int T,
                 double stop_eps, const QuadratureSpec& quad) {
  const double v = prior.second_moment();
  if (stop_eps < 0.0) stop_eps = 1e-8 * v;
  AmpState state = init_amp(instance, prior, T, quad);
  for (int t = 0; t < T; ++t) {
    amp_iterate(state, instance, prior);
    const double mse = state.mse_trace.back();
    if (mse > 10.0 * v) {
      state.diverged = true;
      break;
    }
    if (std::abs(mse - state.mse_trace[state.mse_trace.size() - 2]) < stop_eps)
      break;
  }
  return state;
}

FixedPointReport amp_fixedpoint_identity(const AmpState& state,
                                         const CsInstance& instance) {
  FixedPointReport rep;
  rep.ymse = state.ymse_trace.back();
  rep.mse = state.mse_trace.back();
  const double predicted = rep.mse / (1.0 + rep.mse / instance.delta);
  rep.identity_gap = std::abs(rep.ymse - predicted);
  return rep;
}

}  // namespace gle

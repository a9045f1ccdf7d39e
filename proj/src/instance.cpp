#include "gle/instance.hpp"

#include <cmath>
#include <stdexcept>

#include "gle/coupling.hpp"

namespace gle {

bool CsInstance::has_pins() const {
  for (bool p : pinned_sections)
    if (p) return true;
  return false;
}

CsInstance generate_instance(const DiscretePrior& prior, int L,
                             const ChannelParams& params,
                             const std::optional<CouplingSpec>& coupling,
                             Rng& rng) {
  const int B = prior.section_dim();
  if (B != params.B)
    throw std::invalid_argument("generate_instance: prior B != params B");
  const int N = L * B;
  const int M = static_cast<int>(std::lround(params.alpha * N));
  if (M < 1) throw std::domain_error("generate_instance: M must be >= 1");

  CsInstance inst;
  inst.params = params;
  inst.delta = params.delta;
  inst.L = L;
  inst.coupling = coupling;

  Rng phi_rng = rng.derive("phi");
  Rng s_rng = rng.derive("signal");
  Rng z_rng = rng.derive("noise");

  if (coupling) {
    if (L % coupling->Gamma != 0)
      throw std::domain_error(
          "generate_instance: L must be divisible by Gamma");
    inst.phi = sample_sc_matrix(*coupling, L, params, phi_rng);
  } else {
    const double sd = 1.0 / std::sqrt(static_cast<double>(L));
    inst.phi.resize(M, N);
    for (int mu = 0; mu < M; ++mu)
      for (int i = 0; i < N; ++i) inst.phi(mu, i) = sd * phi_rng.gaussian();
  }

  inst.s = prior.sample_sections(L, s_rng);
  inst.z.resize(M);
  for (int mu = 0; mu < M; ++mu) inst.z[mu] = z_rng.gaussian();
  inst.y = inst.phi * inst.s + std::sqrt(inst.delta) * inst.z;
  return inst;
}

ExactPosterior::ExactPosterior(const CsInstance& instance,
                               const DiscretePrior& prior)
    : instance_(instance), prior_(prior) {
  const int B = prior.section_dim();
  const int K = prior.num_atoms();
  const int L = instance.L;
  const int M = instance.M();
  if (!(instance.delta > 0.0))
    throw std::domain_error("ExactPosterior: Delta must be > 0");

  Eigen::VectorXd y_eff = instance.y;
  for (int l = 0; l < L; ++l) {
    const bool pinned =
        !instance.pinned_sections.empty() && instance.pinned_sections[l];
    if (pinned)
      y_eff -= instance.phi.middleCols(static_cast<Eigen::Index>(l) * B, B) *
               instance.s.segment(static_cast<Eigen::Index>(l) * B, B);
    else
      free_sections_.push_back(l);
  }
  const int Lf = static_cast<int>(free_sections_.size());
  if (Lf * std::log2(static_cast<double>(K)) > 20.0 + 1e-9)
    throw std::domain_error(
        "ExactPosterior: enumeration bound K^L_free <= 2^20 exceeded");

  // Per free section, the M-vector contribution of each atom.
  std::vector<Eigen::MatrixXd> contrib(Lf);  // each M x K
  for (int f = 0; f < Lf; ++f) {
    contrib[f].resize(M, K);
    const auto cols = instance.phi.middleCols(
        static_cast<Eigen::Index>(free_sections_[f]) * B, B);
    for (int k = 0; k < K; ++k)
      contrib[f].col(k) = cols * prior.atoms().row(k).transpose();
  }
  const Eigen::VectorXd log_p = prior.weights().array().log().matrix();

  std::size_t n_cfg = 1;
  for (int f = 0; f < Lf; ++f) n_cfg *= K;
  std::vector<double> log_w(n_cfg);

  // Depth-first enumeration, last section fastest; partial measurement sums
  // reuse the common prefix.
  std::vector<Eigen::VectorXd> partial(Lf + 1, Eigen::VectorXd(M));
  partial[0].setZero();
  std::vector<double> partial_logp(Lf + 1, 0.0);
  std::vector<int> digit(Lf, 0);
  std::size_t cfg = 0;
  int depth = 0;
  while (true) {
    if (depth == Lf) {
      log_w[cfg++] =
          partial_logp[Lf] -
          (partial[Lf] - y_eff).squaredNorm() / (2.0 * instance.delta);
      --depth;
      while (depth >= 0 && ++digit[depth] == K) {
        digit[depth] = 0;
        --depth;
      }
      if (depth < 0) break;
    }
    partial[depth + 1] = partial[depth] + contrib[depth].col(digit[depth]);
    partial_logp[depth + 1] = partial_logp[depth] + log_p[digit[depth]];
    ++depth;
  }

  double max_lw = -std::numeric_limits<double>::infinity();
  for (double lw : log_w) max_lw = std::max(max_lw, lw);
  double sum = 0.0;
  for (double lw : log_w) sum += std::exp(lw - max_lw);
  log_z_ = max_lw + std::log(sum);

  weights_.resize(n_cfg);
  marginals_ = Eigen::MatrixXd::Zero(Lf, K);
  for (std::size_t n = 0; n < n_cfg; ++n) {
    const double w = std::exp(log_w[n] - log_z_);
    weights_[n] = w;
    std::size_t rem = n;
    for (int f = Lf - 1; f >= 0; --f) {
      marginals_(f, rem % K) += w;
      rem /= K;
    }
  }
}

double ExactPosterior::free_energy() const {
  return -log_z_ / instance_.L;
}

Eigen::VectorXd ExactPosterior::mean() const {
  const int B = prior_.section_dim();
  Eigen::VectorXd m = instance_.s;  // pinned sections keep the true value
  for (std::size_t f = 0; f < free_sections_.size(); ++f)
    m.segment(static_cast<Eigen::Index>(free_sections_[f]) * B, B) =
        prior_.atoms().transpose() * marginals_.row(f).transpose();
  return m;
}

double ExactPosterior::mean_square_norm() const {
  const int B = prior_.section_dim();
  const Eigen::VectorXd atom_sq = prior_.atoms().rowwise().squaredNorm();
  double total = 0.0;
  for (int f = 0; f < marginals_.rows(); ++f)
    total += marginals_.row(f).dot(atom_sq);
  for (int l = 0; l < instance_.L; ++l)
    if (!instance_.pinned_sections.empty() && instance_.pinned_sections[l])
      total += instance_.s.segment(static_cast<Eigen::Index>(l) * B, B)
                   .squaredNorm();
  return total;
}

namespace {

McEstimate summarize(const std::vector<double>& xs) {
  const int n = static_cast<int>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var = (n > 1) ? var / (n - 1) : 0.0;
  return {mean, std::sqrt(var / n), n};
}

CsInstance draw(const DiscretePrior& prior, int L, const ChannelParams& params,
                const std::optional<CouplingSpec>& coupling, Rng& rng,
                std::uint64_t idx) {
  Rng sub = rng.derive(idx);
  CsInstance inst = generate_instance(prior, L, params, coupling, sub);
  if (coupling && coupling->kind == CouplingKind::Seeded)
    inst = apply_seed(inst, *coupling);
  return inst;
}

}  // namespace

McEstimate mc_mutual_information(const DiscretePrior& prior, int L,
                                 const ChannelParams& params,
                                 const std::optional<CouplingSpec>& coupling,
                                 int n_inst, Rng& rng) {
  std::vector<double> vals(n_inst);
  for (int n = 0; n < n_inst; ++n) {
    const CsInstance inst = draw(prior, L, params, coupling, rng, n);
    const ExactPosterior post(inst, prior);
    vals[n] = -inst.M() / (2.0 * L) - post.log_partition() / L;
  }
  return summarize(vals);
}

EmpiricalMmse empirical_mmse(const DiscretePrior& prior, int L,
                             const ChannelParams& params, int n_inst,
                             Rng& rng) {
  std::vector<double> ms(n_inst), ys(n_inst);
  for (int n = 0; n < n_inst; ++n) {
    const CsInstance inst = draw(prior, L, params, std::nullopt, rng, n);
    const ExactPosterior post(inst, prior);
    const Eigen::VectorXd err = inst.s - post.mean();
    ms[n] = err.squaredNorm() / L;
    ys[n] = (inst.phi * err).squaredNorm() / inst.M();
  }
  return {summarize(ms), summarize(ys)};
}

NishimoriReport nishimori_check(const DiscretePrior& prior, int L,
                                const ChannelParams& params, int n_inst,
                                Rng& rng) {
  std::vector<double> overlap(n_inst), second(n_inst);
  for (int n = 0; n < n_inst; ++n) {
    const CsInstance inst = draw(prior, L, params, std::nullopt, rng, n);
    const ExactPosterior post(inst, prior);
    const Eigen::VectorXd m = post.mean();
    overlap[n] = (m.dot(inst.s) - m.squaredNorm()) / inst.N();
    second[n] = (inst.s.squaredNorm() - post.mean_square_norm()) / L;
  }
  NishimoriReport rep{summarize(overlap), summarize(second), false};
  const auto ok = [](const McEstimate& e) {
    return std::abs(e.value) <= 3.0 * e.stderr + 1e-12;
  };
  rep.pass = ok(rep.overlap_gap) && ok(rep.second_moment_gap);
  return rep;
}

ImmseReport immse_check(const DiscretePrior& prior, int L,
                        const ChannelParams& params, int n_inst, double h_step,
                        Rng& rng) {
  const double gamma = 1.0 / params.delta;
  if (!(h_step > 0.0 && h_step < gamma))
    throw std::invalid_argument("immse_check: h_step must be in (0, 1/Delta)");
  std::vector<double> fd(n_inst), rhs(n_inst), gap(n_inst);
  for (int n = 0; n < n_inst; ++n) {
    // common random numbers: one (phi, s, z), three noise levels
    CsInstance base = draw(prior, L, params, std::nullopt, rng, n);
    const auto at_gamma = [&](double g) {
      CsInstance inst = base;
      inst.delta = 1.0 / g;
      inst.y = inst.phi * inst.s + std::sqrt(inst.delta) * inst.z;
      return ExactPosterior(inst, prior).log_partition();
    };
    fd[n] = -(at_gamma(gamma + h_step) - at_gamma(gamma - h_step)) /
            (2.0 * h_step * L);
    const ExactPosterior post(base, prior);
    const Eigen::VectorXd err = base.s - post.mean();
    rhs[n] = (base.M() / (2.0 * L)) * (base.phi * err).squaredNorm() / base.M();
    gap[n] = fd[n] - rhs[n];
  }
  ImmseReport rep;
  rep.fd_derivative = summarize(fd).value;
  rep.rhs = summarize(rhs).value;
  rep.gap = summarize(gap);
  rep.slack = h_step * h_step;
  rep.pass = std::abs(rep.gap.value) <= 3.0 * rep.gap.stderr + rep.slack;
  return rep;
}

MmseRelationReport mmse_relation_check(const DiscretePrior& prior, int L,
                                       const ChannelParams& params, int n_inst,
                                       Rng& rng, double extra_slack) {
  MmseRelationReport rep;
  rep.estimates = empirical_mmse(prior, L, params, n_inst, rng);
  const double m = rep.estimates.mmse.value;
  const double predicted = m / (1.0 + m / params.delta);
  rep.identity_gap = std::abs(rep.estimates.ymmse.value - predicted);
  const double se = std::sqrt(rep.estimates.ymmse.stderr * rep.estimates.ymmse.stderr +
                              rep.estimates.mmse.stderr * rep.estimates.mmse.stderr);
  rep.tolerance = std::max(3.0 * se, extra_slack);
  rep.pass = rep.identity_gap <= rep.tolerance;
  return rep;
}

ScInvarianceReport sc_mi_invariance_check(const DiscretePrior& prior, int L,
                                          const ChannelParams& params,
                                          int Gamma, int w, int n_inst,
                                          Rng& rng, double slack,
                                          bool allow_even) {
  const auto spec = build_coupling(Gamma, w, CouplingKind::Periodic, allow_even);
  Rng rng_h = rng.derive("homogeneous");
  Rng rng_c = rng.derive("coupled");
  ScInvarianceReport rep;
  rep.mi_homogeneous =
      mc_mutual_information(prior, L, params, std::nullopt, n_inst, rng_h);
  rep.mi_coupled = mc_mutual_information(prior, L, params, spec, n_inst, rng_c);
  rep.diff = rep.mi_coupled.value - rep.mi_homogeneous.value;
  const double se =
      std::sqrt(rep.mi_homogeneous.stderr * rep.mi_homogeneous.stderr +
                rep.mi_coupled.stderr * rep.mi_coupled.stderr);
  rep.tolerance = 3.0 * se + slack;
  rep.pass = std::abs(rep.diff) <= rep.tolerance;
  return rep;
}

FeSpreadReport free_energy_spread(const DiscretePrior& prior,
                                  const std::vector<int>& Ls,
                                  const ChannelParams& params, int n_inst,
                                  Rng& rng) {
  FeSpreadReport rep;
  rep.Ls = Ls;
  for (std::size_t j = 0; j < Ls.size(); ++j) {
    Rng sub = rng.derive(1000 + j);
    std::vector<double> fe(n_inst);
    for (int n = 0; n < n_inst; ++n) {
      const CsInstance inst =
          draw(prior, Ls[j], params, std::nullopt, sub, n);
      fe[n] = ExactPosterior(inst, prior).free_energy();
    }
    const McEstimate e = summarize(fe);
    rep.spread.push_back(e.stderr * std::sqrt(static_cast<double>(n_inst)));
  }
  rep.pass = true;
  for (std::size_t j = 0; j + 1 < rep.spread.size(); ++j)
    if (rep.spread[j + 1] > 1.2 * rep.spread[j]) rep.pass = false;
  return rep;
}

}  // namespace gle

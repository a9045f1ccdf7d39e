#include "gle/coupling.hpp"

#include <cmath>
#include <stdexcept>

namespace gle {

BlockLayout::BlockLayout(int Gamma_, int M, int N) : Gamma(Gamma_) {
  if (Gamma < 1 || M % Gamma != 0 || N % Gamma != 0)
    throw std::domain_error(
        "BlockLayout: M and N must be divisible by Gamma (M=" +
        std::to_string(M) + ", N=" + std::to_string(N) +
        ", Gamma=" + std::to_string(Gamma) + ")");
  rows_per_block = M / Gamma;
  cols_per_block = N / Gamma;
}

Eigen::MatrixXd sample_sc_matrix(const CouplingSpec& spec, int L,
                                 const ChannelParams& params, Rng& rng) {
  const int B = params.B;
  const int N = L * B;
  const int M = static_cast<int>(std::lround(params.alpha * N));
  const BlockLayout layout(spec.Gamma, M, N);
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(M, N);
  for (int r = 0; r < spec.Gamma; ++r) {
    for (int c = 0; c < spec.Gamma; ++c) {
      if (spec.J(r, c) == 0.0) continue;
      const double sd = std::sqrt(spec.J(r, c) / L);
      for (int mu = r * layout.rows_per_block;
           mu < (r + 1) * layout.rows_per_block; ++mu)
        for (int i = c * layout.cols_per_block;
             i < (c + 1) * layout.cols_per_block; ++i)
          phi(mu, i) = sd * rng.gaussian();
    }
  }
  return phi;
}

CsInstance apply_seed(const CsInstance& instance, const CouplingSpec& spec) {
  if (spec.kind != CouplingKind::Seeded)
    throw std::invalid_argument("apply_seed: spec kind must be seeded");
  if (instance.L % spec.Gamma != 0)
    throw std::domain_error("apply_seed: L must be divisible by Gamma");
  CsInstance seeded = instance;
  seeded.pinned_sections.assign(instance.L, false);
  const int sections_per_block = instance.L / spec.Gamma;
  for (int b : spec.boundary)
    for (int l = b * sections_per_block; l < (b + 1) * sections_per_block; ++l)
      seeded.pinned_sections[l] = true;
  return seeded;
}

}  // namespace gle

#pragma once

#include <Eigen/Dense>

#include "gle/instance.hpp"
#include "gle/state_evolution.hpp"

namespace gle {

/// Block index bookkeeping for a Gamma x Gamma partition of an M x N matrix.
struct BlockLayout {
  int Gamma;
  int rows_per_block;
  int cols_per_block;

  BlockLayout(int Gamma_, int M, int N);

  int row_block(int mu) const { return mu / rows_per_block; }
  int col_block(int i) const { return i / cols_per_block; }
};

/// Spatially coupled measurement matrix: block (r,c) entries ~ N(0, J_rc/L),
/// zero blocks exactly zero.
Eigen::MatrixXd sample_sc_matrix(const CouplingSpec& spec, int L,
                                 const ChannelParams& params, Rng& rng);

/// Mark the boundary-block signal sections of a seeded instance as known.
/// Downstream consumers (AMP, exact posterior) treat them by column
/// subtraction: their contribution is removed from y and they contribute
/// zero to the MSE.
CsInstance apply_seed(const CsInstance& instance, const CouplingSpec& spec);

}  // namespace gle

#pragma once

#include <Eigen/Core>
#include <vector>

#include "gripest/types.hpp"

namespace gripest::mhe {

using Mat12 = Eigen::Matrix<double, 12, 12>;
using Mat6x12 = Eigen::Matrix<double, 6, 12>;

/// Normal equations of one window problem. The state chain couples only
/// neighbouring states, so the Hessian is block-tridiagonal in the states
/// with a dense border for the 12 tire parameters ("block arrow").
///
///   [ D0  U0            W0 ]
///   [ U0' D1  U1        W1 ]
///   [     ..  ..  ..    .. ]
///   [ W0' W1' ...       C  ]
struct BlockArrowSystem {
  std::vector<Mat6> diag;
  std::vector<Mat6> upper;     // block (i, i+1)
  std::vector<Mat6x12> border;  // block (i, P)
  Mat12 corner = Mat12::Zero();
  std::vector<Vec6> g_state;   // gradient J' r
  Vec12 g_param = Vec12::Zero();

  void reset(std::size_t num_states);
  std::size_t num_states() const { return diag.size(); }
  std::size_t dim() const { return 6 * diag.size() + 12; }

  Eigen::MatrixXd dense_hessian() const;
  Eigen::VectorXd dense_gradient() const;
};

/// Solves H d = -g by block Cholesky of the state chain followed by a
/// Schur complement on the parameters. Returns false if H is not positive
/// definite.
bool solve_block_arrow(const BlockArrowSystem& sys, std::vector<Vec6>& d_state, Vec12& d_param);

/// Same system solved densely; test reference only.
bool solve_dense_reference(const BlockArrowSystem& sys, std::vector<Vec6>& d_state,
                           Vec12& d_param);

}  // namespace gripest::mhe

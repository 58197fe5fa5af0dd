#include "gripest/mhe/block_solver.hpp"

#include <Eigen/Cholesky>

namespace gripest::mhe {

void BlockArrowSystem::reset(std::size_t n) {
  diag.assign(n, Mat6::Zero());
  upper.assign(n > 0 ? n - 1 : 0, Mat6::Zero());
  border.assign(n, Mat6x12::Zero());
  corner.setZero();
  g_state.assign(n, Vec6::Zero());
  g_param.setZero();
}

Eigen::MatrixXd BlockArrowSystem::dense_hessian() const {
  const Eigen::Index n = static_cast<Eigen::Index>(num_states());
  const Eigen::Index p = 6 * n;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(p + 12, p + 12);
  for (Eigen::Index i = 0; i < n; ++i) {
    H.block<6, 6>(6 * i, 6 * i) = diag[i];
    if (i + 1 < n) {
      H.block<6, 6>(6 * i, 6 * (i + 1)) = upper[i];
      H.block<6, 6>(6 * (i + 1), 6 * i) = upper[i].transpose();
    }
    H.block<6, 12>(6 * i, p) = border[i];
    H.block<12, 6>(p, 6 * i) = border[i].transpose();
  }
  H.block<12, 12>(p, p) = corner;
  return H;
}

Eigen::VectorXd BlockArrowSystem::dense_gradient() const {
  const Eigen::Index n = static_cast<Eigen::Index>(num_states());
  Eigen::VectorXd g(6 * n + 12);
  for (Eigen::Index i = 0; i < n; ++i) g.segment<6>(6 * i) = g_state[i];
  g.tail<12>() = g_param;
  return g;
}

bool solve_block_arrow(const BlockArrowSystem& sys, std::vector<Vec6>& d_state, Vec12& d_param) {
  const std::size_t n = sys.num_states();
  d_state.assign(n, Vec6::Zero());
  if (n == 0) return false;

  // Block Cholesky of the tridiagonal chain: A = L L', L lower block-bidiagonal.
  std::vector<Mat6> Ld(n);   // diagonal factors (lower triangular)
  std::vector<Mat6> Ls(n);   // sub-diagonal blocks L(i, i-1), index i
  for (std::size_t i = 0; i < n; ++i) {
    Mat6 a = sys.diag[i];
    if (i > 0) a.noalias() -= Ls[i] * Ls[i].transpose();
    Eigen::LLT<Mat6> llt(a);
    if (llt.info() != Eigen::Success) return false;
    Ld[i] = llt.matrixL();
    if (i + 1 < n) {
      // L(i+1, i) = U_i' L_ii^{-T}
      Ls[i + 1] = Ld[i].triangularView<Eigen::Lower>()
                      .solve(sys.upper[i])
                      .transpose();
    }
  }

  auto forward = [&](auto& rhs) {  // rhs <- L^{-1} rhs, blockwise
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) rhs[i] -= Ls[i] * rhs[i - 1];
      rhs[i] = Ld[i].triangularView<Eigen::Lower>().solve(rhs[i]);
    }
  };
  auto backward = [&](auto& rhs) {  // rhs <- L^{-T} rhs
    for (std::size_t k = n; k-- > 0;) {
      if (k + 1 < n) rhs[k] -= Ls[k + 1].transpose() * rhs[k + 1];
      rhs[k] = Ld[k].transpose().triangularView<Eigen::Upper>().solve(rhs[k]);
    }
  };

  // Y = A^{-1} W and z = A^{-1} (-g_x).
  std::vector<Mat6x12> Y(sys.border);
  forward(Y);
  backward(Y);
  std::vector<Vec6> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = -sys.g_state[i];
  forward(z);
  backward(z);

  Mat12 S = sys.corner;
  Vec12 rhs = -sys.g_param;
  for (std::size_t i = 0; i < n; ++i) {
    S.noalias() -= sys.border[i].transpose() * Y[i];
    rhs.noalias() -= sys.border[i].transpose() * z[i];
  }
  Eigen::LLT<Mat12> schur(S);
  if (schur.info() != Eigen::Success) return false;
  d_param = schur.solve(rhs);
  for (std::size_t i = 0; i < n; ++i) d_state[i] = z[i] - Y[i] * d_param;
  return d_param.allFinite();
}

bool solve_dense_reference(const BlockArrowSystem& sys, std::vector<Vec6>& d_state,
                           Vec12& d_param) {
  const Eigen::MatrixXd H = sys.dense_hessian();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
  if (ldlt.info() != Eigen::Success) return false;
  const Eigen::VectorXd d = ldlt.solve(-sys.dense_gradient());
  const std::size_t n = sys.num_states();
  d_state.resize(n);
  for (std::size_t i = 0; i < n; ++i) d_state[i] = d.segment<6>(6 * static_cast<Eigen::Index>(i));
  d_param = d.tail<12>();
  return d.allFinite();
}

}  // namespace gripest::mhe

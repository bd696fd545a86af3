#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

namespace pvregime {

// Lawson-Hanson active-set solver for min ||Ax - b|| s.t. x >= 0.
// Problems here are tiny (tens of columns), so dense QR per pivot is fine.
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            int max_iter = -1) {
  const int n = static_cast<int>(A.cols());
  if (max_iter < 0) max_iter = 5 * n + 20;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<char> passive(static_cast<size_t>(n), 0);

  const double tol = 10.0 * std::numeric_limits<double>::epsilon() *
                     A.cwiseAbs().colwise().sum().maxCoeff() *
                     static_cast<double>(std::max(A.rows(), A.cols()));

  auto solve_passive = [&](Eigen::VectorXd& z, std::vector<int>& idx) {
    idx.clear();
    for (int j = 0; j < n; ++j)
      if (passive[static_cast<size_t>(j)]) idx.push_back(j);
    Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (size_t c = 0; c < idx.size(); ++c) Ap.col(static_cast<Eigen::Index>(c)) = A.col(idx[c]);
    z = Ap.colPivHouseholderQr().solve(b);
  };

  Eigen::VectorXd w = A.transpose() * (b - A * x);
  std::vector<int> idx;
  Eigen::VectorXd z;
  for (int outer = 0; outer < max_iter; ++outer) {
    int best = -1;
    double best_w = tol;
    for (int j = 0; j < n; ++j)
      if (!passive[static_cast<size_t>(j)] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    if (best < 0) break;
    passive[static_cast<size_t>(best)] = 1;

    for (int inner = 0; inner < max_iter; ++inner) {
      solve_passive(z, idx);
      bool all_pos = true;
      for (size_t c = 0; c < idx.size(); ++c)
        if (z[static_cast<Eigen::Index>(c)] <= 0) all_pos = false;
      if (all_pos) {
        x.setZero();
        for (size_t c = 0; c < idx.size(); ++c) x[idx[c]] = z[static_cast<Eigen::Index>(c)];
        break;
      }
      double alpha = std::numeric_limits<double>::infinity();
      for (size_t c = 0; c < idx.size(); ++c) {
        double zc = z[static_cast<Eigen::Index>(c)];
        if (zc <= 0) {
          double xc = x[idx[c]];
          alpha = std::min(alpha, xc / (xc - zc));
        }
      }
      for (size_t c = 0; c < idx.size(); ++c) {
        int j = idx[c];
        x[j] += alpha * (z[static_cast<Eigen::Index>(c)] - x[j]);
        if (x[j] <= 1e-14) {
          x[j] = 0;
          passive[static_cast<size_t>(j)] = 0;
        }
      }
    }
    w = A.transpose() * (b - A * x);
  }
  for (int j = 0; j < n; ++j)
    if (x[j] < 0) x[j] = 0;
  return x;
}

}  // namespace pvregime

#pragma once

#include <cmath>
#include <vector>

#include "fedqol/error.hpp"

// Dense solves at questionnaire scale (dozens of features). Gaussian
// elimination with partial pivoting is plenty here.

namespace fedqol {

inline std::vector<double> solve_linear_system(
    std::vector<std::vector<double>> a, std::vector<double> b) {
  std::size_t n = a.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r) {
      if (std::abs(a[r][k]) > std::abs(a[piv][k])) piv = r;
    }
    if (std::abs(a[piv][k]) < 1e-12) {
      throw data_error("singular system; add a ridge penalty (lambda > 0)");
    }
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    for (std::size_t r = k + 1; r < n; ++r) {
      double f = a[r][k] / a[k][k];
      for (std::size_t c = k; c < n; ++c) a[r][c] -= f * a[k][c];
      b[r] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double acc = b[k];
    for (std::size_t c = k + 1; c < n; ++c) acc -= a[k][c] * x[c];
    x[k] = acc / a[k][k];
  }
  return x;
}

struct LinearFit {
  std::vector<double> coef;
  double intercept = 0.0;

  double predict(const std::vector<double>& x) const {
    double v = intercept;
    for (std::size_t j = 0; j < coef.size(); ++j) v += coef[j] * x[j];
    return v;
  }
};

// Least squares on centered data; the ridge penalty leaves the intercept
// unpenalized. lambda = 0 is plain least squares and throws on singularity.
inline LinearFit fit_linear(const std::vector<std::vector<double>>& X,
                            const std::vector<double>& y, double lambda = 0.0) {
  if (X.empty()) throw data_error("cannot fit on an empty matrix");
  std::size_t n = X.size(), p = X[0].size();
  std::vector<double> x_mean(p, 0.0);
  double y_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) x_mean[j] += X[i][j];
    y_mean += y[i];
  }
  for (double& m : x_mean) m /= static_cast<double>(n);
  y_mean /= static_cast<double>(n);

  std::vector<std::vector<double>> a(p, std::vector<double>(p, 0.0));
  std::vector<double> b(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double xj = X[i][j] - x_mean[j];
      for (std::size_t k = j; k < p; ++k) {
        a[j][k] += xj * (X[i][k] - x_mean[k]);
      }
      b[j] += xj * (y[i] - y_mean);
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = 0; k < j; ++k) a[j][k] = a[k][j];
    a[j][j] += lambda;
  }
  LinearFit fit;
  fit.coef = solve_linear_system(std::move(a), std::move(b));
  fit.intercept = y_mean;
  for (std::size_t j = 0; j < p; ++j) fit.intercept -= fit.coef[j] * x_mean[j];
  return fit;
}

}  // namespace fedqol

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace geoagg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Penalty { None, L2, L1 };

const char* penalty_name(Penalty p) noexcept;  // "none", "ridge", "lasso"
Penalty penalty_from_name(const std::string& name);

struct LinearModel {
  double intercept = 0.0;
  Vector coefficients;
  Penalty kind = Penalty::None;
  double lambda = 0.0;
};

// Thrown by fit_lasso when coordinate descent exhausts its sweep budget.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, LinearModel last_iterate, std::size_t sweeps)
      : std::runtime_error(what), last_iterate_(std::move(last_iterate)), sweeps_(sweeps) {}
  const LinearModel& last_iterate() const noexcept { return last_iterate_; }
  std::size_t sweeps() const noexcept { return sweeps_; }

 private:
  LinearModel last_iterate_;
  std::size_t sweeps_;
};

// Least squares with unpenalized intercept. Rank-deficient designs (including
// more columns than rows) yield the minimum-norm coefficient vector.
LinearModel fit_ols(const Matrix& X, const Vector& y);

// Minimizes ||y - X b - c||^2 + lambda ||b||^2.
LinearModel fit_ridge(const Matrix& X, const Vector& y, double lambda);

struct LassoOptions {
  double tolerance = 1e-7;  // max absolute coefficient change per full sweep
  std::size_t max_sweeps = 10000;
};

// Minimizes (1/2n) ||y - X b - c||^2 + lambda ||b||_1 by cyclic coordinate
// descent with active-set iterations. `warm_start` seeds the coefficients.
LinearModel fit_lasso(const Matrix& X, const Vector& y, double lambda, const LassoOptions& options = {},
                      const Vector* warm_start = nullptr);

// Smallest lambda at which every lasso coefficient is zero: max_j |x_j'(y - ybar)| / n.
double lasso_lambda_max(const Matrix& X, const Vector& y);

// Models along a grid (any order), warm-started for lasso and sharing one
// SVD for ridge.
std::vector<LinearModel> fit_path(const Matrix& X, const Vector& y, Penalty kind, std::span<const double> grid,
                                  const LassoOptions& options = {});

struct CvPlan {
  std::size_t n_splits = 5;
  std::vector<double> penalty_grid;  // strictly decreasing, >= 0
};

// `count` log-spaced values from lambda_max down to ratio * lambda_max. A
// ratio of 0 picks 1e-4, or 1e-2 for lasso with more columns than rows. For
// ridge the top of the grid is ||X_centered||_F^2.
std::vector<double> default_penalty_grid(const Matrix& X, const Vector& y, Penalty kind, std::size_t count = 50,
                                         double ratio = 0.0);

struct CvSelection {
  double lambda = 0.0;
  LinearModel model;
  std::vector<double> mean_validation_mse;  // parallel to the grid
};

// Contiguous-block cross-validation; refits on all rows at the chosen lambda.
CvSelection select_penalty_cv(const Matrix& X, const Vector& y, Penalty kind, const CvPlan& plan,
                              const LassoOptions& options = {});

Vector predict(const LinearModel& model, const Matrix& X);
double mae(std::span<const double> predicted, std::span<const double> actual);
inline double mae(const Vector& predicted, const Vector& actual) {
  return mae(std::span<const double>(predicted.data(), static_cast<std::size_t>(predicted.size())),
             std::span<const double>(actual.data(), static_cast<std::size_t>(actual.size())));
}

// CSV: `# intercept,v`, `# kind,name`, `# lambda,v`, then `feature_id,value` rows.
void save_linear_model(const LinearModel& model, const std::filesystem::path& path);
LinearModel load_linear_model(const std::filesystem::path& path);

}  // namespace geoagg

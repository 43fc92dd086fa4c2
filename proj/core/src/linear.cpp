#include "geoagg/linear.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "geoagg/errors.hpp"

namespace geoagg {
namespace {

struct Centered {
  Matrix X;
  Vector y;
  Vector x_mean;
  double y_mean = 0.0;
};

Centered center(const Matrix& X, const Vector& y) {
  Centered c;
  c.x_mean = X.colwise().mean().transpose();
  c.y_mean = y.mean();
  c.X = X.rowwise() - c.x_mean.transpose();
  c.y = y.array() - c.y_mean;
  return c;
}

void check_dims(const Matrix& X, const Vector& y, const char* who) {
  if (X.rows() < 1 || X.cols() < 1) throw InvalidInput(std::string(who) + ": design matrix must be non-empty");
  if (X.rows() != y.size()) throw InvalidInput(std::string(who) + ": X rows and y length differ");
}

LinearModel finish(const Centered& c, Vector beta, Penalty kind, double lambda) {
  LinearModel m;
  m.intercept = c.y_mean - c.x_mean.dot(beta);
  m.coefficients = std::move(beta);
  m.kind = kind;
  m.lambda = lambda;
  return m;
}

struct NotConverged {};

double soft_threshold(double z, double t) noexcept {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

// Coordinate descent on centered data. beta and residual (yc - Xc beta) are
// updated in place. Returns sweeps used; throws when the budget runs out.
std::size_t lasso_cd(const Matrix& Xc, const Vector& col_sq, double lambda, Vector& beta, Vector& residual,
                     const LassoOptions& opt) {
  const auto n = static_cast<double>(Xc.rows());
  const Eigen::Index p = Xc.cols();
  std::size_t sweeps = 0;
  std::vector<Eigen::Index> active;

  auto update = [&](Eigen::Index j) {
    if (col_sq[j] <= 0.0) {
      if (beta[j] != 0.0) {
        residual += beta[j] * Xc.col(j);
        beta[j] = 0.0;
      }
      return 0.0;
    }
    const double old = beta[j];
    const double z = Xc.col(j).dot(residual) / n + col_sq[j] * old;
    const double fresh = soft_threshold(z, lambda) / col_sq[j];
    if (fresh != old) {
      residual -= (fresh - old) * Xc.col(j);
      beta[j] = fresh;
    }
    return std::abs(fresh - old);
  };

  while (true) {
    // Full sweep over every coordinate.
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) max_change = std::max(max_change, update(j));
    ++sweeps;
    if (max_change < opt.tolerance) return sweeps;
    if (sweeps >= opt.max_sweeps) break;

    active.clear();
    for (Eigen::Index j = 0; j < p; ++j)
      if (beta[j] != 0.0) active.push_back(j);
    // Iterate on the active set until it settles.
    while (sweeps < opt.max_sweeps) {
      double change = 0.0;
      for (Eigen::Index j : active) change = std::max(change, update(j));
      ++sweeps;
      if (change < opt.tolerance) break;
    }
    if (sweeps >= opt.max_sweeps) break;
  }
  throw NotConverged{};
}

Vector column_sq(const Matrix& Xc) { return Xc.colwise().squaredNorm().transpose() / static_cast<double>(Xc.rows()); }

Vector ridge_primal(const Matrix& Xc, const Vector& yc, double lambda, bool& ok) {
  Matrix G = Xc.transpose() * Xc;
  G.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(G);
  ok = llt.info() == Eigen::Success;
  if (!ok) return {};
  Vector beta = llt.solve(Xc.transpose() * yc);
  // A nearly singular Gram matrix factors but loses accuracy; defer to the
  // orthogonal decomposition then.
  const Vector diag = llt.matrixL().toDenseMatrix().diagonal();
  const double rcond_proxy = diag.minCoeff() / std::max(1e-300, diag.maxCoeff());
  if (lambda == 0.0 && rcond_proxy < 1e-6) ok = false;
  return beta;
}

}  // namespace

const char* penalty_name(Penalty p) noexcept {
  switch (p) {
    case Penalty::None: return "none";
    case Penalty::L2: return "ridge";
    case Penalty::L1: return "lasso";
  }
  return "none";
}

Penalty penalty_from_name(const std::string& name) {
  if (name == "none") return Penalty::None;
  if (name == "ridge") return Penalty::L2;
  if (name == "lasso") return Penalty::L1;
  throw InvalidInput("unknown penalty kind `" + name + "`");
}

LinearModel fit_ols(const Matrix& X, const Vector& y) {
  check_dims(X, y, "fit_ols");
  const Centered c = center(X, y);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(c.X);
  Vector beta = cod.solve(c.y);
  return finish(c, std::move(beta), Penalty::None, 0.0);
}

LinearModel fit_ridge(const Matrix& X, const Vector& y, double lambda) {
  check_dims(X, y, "fit_ridge");
  if (!(lambda >= 0.0)) throw InvalidInput("fit_ridge: lambda must be >= 0");
  const Centered c = center(X, y);
  Vector beta;
  if (c.X.cols() <= c.X.rows()) {
    bool ok = false;
    beta = ridge_primal(c.X, c.y, lambda, ok);
    if (!ok) {
      LinearModel m = fit_ols(X, y);
      m.kind = Penalty::L2;
      return m;
    }
  } else if (lambda > 0.0) {
    Matrix K = c.X * c.X.transpose();
    K.diagonal().array() += lambda;
    Vector alpha = K.llt().solve(c.y);
    beta = c.X.transpose() * alpha;
  } else {
    LinearModel m = fit_ols(X, y);
    m.kind = Penalty::L2;
    return m;
  }
  return finish(c, std::move(beta), Penalty::L2, lambda);
}

namespace {

double centered_lambda_max(const Centered& c) {
  if (c.X.cols() == 0) return 0.0;
  return (c.X.transpose() * c.y).cwiseAbs().maxCoeff() / static_cast<double>(c.X.rows());
}

}  // namespace

double lasso_lambda_max(const Matrix& X, const Vector& y) { return centered_lambda_max(center(X, y)); }

LinearModel fit_lasso(const Matrix& X, const Vector& y, double lambda, const LassoOptions& options,
                      const Vector* warm_start) {
  check_dims(X, y, "fit_lasso");
  if (!(lambda >= 0.0)) throw InvalidInput("fit_lasso: lambda must be >= 0");
  const Centered c = center(X, y);
  Vector beta = warm_start ? *warm_start : Vector::Zero(X.cols());
  if (beta.size() != X.cols()) throw InvalidInput("fit_lasso: warm start has the wrong length");
  // Zero satisfies the optimality conditions here; skip descent so rounding
  // in the coordinate updates cannot leave stray nonzeros.
  if (lambda >= centered_lambda_max(c)) return finish(c, Vector::Zero(X.cols()), Penalty::L1, lambda);
  Vector residual = c.y - c.X * beta;
  try {
    lasso_cd(c.X, column_sq(c.X), lambda, beta, residual, options);
  } catch (const NotConverged&) {
    throw ConvergenceError("fit_lasso: no convergence within " + std::to_string(options.max_sweeps) + " sweeps",
                           finish(c, beta, Penalty::L1, lambda), options.max_sweeps);
  }
  return finish(c, std::move(beta), Penalty::L1, lambda);
}

std::vector<LinearModel> fit_path(const Matrix& X, const Vector& y, Penalty kind, std::span<const double> grid,
                                  const LassoOptions& options) {
  check_dims(X, y, "fit_path");
  std::vector<LinearModel> out;
  out.reserve(grid.size());
  const Centered c = center(X, y);
  switch (kind) {
    case Penalty::None:
      for (std::size_t i = 0; i < grid.size(); ++i) out.push_back(fit_ols(X, y));
      break;
    case Penalty::L2: {
      Eigen::BDCSVD<Matrix> svd(c.X, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Vector& s = svd.singularValues();
      const Vector uty = svd.matrixU().transpose() * c.y;
      const double cutoff = s.size() > 0 ? s[0] * 1e-12 * static_cast<double>(std::max(X.rows(), X.cols())) : 0.0;
      for (double lambda : grid) {
        if (!(lambda >= 0.0)) throw InvalidInput("fit_path: lambda must be >= 0");
        Vector shrink(s.size());
        for (Eigen::Index i = 0; i < s.size(); ++i)
          shrink[i] = s[i] > cutoff ? s[i] / (s[i] * s[i] + lambda) : 0.0;
        Vector beta = svd.matrixV() * (shrink.array() * uty.array()).matrix();
        out.push_back(finish(c, std::move(beta), Penalty::L2, lambda));
      }
      break;
    }
    case Penalty::L1: {
      const Vector col_sq = column_sq(c.X);
      Vector beta = Vector::Zero(X.cols());
      Vector residual = c.y;
      const double top = centered_lambda_max(c);
      for (double lambda : grid) {
        if (!(lambda >= 0.0)) throw InvalidInput("fit_path: lambda must be >= 0");
        if (lambda >= top) {
          out.push_back(finish(c, Vector::Zero(X.cols()), Penalty::L1, lambda));
          continue;
        }
        try {
          lasso_cd(c.X, col_sq, lambda, beta, residual, options);
        } catch (const NotConverged&) {
          throw ConvergenceError("fit_path: lasso did not converge at lambda " + std::to_string(lambda),
                                 finish(c, beta, Penalty::L1, lambda), options.max_sweeps);
        }
        out.push_back(finish(c, beta, Penalty::L1, lambda));
      }
      break;
    }
  }
  return out;
}

std::vector<double> default_penalty_grid(const Matrix& X, const Vector& y, Penalty kind, std::size_t count,
                                         double ratio) {
  if (count == 0) throw InvalidInput("default_penalty_grid: count must be >= 1");
  double top = 0.0;
  if (kind == Penalty::L1) {
    top = lasso_lambda_max(X, y);
  } else {
    const Centered c = center(X, y);
    top = c.X.squaredNorm();
  }
  if (!(top > 0.0)) return {0.0};
  if (ratio <= 0.0) ratio = kind == Penalty::L1 && X.cols() > X.rows() ? 1e-2 : 1e-4;
  if (!(ratio < 1.0)) throw InvalidInput("default_penalty_grid: ratio must be below 1");
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    grid[i] = top * std::pow(ratio, t);
  }
  return grid;
}

CvSelection select_penalty_cv(const Matrix& X, const Vector& y, Penalty kind, const CvPlan& plan,
                              const LassoOptions& options) {
  check_dims(X, y, "select_penalty_cv");
  if (plan.n_splits < 2) throw InvalidInput("select_penalty_cv: n_splits must be >= 2");
  if (plan.penalty_grid.empty()) throw InvalidInput("select_penalty_cv: empty penalty grid");
  for (std::size_t i = 0; i < plan.penalty_grid.size(); ++i) {
    if (!(plan.penalty_grid[i] >= 0.0)) throw InvalidInput("select_penalty_cv: negative penalty");
    if (i > 0 && !(plan.penalty_grid[i] < plan.penalty_grid[i - 1]))
      throw InvalidInput("select_penalty_cv: penalty grid must be strictly decreasing");
  }
  const auto n = static_cast<std::size_t>(X.rows());
  if (n < plan.n_splits) throw InvalidInput("select_penalty_cv: fewer rows than splits");

  const std::size_t G = plan.penalty_grid.size();
  std::vector<double> mse(G, 0.0);
  for (std::size_t k = 0; k < plan.n_splits; ++k) {
    const std::size_t lo = k * n / plan.n_splits;
    const std::size_t hi = (k + 1) * n / plan.n_splits;
    const auto n_val = static_cast<Eigen::Index>(hi - lo);
    const auto n_fit = static_cast<Eigen::Index>(n) - n_val;
    Matrix Xf(n_fit, X.cols());
    Vector yf(n_fit);
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i >= lo && i < hi) continue;
      Xf.row(r) = X.row(static_cast<Eigen::Index>(i));
      yf[r++] = y[static_cast<Eigen::Index>(i)];
    }
    const Matrix Xv = X.middleRows(static_cast<Eigen::Index>(lo), n_val);
    const Vector yv = y.segment(static_cast<Eigen::Index>(lo), n_val);
    const auto models = fit_path(Xf, yf, kind, plan.penalty_grid, options);
    for (std::size_t g = 0; g < G; ++g)
      mse[g] += (predict(models[g], Xv) - yv).squaredNorm() / static_cast<double>(n_val);
  }
  for (double& m : mse) m /= static_cast<double>(plan.n_splits);

  std::size_t best = 0;
  for (std::size_t g = 1; g < G; ++g)
    if (mse[g] < mse[best]) best = g;

  CvSelection sel;
  sel.lambda = plan.penalty_grid[best];
  sel.mean_validation_mse = mse;
  if (kind == Penalty::L1) {
    // Warm-start down the grid to the chosen value.
    std::span<const double> prefix(plan.penalty_grid.data(), best + 1);
    sel.model = fit_path(X, y, kind, prefix, options).back();
  } else if (kind == Penalty::L2) {
    sel.model = fit_ridge(X, y, sel.lambda);
  } else {
    sel.model = fit_ols(X, y);
  }
  return sel;
}

Vector predict(const LinearModel& model, const Matrix& X) {
  if (X.cols() != model.coefficients.size()) throw InvalidInput("predict: feature count mismatch");
  return (X * model.coefficients).array() + model.intercept;
}

double mae(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw InvalidInput("mae: length mismatch");
  if (predicted.empty()) throw InvalidInput("mae: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) s += std::abs(predicted[i] - actual[i]);
  return s / static_cast<double>(predicted.size());
}

namespace {
std::string fmt(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_double(const std::string& s, const std::string& line) {
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw FormatError("linear model: malformed line: " + line);
  return v;
}
}  // namespace

void save_linear_model(const LinearModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("linear model: cannot write " + path.string());
  out << "# intercept," << fmt(model.intercept) << '\n';
  out << "# kind," << penalty_name(model.kind) << '\n';
  out << "# lambda," << fmt(model.lambda) << '\n';
  out << "feature_id,value\n";
  for (Eigen::Index j = 0; j < model.coefficients.size(); ++j) out << j << ',' << fmt(model.coefficients[j]) << '\n';
}

LinearModel load_linear_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("linear model: cannot open " + path.string());
  LinearModel m;
  std::string line;
  std::vector<double> coefs;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw FormatError("linear model: malformed metadata: " + line);
      const std::string key = line.substr(2, comma - 2);
      const std::string val = line.substr(comma + 1);
      if (key == "intercept") m.intercept = parse_double(val, line);
      else if (key == "kind") m.kind = penalty_from_name(val);
      else if (key == "lambda") m.lambda = parse_double(val, line);
      continue;
    }
    if (!header_seen) {
      if (line != "feature_id,value") throw FormatError("linear model: expected `feature_id,value` header");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw FormatError("linear model: malformed row: " + line);
    std::size_t id = 0;
    auto r = std::from_chars(line.data(), line.data() + comma, id);
    if (r.ec != std::errc{} || id != coefs.size()) throw FormatError("linear model: feature ids must be 0..p-1");
    coefs.push_back(parse_double(line.substr(comma + 1), line));
  }
  m.coefficients = Eigen::Map<Vector>(coefs.data(), static_cast<Eigen::Index>(coefs.size()));
  return m;
}

}  // namespace geoagg

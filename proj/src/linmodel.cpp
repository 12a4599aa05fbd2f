#include "plsel/linmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "plsel/errors.hpp"

namespace plsel {

Dataset::Dataset(Eigen::VectorXd y, Eigen::MatrixXd x, Eigen::VectorXd t,
                 std::vector<std::string> x_names, std::string y_name, std::string t_name)
    : y_(std::move(y)),
      x_(std::move(x)),
      t_(std::move(t)),
      x_names_(std::move(x_names)),
      y_name_(std::move(y_name)),
      t_name_(std::move(t_name)) {
  const auto n = y_.size();
  if (x_.rows() != n || t_.size() != n) {
    throw DimensionMismatch("dataset: Y, X and T must have the same number of rows");
  }
  if (n <= x_.cols() + 1) {
    throw InvalidArgument("dataset: need n > q + 1 (n=" + std::to_string(n) +
                          ", q=" + std::to_string(x_.cols()) + ")");
  }
  if (x_names_.empty()) {
    for (Eigen::Index j = 0; j < x_.cols(); ++j) x_names_.push_back("x" + std::to_string(j + 1));
  }
  if (static_cast<Eigen::Index>(x_names_.size()) != x_.cols()) {
    throw DimensionMismatch("dataset: one name per X column required");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(t_[i] >= 0.0 && t_[i] <= 1.0)) {
      throw DomainError("dataset: T at row " + std::to_string(i) + " = " + std::to_string(t_[i]) +
                            " outside [0, 1]",
                        static_cast<std::size_t>(i));
    }
    if (!std::isfinite(y_[i]) || !x_.row(i).allFinite()) {
      throw DomainError("dataset: non-finite value at row " + std::to_string(i),
                        static_cast<std::size_t>(i));
    }
  }
}

int Dataset::column(const std::string& name) const {
  const auto it = std::find(x_names_.begin(), x_names_.end(), name);
  if (it == x_names_.end()) throw InvalidArgument("dataset: no X column named '" + name + "'");
  return static_cast<int>(it - x_names_.begin());
}

namespace {

void check_model(const Dataset& data, const ModelIndex& model) {
  model.basis().validate();
  for (std::size_t k = 0; k < model.I.size(); ++k) {
    if (model.I[k] < 0 || model.I[k] >= data.q()) {
      throw InvalidArgument("model: covariate index " + std::to_string(model.I[k]) +
                            " out of range");
    }
    if (k > 0 && model.I[k] <= model.I[k - 1]) {
      throw InvalidArgument("model: covariate indices must be sorted and distinct");
    }
  }
}

// Householder QR of [Z_K | X_I]. With the sieve block first, the trailing
// block R22 of R satisfies R22' R22 = X_I'(Id - P_K) X_I.
FitResult fit_impl(const Dataset& data, const ModelIndex& model) {
  check_model(data, model);
  const int n = data.n();
  const int m = static_cast<int>(model.I.size());
  const int rk = model.r * model.K;
  const int p = m + rk;

  FitResult fit;
  fit.model = model;
  fit.beta = Eigen::VectorXd::Zero(m);
  fit.delta = Eigen::VectorXd::Zero(rk);
  fit.residuals = data.y();
  fit.gamma_n = empirical_norm_sq({data.y().data(), static_cast<std::size_t>(n)});
  if (p >= n) return fit;

  Eigen::MatrixXd D(n, p);
  D.leftCols(rk) = design_matrix(model.basis(), {data.t().data(), static_cast<std::size_t>(n)});
  for (int k = 0; k < m; ++k) D.col(rk + k) = data.x().col(model.I[k]);

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(D);
  const Eigen::MatrixXd R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(R).singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  const double smin = sv.size() > 0 ? sv[sv.size() - 1] : 0.0;
  fit.rcond = smax > 0.0 ? smin / smax : 0.0;
  const double tol = n * std::numeric_limits<double>::epsilon() * smax;
  if (!(smax > 0.0) || smin < tol) return fit;

  Eigen::VectorXd qty = qr.householderQ().adjoint() * data.y();
  const Eigen::VectorXd coef =
      R.triangularView<Eigen::Upper>().solve(qty.head(p));
  fit.delta = coef.head(rk);
  fit.beta = coef.tail(m);
  fit.residuals = data.y() - D * coef;
  fit.gamma_n = empirical_norm_sq({fit.residuals.data(), static_cast<std::size_t>(n)});

  const Eigen::MatrixXd R22 = R.bottomRightCorner(m, m);
  fit.xtx = R22.transpose() * R22;
  const Eigen::MatrixXd R22inv =
      R22.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(m, m));
  fit.xtx_inv = R22inv * R22inv.transpose();
  fit.rank_ok = true;
  return fit;
}

}  // namespace

FitResult fit_model(const Dataset& data, const ModelIndex& model) {
  if (model.dim() >= data.n()) {
    throw InvalidArgument("fit_model: model dimension " + std::to_string(model.dim()) +
                          " must be < n = " + std::to_string(data.n()));
  }
  FitResult fit = fit_impl(data, model);
  if (!fit.rank_ok) {
    throw RankDeficient("fit_model: design [Z_K | X_I] is rank deficient (K=" +
                        std::to_string(model.K) + ", |I|=" + std::to_string(model.I.size()) +
                        ", rcond=" + std::to_string(fit.rcond) + ")");
  }
  return fit;
}

FitResult evaluate_candidate(const Dataset& data, const ModelIndex& model) {
  return fit_impl(data, model);
}

double predict_f(const FitResult& fit, double t) {
  const BasisSpec spec = fit.model.basis();
  std::vector<double> local(spec.r);
  const int c = eval_local(spec, t, local);
  double v = 0.0;
  for (int m = 0; m < spec.r; ++m) v += fit.delta[c * spec.r + m] * local[m];
  return v;
}

double predict(const FitResult& fit, std::span<const double> x, double t) {
  double v = predict_f(fit, t);
  for (std::size_t k = 0; k < fit.model.I.size(); ++k) {
    const auto j = static_cast<std::size_t>(fit.model.I[k]);
    if (j >= x.size()) throw DimensionMismatch("predict: x shorter than covariate index");
    v += fit.beta[static_cast<Eigen::Index>(k)] * x[j];
  }
  return v;
}

Box bounding_box(const Dataset& data) {
  return {data.x().colwise().minCoeff().transpose(), data.x().colwise().maxCoeff().transpose()};
}

double lambda_norm_sq(const FitResult& fit, const Box& box) {
  // Under the uniform law on the box the coordinates are independent with
  // mean (lo+hi)/2 and variance (hi-lo)^2/12.
  double lin_mean = 0.0;
  double lin_var = 0.0;
  for (std::size_t k = 0; k < fit.model.I.size(); ++k) {
    const int j = fit.model.I[k];
    const double b = fit.beta[static_cast<Eigen::Index>(k)];
    const double w = box.hi[j] - box.lo[j];
    lin_mean += b * 0.5 * (box.lo[j] + box.hi[j]);
    lin_var += b * b * w * w / 12.0;
  }
  // Orthonormal basis: int g^2 = |delta|^2; only degree-0 terms have nonzero
  // mean, each integrating to 1/sqrt(K).
  const double g_sq = fit.delta.squaredNorm();
  double g_int = 0.0;
  const int r = fit.model.r;
  for (int c = 0; c < fit.model.K; ++c) g_int += fit.delta[c * r];
  g_int /= std::sqrt(static_cast<double>(fit.model.K));
  return lin_var + lin_mean * lin_mean + 2.0 * lin_mean * g_int + g_sq;
}

double empirical_norm_sq(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("empirical_norm_sq: need at least one value");
  const Eigen::Map<const Eigen::VectorXd> v(values.data(), static_cast<Eigen::Index>(values.size()));
  return v.squaredNorm() / static_cast<double>(values.size());
}

}  // namespace plsel

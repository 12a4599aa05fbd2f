#include "plsel/inference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "plsel/errors.hpp"
#include "plsel/parallel.hpp"
#include "plsel/stats.hpp"

namespace plsel {

double sigma2_hat(const FitResult& fit, int n) {
  const int dof = n - fit.model.dim();
  if (dof <= 0) {
    throw DegenerateDoF("sigma2_hat: n - |I| - rK = " + std::to_string(dof) + " <= 0");
  }
  return n * fit.gamma_n / dof;
}

std::vector<Interval> confidence_intervals(const FitResult& fit, double sigma2, double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("confidence level must lie in (0, 1)");
  if (!fit.rank_ok) throw RankDeficient("confidence_intervals: fit is rank deficient");
  const double z = stats::normal_quantile(0.5 * (1.0 + level));
  std::vector<Interval> out;
  for (std::size_t k = 0; k < fit.model.I.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    Interval iv;
    iv.column = fit.model.I[k];
    iv.estimate = fit.beta[kk];
    iv.se = std::sqrt(sigma2 * fit.xtx_inv(kk, kk));
    iv.lo = iv.estimate - z * iv.se;
    iv.hi = iv.estimate + z * iv.se;
    iv.level = level;
    out.push_back(iv);
  }
  return out;
}

Eigen::MatrixXd embed_V(const Eigen::MatrixXd& V0, std::span<const int> I0, int q) {
  const auto q0 = static_cast<Eigen::Index>(I0.size());
  if (V0.rows() != q0 || V0.cols() != q0) {
    throw DimensionMismatch("embed_V: V0 must be |I0| x |I0|");
  }
  if (!V0.isApprox(V0.transpose(), 1e-12) && q0 > 0) {
    throw InvalidArgument("embed_V: V0 must be symmetric");
  }
  for (std::size_t k = 0; k < I0.size(); ++k) {
    if (I0[k] < 0 || I0[k] >= q || (k > 0 && I0[k] <= I0[k - 1])) {
      throw DimensionMismatch("embed_V: I0 must be sorted distinct indices in [0, q)");
    }
  }
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(q, q);
  for (Eigen::Index a = 0; a < q0; ++a) {
    for (Eigen::Index b = 0; b < q0; ++b) V(I0[a], I0[b]) = V0(a, b);
  }
  return V;
}

InferenceReport infer(const FitResult& fit, int q, double level) {
  if (!fit.rank_ok) throw RankDeficient("infer: fit is rank deficient");
  const int n = fit.n();
  InferenceReport rep;
  rep.level = level;
  rep.selected = fit.model.I;
  rep.sigma2 = sigma2_hat(fit, n);
  rep.sigma_hat = fit.xtx / static_cast<double>(n);
  rep.beta_cov = rep.sigma2 * fit.xtx_inv;
  rep.v_embedded = embed_V(static_cast<double>(n) * rep.beta_cov, fit.model.I, q);
  rep.intervals = confidence_intervals(fit, rep.sigma2, level);
  rep.zstats.resize(static_cast<Eigen::Index>(rep.intervals.size()));
  for (std::size_t k = 0; k < rep.intervals.size(); ++k) {
    const auto& iv = rep.intervals[k];
    rep.zstats[static_cast<Eigen::Index>(k)] = iv.se > 0.0 ? iv.estimate / iv.se : 0.0;
  }
  return rep;
}

InferenceReport infer(const SelectionResult& selection, int q, double level) {
  InferenceReport rep = infer(selection.chosen, q, level);
  if (!selection.gamma_ok) {
    for (auto& iv : rep.intervals) {
      iv.lo -= iv.estimate;
      iv.hi -= iv.estimate;
      iv.estimate = 0.0;
    }
    rep.zstats.setZero();
    rep.regime += " (truncation event failed; coefficients zeroed)";
  }
  return rep;
}

FullModelComparison full_model_covariance(const Dataset& data, int K, int r,
                                          std::span<const int> I0_in) {
  std::vector<int> I0(I0_in.begin(), I0_in.end());
  std::sort(I0.begin(), I0.end());
  const int q = data.q();
  if (I0.empty() || std::adjacent_find(I0.begin(), I0.end()) != I0.end() || I0.front() < 0 ||
      I0.back() >= q) {
    throw InvalidArgument("full_model_covariance: I0 must be a nonempty subset of [0, q)");
  }
  ModelIndex full;
  for (int j = 0; j < q; ++j) full.I.push_back(j);
  full.K = K;
  full.r = r;
  const FitResult fit = fit_model(data, full);

  FullModelComparison out;
  out.I0 = I0;
  out.K = K;
  out.sigma2 = sigma2_hat(fit, data.n());
  out.information = fit.xtx / static_cast<double>(data.n()) / out.sigma2;

  std::vector<int> I1;
  for (int j = 0; j < q; ++j) {
    if (!std::binary_search(I0.begin(), I0.end(), j)) I1.push_back(j);
  }
  const auto q0 = static_cast<Eigen::Index>(I0.size());
  const auto q1 = static_cast<Eigen::Index>(I1.size());
  Eigen::MatrixXd I11(q0, q0), I12(q0, q1), I22(q1, q1);
  for (Eigen::Index a = 0; a < q0; ++a) {
    for (Eigen::Index b = 0; b < q0; ++b) I11(a, b) = out.information(I0[a], I0[b]);
    for (Eigen::Index b = 0; b < q1; ++b) I12(a, b) = out.information(I0[a], I1[b]);
  }
  for (Eigen::Index a = 0; a < q1; ++a) {
    for (Eigen::Index b = 0; b < q1; ++b) I22(a, b) = out.information(I1[a], I1[b]);
  }
  Eigen::MatrixXd schur = I11;
  if (q1 > 0) schur -= I12 * I22.ldlt().solve(I12.transpose());
  schur = 0.5 * (schur + schur.transpose());
  out.full_cov = schur.ldlt().solve(Eigen::MatrixXd::Identity(q0, q0));
  out.selected_cov = I11.ldlt().solve(Eigen::MatrixXd::Identity(q0, q0));
  out.excess = out.full_cov - out.selected_cov;
  out.excess = 0.5 * (out.excess + out.excess.transpose());
  out.min_eigen_excess =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(out.excess, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .minCoeff();
  return out;
}

SigmaDiagnostic sigma_convergence_diagnostic(
    const std::function<Dataset(int n, int replication)>& generator,
    const Eigen::MatrixXd& sigma_population, std::span<const int> I,
    const std::function<int(int n)>& k_rule, int r, std::span<const int> n_list, int reps,
    int threads) {
  if (reps < 1 || n_list.empty()) throw InvalidArgument("sigma diagnostic: need reps >= 1 and n values");
  const auto m = static_cast<Eigen::Index>(I.size());
  Eigen::MatrixXd target(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) target(a, b) = sigma_population(I[a], I[b]);
  }
  SigmaDiagnostic out;
  for (int n : n_list) {
    SigmaDiagnosticRow row;
    row.n = n;
    row.K = k_rule(n);
    std::vector<double> dist(static_cast<std::size_t>(reps), 0.0);
    if (m > 0) {
      parallel_for(dist.size(), threads, [&](std::size_t i) {
        const Dataset data = generator(n, static_cast<int>(i));
        const FitResult fit = fit_model(data, {std::vector<int>(I.begin(), I.end()), row.K, r});
        dist[i] = (fit.xtx / static_cast<double>(n) - target).norm();
      });
    }
    row.median_distance = stats::median(dist);
    out.rows.push_back(row);
  }
  std::vector<double> ns, ds;
  for (const auto& row : out.rows) {
    ns.push_back(row.n);
    ds.push_back(row.median_distance);
  }
  const bool all_zero = std::all_of(ds.begin(), ds.end(), [](double d) { return d == 0.0; });
  out.spearman = ns.size() >= 2 ? stats::spearman(ns, ds) : 0.0;
  out.decreasing_trend = all_zero || out.spearman < 0.0;
  return out;
}

}  // namespace plsel

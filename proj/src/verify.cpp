// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#include "twist/verify.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "twist/errors.hpp"

namespace twist {

namespace {

using Mat = Eigen::MatrixXf;

Mat normal_matrix(Eigen::Index rows, Eigen::Index cols, double variance, Rng& rng) {
  Mat m(rows, cols);
  rng.fill_normal(std::span<float>(m.data(), static_cast<std::size_t>(m.size())), 0.0f,
                  static_cast<float>(std::sqrt(variance)));
  return m;
}

struct NormStats {
  double norm = 0.0;
  double sq = 0.0;
  void add(double squared) {
    norm += std::sqrt(squared);
    sq += squared;
  }
};

void check_trials(int trials, int per_draw) {
  if (trials < 1 || per_draw < 1) throw Error(Errc::invalid_input, "trial counts must be >= 1");
}

ScalingRow finish(const char* kind, double frac, const NormStats& full, const NormStats& sub, double var,
                  double var_pred) {
  ScalingRow r;
  r.kind = kind;
  r.fraction = frac;
  r.measured = sub.norm / full.norm;
  r.predicted = std::sqrt(frac);
  r.abs_err = std::abs(r.measured - r.predicted);
  r.squared_measured = sub.sq / full.sq;
  r.squared_predicted = frac;
  r.component_variance = var;
  r.variance_predicted = var_pred;
  return r;
}

}  // namespace

std::vector<ScalingRow> mc_verify_ffn_scaling(int d_model, int d_inner, const std::vector<double>& fractions,
                                              int trials, Rng& rng, int trials_per_draw) {
  check_trials(trials, trials_per_draw);
  if (d_model < 1 || d_inner < 1) throw Error(Errc::invalid_input, "widths must be >= 1");
  std::vector<int> kept;
  for (double f : fractions) {
    if (!(f > 0.0) || f > 1.0) throw Error(Errc::invalid_sparsity, "fraction outside (0, 1]");
    kept.push_back(std::max(1, static_cast<int>(std::lround(f * d_inner))));
  }
  std::vector<int> units(static_cast<std::size_t>(d_inner));
  std::iota(units.begin(), units.end(), 0);
  NormStats full;
  std::vector<NormStats> sub(fractions.size());
  double sum = 0.0, sum_sq = 0.0;
  long long n_comp = 0;
  for (int done = 0; done < trials;) {
    const int n = std::min(trials_per_draw, trials - done);
    const Mat W = normal_matrix(d_inner, d_model, 2.0 / d_model, rng);
    const Mat C = normal_matrix(d_model, d_inner, 1.0 / d_inner, rng);
    const Mat X = normal_matrix(d_model, n, 1.0, rng);
    const Mat H = (W * X).cwiseMax(0.0f);
    const Mat Y = C * H;
    for (Eigen::Index j = 0; j < n; ++j) {
      full.add(Y.col(j).cast<double>().squaredNorm());
      for (Eigen::Index i = 0; i < Y.rows(); ++i) {
        const double v = Y(i, j);
        sum += v;
        sum_sq += v * v;
      }
      n_comp += Y.rows();
    }
    for (std::size_t k = 0; k < fractions.size(); ++k) {
      auto pick = rng.sample(units, static_cast<std::size_t>(kept[k]));
      Mat Cs(d_model, kept[k]), Hs(kept[k], n);
      for (int i = 0; i < kept[k]; ++i) {
        Cs.col(i) = C.col(pick[static_cast<std::size_t>(i)]);
        Hs.row(i) = H.row(pick[static_cast<std::size_t>(i)]);
      }
      const Mat Ys = Cs * Hs;
      for (Eigen::Index j = 0; j < n; ++j) sub[k].add(Ys.col(j).cast<double>().squaredNorm());
    }
    done += n;
  }
  const double mean = sum / static_cast<double>(n_comp);
  const double var = sum_sq / static_cast<double>(n_comp) - mean * mean;
  std::vector<ScalingRow> out;
  for (std::size_t k = 0; k < fractions.size(); ++k)
    out.push_back(finish("ffn", static_cast<double>(kept[k]) / d_inner, full, sub[k], var, 1.0));
  return out;
}

std::vector<ScalingRow> mc_verify_attn_scaling(int n_tokens, int d_model, int heads, int d_head,
                                               const std::vector<int>& head_counts, int trials, Rng& rng,
                                               int trials_per_draw) {
  check_trials(trials, trials_per_draw);
  if (n_tokens < 1 || d_model < 1 || heads < 1 || d_head < 1) throw Error(Errc::invalid_input, "sizes must be >= 1");
  for (int h : head_counts)
    if (h < 1 || h > heads) throw Error(Errc::invalid_sparsity, "head count " + std::to_string(h) + " outside [1, H]");
  const int A = heads * d_head;
  std::vector<int> all(static_cast<std::size_t>(heads));
  std::iota(all.begin(), all.end(), 0);
  NormStats full;
  std::vector<NormStats> sub(head_counts.size());
  double sum = 0.0, sum_sq = 0.0;
  long long n_comp = 0;
  for (int done = 0; done < trials;) {
    const int n = std::min(trials_per_draw, trials - done);
    const Mat WV = normal_matrix(d_model, A, 1.0 / d_model, rng);
    const Mat C = normal_matrix(A, d_model, 1.0 / A, rng);
    // Under uniform attention every output row equals mean_row(X) W^V C.
    Mat M(n, d_model);
    for (int j = 0; j < n; ++j) {
      const Mat X = normal_matrix(n_tokens, d_model, 1.0, rng);
      M.row(j) = X.colwise().mean();
    }
    const Mat V = M * WV;
    const Mat Y = V * C;
    for (Eigen::Index j = 0; j < n; ++j) {
      full.add(Y.row(j).cast<double>().squaredNorm());
      for (Eigen::Index i = 0; i < Y.cols(); ++i) {
        const double v = Y(j, i);
        sum += v;
        sum_sq += v * v;
      }
      n_comp += Y.cols();
    }
    for (std::size_t k = 0; k < head_counts.size(); ++k) {
      auto pick = rng.sample(all, static_cast<std::size_t>(head_counts[k]));
      const int w = head_counts[k] * d_head;
      Mat Vs(n, w), Cs(w, d_model);
      for (int i = 0; i < head_counts[k]; ++i) {
        const int h = pick[static_cast<std::size_t>(i)];
        Vs.middleCols(i * d_head, d_head) = V.middleCols(h * d_head, d_head);
        Cs.middleRows(i * d_head, d_head) = C.middleRows(h * d_head, d_head);
      }
      const Mat Ys = Vs * Cs;
      for (Eigen::Index j = 0; j < n; ++j) sub[k].add(Ys.row(j).cast<double>().squaredNorm());
    }
    done += n;
  }
  const double mean = sum / static_cast<double>(n_comp);
  const double var = sum_sq / static_cast<double>(n_comp) - mean * mean;
  std::vector<ScalingRow> out;
  for (std::size_t k = 0; k < head_counts.size(); ++k)
    out.push_back(finish("attn", static_cast<double>(head_counts[k]) / heads, full, sub[k], var, 1.0 / n_tokens));
  return out;
}

ScalingCheck check_row(const ScalingRow& row, const Tolerances& tol) {
  ScalingCheck c;
  c.row = row;
  c.ratio_ok = std::abs(row.measured - row.predicted) <= tol.ratio_rel * row.predicted;
  c.squared_ok = std::abs(row.squared_measured - row.squared_predicted) <= tol.squared_rel * row.squared_predicted;
  c.variance_ok = std::abs(row.component_variance - row.variance_predicted) <= tol.variance_rel * row.variance_predicted;
  return c;
}

}  // namespace twist

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "aquafel/core.hpp"
#include "aquafel/worldmap.hpp"

namespace aquafel {

/// One water-quality measurement.
struct Sample {
  Vec2 position;
  double value = 0.0;
  int taker = -1;
  int step = 0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct GpOptions {
  double nugget = 1e-6;
  double length_scale_init = 10.0;
  double length_scale_min = 0.1;
  double length_scale_max = 100.0;
  /// When false the length scale stays at length_scale_init.
  bool fit_length_scale = true;
  /// Golden-section stopping width, in log(length scale).
  double search_tolerance = 1e-3;
};

/// Posterior mean/std over a map plus the coordinates of their maxima.
struct GridPrediction {
  Field mean;  ///< unevaluated and land cells hold kLandSentinel
  Field std;
  int max_un_cell = -1;
  int max_con_cell = -1;
  Vec2 max_un;
  Vec2 max_con;
};

struct PointPrediction {
  double mean = 0.0;
  double std = 0.0;
};

namespace detail {

inline Eigen::MatrixXd squared_distances(std::span<const Sample> s) {
  const auto n = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXd d2(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      d2(i, j) = (s[static_cast<std::size_t>(i)].position - s[static_cast<std::size_t>(j)].position).squared_norm();
  return d2;
}

struct Factorization {
  Eigen::MatrixXd lower;
  Eigen::VectorXd alpha;
  double log_likelihood = -std::numeric_limits<double>::infinity();
};

inline std::optional<Factorization> factorize(const Eigen::MatrixXd& d2, const Eigen::VectorXd& y, double length_scale,
                                              double nugget) {
  Eigen::MatrixXd k = (d2.array() * (-0.5 / (length_scale * length_scale))).exp().matrix();
  k.diagonal().array() += nugget;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Factorization f;
  f.lower = llt.matrixL();
  f.alpha = llt.solve(y);
  const double log_det = 2.0 * f.lower.diagonal().array().log().sum();
  f.log_likelihood = -0.5 * y.dot(f.alpha) - 0.5 * log_det -
                     0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
  if (!std::isfinite(f.log_likelihood)) return std::nullopt;
  return f;
}

}  // namespace detail

/// Zero-mean, unit-variance GP with an RBF kernel, conditioned on noise-free samples.
class GPModel {
 public:
  const std::vector<Sample>& training() const noexcept { return training_; }
  double length_scale() const noexcept { return length_scale_; }
  double nugget() const noexcept { return nugget_; }
  double log_marginal_likelihood() const noexcept { return log_likelihood_; }

  double kernel(Vec2 a, Vec2 b) const {
    return std::exp(-0.5 * (a - b).squared_norm() / (length_scale_ * length_scale_));
  }

  PointPrediction predict(Vec2 p) const {
    const auto n = static_cast<Eigen::Index>(training_.size());
    Eigen::VectorXd ks(n);
    for (Eigen::Index i = 0; i < n; ++i) ks(i) = kernel(training_[static_cast<std::size_t>(i)].position, p);
    const double mean = ks.dot(alpha_);
    lower_.triangularView<Eigen::Lower>().solveInPlace(ks);
    const double var = 1.0 - ks.squaredNorm();
    return {mean, std::sqrt(std::max(var, 0.0))};
  }

  /// Posterior at every water-cell center.
  GridPrediction predict_grid(const GridMap& map) const { return predict_cells(map, map.water_cells()); }

  /// Posterior at the given cell centers only; the argmaxes range over those
  /// cells, ties going to the lowest linear index.
  GridPrediction predict_cells(const GridMap& map, std::span<const int> cells) const {
    GridPrediction out;
    out.mean = Field(map.rows(), map.cols(), kLandSentinel);
    out.std = Field(map.rows(), map.cols(), kLandSentinel);
    if (cells.empty()) return out;

    const auto n = static_cast<Eigen::Index>(training_.size());
    const auto m = static_cast<Eigen::Index>(cells.size());
    const double inv = -0.5 / (length_scale_ * length_scale_);
    // exp(-(dx^2 + dy^2) / 2l^2) factors into a column term and a row term.
    Eigen::MatrixXd col_factor(n, map.cols());
    Eigen::MatrixXd row_factor(n, map.rows());
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vec2 p = training_[static_cast<std::size_t>(i)].position;
      for (int c = 0; c < map.cols(); ++c) {
        const double dx = c + 0.5 - p.x;
        col_factor(i, c) = std::exp(inv * dx * dx);
      }
      for (int r = 0; r < map.rows(); ++r) {
        const double dy = r + 0.5 - p.y;
        row_factor(i, r) = std::exp(inv * dy * dy);
      }
    }
    Eigen::MatrixXd cross(n, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const int cell = cells[static_cast<std::size_t>(j)];
      cross.col(j) = row_factor.col(cell / map.cols()).cwiseProduct(col_factor.col(cell % map.cols()));
    }
    const Eigen::VectorXd mean = cross.transpose() * alpha_;
    lower_.triangularView<Eigen::Lower>().solveInPlace(cross);
    const Eigen::VectorXd explained = cross.colwise().squaredNorm().transpose();

    double best_mean = -std::numeric_limits<double>::infinity();
    double best_std = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < m; ++j) {
      const int cell = cells[static_cast<std::size_t>(j)];
      const auto idx = static_cast<std::size_t>(cell);
      const double sd = std::sqrt(std::max(1.0 - explained(j), 0.0));
      out.mean[idx] = mean(j);
      out.std[idx] = sd;
      if (mean(j) > best_mean || (mean(j) == best_mean && cell < out.max_con_cell)) {
        best_mean = mean(j);
        out.max_con_cell = cell;
      }
      if (sd > best_std || (sd == best_std && cell < out.max_un_cell)) {
        best_std = sd;
        out.max_un_cell = cell;
      }
    }
    out.max_con = map.cell_center(out.max_con_cell);
    out.max_un = map.cell_center(out.max_un_cell);
    return out;
  }

  friend GPModel fit(std::span<const Sample> samples, const GpOptions& options);

 private:
  std::vector<Sample> training_;
  double length_scale_ = 10.0;
  double nugget_ = 1e-6;
  double log_likelihood_ = 0.0;
  Eigen::MatrixXd lower_;
  Eigen::VectorXd alpha_;
};

/// Drops samples that share a position with a later one (later = higher step,
/// then later in the sequence) and orders the rest by (y, x) so the fit does not
/// depend on arrival order.
inline std::vector<Sample> canonical_samples(std::span<const Sample> samples) {
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto key_less = [&](std::size_t a, std::size_t b) {
    const Vec2 pa = samples[a].position, pb = samples[b].position;
    if (pa.y != pb.y) return pa.y < pb.y;
    if (pa.x != pb.x) return pa.x < pb.x;
    if (samples[a].step != samples[b].step) return samples[a].step < samples[b].step;
    return a < b;
  };
  std::sort(order.begin(), order.end(), key_less);
  std::vector<Sample> out;
  out.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const bool last_of_position =
        k + 1 == order.size() || !(samples[order[k]].position == samples[order[k + 1]].position);
    if (last_of_position) out.push_back(samples[order[k]]);
  }
  return out;
}

/// Fits the GP. The length scale maximizes the log marginal likelihood by
/// golden-section search over log(l) in the configured bounds; the initial
/// value is kept when it scores at least as well.
inline GPModel fit(std::span<const Sample> samples, const GpOptions& options) {
  if (samples.empty()) throw NumericalError(0, "cannot fit a GP without samples");
  GPModel model;
  model.training_ = canonical_samples(samples);
  model.nugget_ = options.nugget;
  const auto n = static_cast<Eigen::Index>(model.training_.size());
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = model.training_[static_cast<std::size_t>(i)].value;
  const Eigen::MatrixXd d2 = detail::squared_distances(model.training_);

  auto score = [&](double log_l) {
    auto f = detail::factorize(d2, y, std::exp(log_l), options.nugget);
    return f ? f->log_likelihood : -std::numeric_limits<double>::infinity();
  };

  double best_log_l = std::log(options.length_scale_init);
  bool searched = false;
  if (options.fit_length_scale) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = std::log(options.length_scale_min);
    double b = std::log(options.length_scale_max);
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = score(c);
    double fd = score(d);
    while (b - a > options.search_tolerance) {
      if (fc >= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - kInvPhi * (b - a);
        fc = score(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + kInvPhi * (b - a);
        fd = score(d);
      }
    }
    const double candidate = 0.5 * (a + b);
    if (score(candidate) > score(best_log_l)) {
      best_log_l = candidate;
      searched = true;
    }
  }

  model.length_scale_ = searched ? std::exp(best_log_l) : options.length_scale_init;
  auto f = detail::factorize(d2, y, model.length_scale_, options.nugget);
  if (!f) throw NumericalError(samples.size(), "kernel matrix is not positive definite");
  model.lower_ = std::move(f->lower);
  model.alpha_ = std::move(f->alpha);
  model.log_likelihood_ = f->log_likelihood;
  return model;
}

/// Per-vehicle minimum sampling distance: lambda times the current length scale.
class SamplingPolicy {
 public:
  explicit SamplingPolicy(int n_vehicles, double lambda = 0.3) : lambda_(lambda), last_(static_cast<std::size_t>(n_vehicles)) {
    if (lambda < 0.1 || lambda > 0.5) throw ConfigError("sampling lambda must lie in [0.1, 0.5]");
  }

  double lambda() const noexcept { return lambda_; }
  const std::optional<Vec2>& last_sample_pos(int vehicle) const { return last_.at(static_cast<std::size_t>(vehicle)); }

  bool should_sample(double length_scale, Vec2 position, int vehicle) const {
    const auto& last = last_.at(static_cast<std::size_t>(vehicle));
    if (!last) return true;
    return distance(position, *last) >= lambda_ * length_scale;
  }

  bool should_sample(const GPModel& model, Vec2 position, int vehicle) const {
    return should_sample(model.length_scale(), position, vehicle);
  }

  void record(int vehicle, Vec2 position) { last_.at(static_cast<std::size_t>(vehicle)) = position; }

 private:
  double lambda_;
  std::vector<std::optional<Vec2>> last_;
};

}  // namespace aquafel

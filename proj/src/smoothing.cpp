#include "datapop/smoothing.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "datapop/error.hpp"

namespace datapop {
namespace {

int grid_points(double grid_step) {
  if (!(grid_step > 0.0 && grid_step <= 1.0)) throw ValidationError("alpha grid step must be in (0, 1]");
  const double k = std::round(1.0 / grid_step);
  if (k > 100000) throw ValidationError("alpha grid step too small");
  return static_cast<int>(k);
}

}  // namespace

SmoothingFit brown_forecast(std::span<const double> series, double alpha) {
  if (series.empty()) throw ValidationError("cannot smooth an empty series");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must be in [0, 1]");
  SmoothingFit fit;
  fit.alpha = alpha;
  fit.initial_level = average_forecast(series);
  double level = fit.initial_level;
  for (double y : series) {
    const double err = level - y;
    fit.sse += err * err;
    // Convex form: alpha = 1 lands exactly on y, alpha = 0 keeps the level.
    level = (1.0 - alpha) * level + alpha * y;
  }
  fit.next_forecast = level;
  return fit;
}

SmoothingFit fit_alpha(std::span<const double> series, double grid_step) {
  if (series.size() < 2) throw ValidationError("fit_alpha needs a series of at least 2 points");
  const int k = grid_points(grid_step);
  const auto n = static_cast<std::size_t>(k) + 1;

  // All grid points advance together; the inner loop is over alpha.
  std::vector<double> alpha(n), keep(n), level(n), sse(n, 0.0);
  const double mean = average_forecast(series);
  for (std::size_t i = 0; i < n; ++i) {
    alpha[i] = static_cast<double>(i) / static_cast<double>(k);
    keep[i] = 1.0 - alpha[i];
    level[i] = mean;
  }
  for (double y : series) {
    for (std::size_t i = 0; i < n; ++i) {
      const double err = level[i] - y;
      sse[i] += err * err;
      level[i] = keep[i] * level[i] + alpha[i] * y;
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (sse[i] < sse[best]) best = i;
  }
  return {alpha[best], mean, level[best], sse[best]};
}

double forecast_horizon(const SmoothingFit& fit, int weeks) {
  if (weeks < 1) throw ValidationError("forecast horizon must be >= 1 week");
  return weeks * fit.next_forecast;
}

double static_forecast(std::span<const double> series) {
  if (series.empty()) throw ValidationError("static forecast of an empty series");
  return series.back();
}

double average_forecast(std::span<const double> series) {
  if (series.empty()) throw ValidationError("average forecast of an empty series");
  return std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
}

double short_term_forecast(std::span<const double> series, double grid_step) {
  if (series.size() < 2) return average_forecast(series);
  return fit_alpha(series, grid_step).next_forecast;
}

}  // namespace datapop

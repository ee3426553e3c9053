#pragma once

#include <span>

namespace datapop {

inline constexpr double kDefaultAlphaStep = 0.01;

// Brown's simple exponential smoothing of a weekly access series.
struct SmoothingFit {
  double alpha = 0.0;
  double initial_level = 0.0;  // level before the first observation: the series mean
  double next_forecast = 0.0;  // level one step past the end of the series
  double sse = 0.0;            // sum over t of (level_t - y_t)^2
};

// Runs level_{t+1} = level_t + alpha * (y_t - level_t) from level_0 = mean(series).
SmoothingFit brown_forecast(std::span<const double> series, double alpha);

// Grid search over alpha = k / K, k = 0..K with K = round(1 / grid_step),
// keeping the smallest alpha among equal SSEs. Needs at least two points.
SmoothingFit fit_alpha(std::span<const double> series, double grid_step = kDefaultAlphaStep);

// Flat multi-step extrapolation: weeks * next_forecast.
double forecast_horizon(const SmoothingFit& fit, int weeks);

double static_forecast(std::span<const double> series);   // last value
double average_forecast(std::span<const double> series);  // arithmetic mean

// Forecast used by the replication strategy: fit_alpha when the series has at
// least two points, average_forecast otherwise.
double short_term_forecast(std::span<const double> series, double grid_step = kDefaultAlphaStep);

}  // namespace datapop

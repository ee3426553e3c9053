#include <doctest.h>

#include <random>

#include "datapop/error.hpp"
#include "datapop/smoothing.hpp"
#include "oracles.hpp"

using namespace datapop;

namespace {

std::vector<double> random_series(std::mt19937& rng) {
  std::uniform_int_distribution<int> length(1, 60), value(0, 30);
  std::vector<double> s(static_cast<std::size_t>(length(rng)));
  for (auto& v : s) v = value(rng);
  return s;
}

}  // namespace

TEST_CASE("constant series is a fixed point") {
  const std::vector<double> s{5, 5, 5};
  for (double a : {0.0, 0.3, 1.0}) {
    const auto fit = brown_forecast(s, a);
    CHECK(fit.next_forecast == 5.0);
    CHECK(fit.sse == 0.0);
  }
}

TEST_CASE("extreme alphas") {
  CHECK(brown_forecast(std::vector<double>{1, 2, 3}, 1.0).next_forecast == 3.0);
  CHECK(brown_forecast(std::vector<double>{2, 4, 6}, 0.0).next_forecast == 4.0);
}

TEST_CASE("hand-applied recurrence on [0, 4] with alpha 0.5") {
  const auto fit = brown_forecast(std::vector<double>{0, 4}, 0.5);
  CHECK(fit.initial_level == 2.0);
  CHECK(fit.next_forecast == 2.5);
  // (2 - 0)^2 + (1 - 4)^2
  CHECK(fit.sse == 13.0);
}

TEST_CASE("brown_forecast argument checks") {
  CHECK_THROWS_AS(brown_forecast(std::vector<double>{}, 0.5), ValidationError);
  CHECK_THROWS_AS(brown_forecast(std::vector<double>{1}, 1.5), ValidationError);
  CHECK_THROWS_AS(brown_forecast(std::vector<double>{1}, -0.1), ValidationError);
  CHECK_THROWS_AS(fit_alpha(std::vector<double>{1}), ValidationError);
  CHECK_THROWS_AS(static_forecast(std::vector<double>{}), ValidationError);
  CHECK_THROWS_AS(average_forecast(std::vector<double>{}), ValidationError);
  CHECK_THROWS_AS(fit_alpha(std::vector<double>{1, 2}, 0.0), ValidationError);
}

TEST_CASE("fit_alpha on constant series returns the smallest alpha") {
  const auto fit = fit_alpha(std::vector<double>{4, 4, 4, 4});
  CHECK(fit.alpha == 0.0);
  CHECK(fit.sse == 0.0);
}

TEST_CASE("fit_alpha on persistent series picks alpha near 1") {
  // Level shift and linear trend: following the last value wins.
  for (const auto& s : {std::vector<double>{1, 1, 1, 7, 7, 7, 7, 7, 7, 7}, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}}) {
    const auto fit = fit_alpha(s);
    CHECK(fit.alpha >= 0.9);
    CHECK(fit.alpha == oracle::grid_alpha(s).alpha);
  }
  // A single outlier followed by a plateau is better served by the mean
  // start level, because level_0 is the series mean: SSE 30 at alpha 0 vs 61 at alpha 1.
  const std::vector<double> plateau{1, 7, 7, 7, 7, 7};
  CHECK(fit_alpha(plateau).alpha == 0.0);
  CHECK(brown_forecast(plateau, 0.0).sse == 30.0);
  CHECK(brown_forecast(plateau, 1.0).sse == 61.0);
}

TEST_CASE("fit_alpha on i.i.d. noise stays in the lower half") {
  std::mt19937 rng(42);
  std::normal_distribution<double> noise(20.0, 3.0);
  std::vector<double> s(80);
  for (auto& v : s) v = noise(rng);
  const auto fit = fit_alpha(s);
  CHECK(fit.alpha <= 0.5);
  CHECK(fit.sse <= brown_forecast(s, 1.0).sse);
  CHECK(fit.alpha == oracle::grid_alpha(s).alpha);
}

TEST_CASE("forecast_horizon is flat") {
  CHECK(forecast_horizon({0.3, 1.0, 2.5, 0.0}, 4) == 10.0);
  CHECK(forecast_horizon({0.3, 1.0, 0.0, 0.0}, 7) == 0.0);
  CHECK(forecast_horizon(brown_forecast(std::vector<double>{3, 3, 3}, 0.4), 4) == 12.0);
  CHECK_THROWS_AS(forecast_horizon({}, 0), ValidationError);
}

TEST_CASE("static and average baselines") {
  const std::vector<double> s{1, 2, 9};
  CHECK(static_forecast(s) == 9.0);
  CHECK(average_forecast(s) == 4.0);
  CHECK(short_term_forecast(std::vector<double>{6}) == 6.0);
  CHECK(short_term_forecast(s) == fit_alpha(s).next_forecast);
}

TEST_CASE("extreme-case identities hold exactly on random series") {
  std::mt19937 rng(1);
  for (int i = 0; i < 500; ++i) {
    const auto s = random_series(rng);
    CHECK(brown_forecast(s, 1.0).next_forecast == static_forecast(s));
    CHECK(brown_forecast(s, 0.0).next_forecast == average_forecast(s));
  }
}

TEST_CASE("fit_alpha agrees with the brute-force grid and beats both extremes") {
  std::mt19937 rng(2);
  for (int i = 0; i < 300; ++i) {
    auto s = random_series(rng);
    if (s.size() < 2) s.push_back(1.0);
    const auto fit = fit_alpha(s);
    const auto expected = oracle::grid_alpha(s);
    CHECK(fit.alpha == expected.alpha);
    CHECK(fit.sse == doctest::Approx(expected.sse).epsilon(1e-12));
    CHECK(fit.next_forecast == doctest::Approx(expected.next).epsilon(1e-12));
    CHECK(fit.sse <= brown_forecast(s, 0.0).sse);
    CHECK(fit.sse <= brown_forecast(s, 1.0).sse);
    CHECK(fit.next_forecast >= 0.0);
    // The fit is the plain recurrence at the chosen alpha.
    const auto replayed = brown_forecast(s, fit.alpha);
    CHECK(replayed.next_forecast == fit.next_forecast);
    CHECK(replayed.sse == fit.sse);
  }
}

TEST_CASE("coarser grids") {
  const std::vector<double> s{1, 1, 1, 7, 7, 7, 7, 7, 7, 7};
  const auto fit = fit_alpha(s, 0.25);
  CHECK((fit.alpha == 0.0 || fit.alpha == 0.25 || fit.alpha == 0.5 || fit.alpha == 0.75 || fit.alpha == 1.0));
}

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "anonsim/attacks.hpp"

namespace anonsim::metrics {

// Shannon entropy of the belief in bits, with 0 * log 0 = 0.
inline double entropy_bits(const attacks::PosteriorBelief& belief) {
  double h = 0.0;
  for (const auto& [as, p] : belief.probabilities)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

struct AccuracyReport {
  std::optional<double> accuracy;  // absent when no guess was made
  double rejection_rate = 0.0;
  std::size_t n_guesses = 0;
  std::size_t n_total = 0;
};

// Accuracy over guesses only; rejection rate over everything.
inline AccuracyReport accuracy_rejection(
    const std::vector<std::pair<attacks::GuessOutcome, std::string>>& outcomes) {
  if (outcomes.empty()) throw ValidationError("no outcomes to score");
  AccuracyReport rep;
  rep.n_total = outcomes.size();
  std::size_t correct = 0;
  for (const auto& [outcome, truth] : outcomes) {
    if (!outcome.guessed()) continue;
    ++rep.n_guesses;
    if (*outcome.guess == truth) ++correct;
  }
  rep.rejection_rate = static_cast<double>(rep.n_total - rep.n_guesses) /
                       static_cast<double>(rep.n_total);
  if (rep.n_guesses > 0)
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(rep.n_guesses);
  return rep;
}

struct QuartileSummary {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double band_lo = 0.0;  // q1 - 1.5 * iqr
  double band_hi = 0.0;  // q3 + 1.5 * iqr
  std::size_t n = 0;

  double iqr() const { return q3 - q1; }
};

// Quartiles by linear interpolation between order statistics at ranks
// (n-1) * {0.25, 0.5, 0.75}, zero-based.
inline QuartileSummary quartile_summary(std::vector<double> values) {
  if (values.empty()) throw ValidationError("quartile_summary of empty list");
  std::sort(values.begin(), values.end());
  auto at_quantile = [&](double q) {
    const double rank = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(rank);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return values[lo] + (values[hi] - values[lo]) * frac;
  };
  QuartileSummary s;
  s.n = values.size();
  s.q1 = at_quantile(0.25);
  s.median = at_quantile(0.5);
  s.q3 = at_quantile(0.75);
  s.band_lo = s.q1 - 1.5 * s.iqr();
  s.band_hi = s.q3 + 1.5 * s.iqr();
  return s;
}

}  // namespace anonsim::metrics

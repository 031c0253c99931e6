#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "anonsim/metrics.hpp"
#include "anonsim/rng.hpp"

using namespace anonsim;
using namespace anonsim::metrics;
using anonsim::attacks::GuessOutcome;
using anonsim::attacks::PosteriorBelief;

namespace {

PosteriorBelief belief(std::initializer_list<std::pair<AsId, double>> ps) {
  PosteriorBelief b;
  b.probabilities.assign(ps.begin(), ps.end());
  return b;
}

}  // namespace

TEST(Entropy, Examples) {
  EXPECT_DOUBLE_EQ(entropy_bits(PosteriorBelief::uniform({1, 2, 3, 4})), 2.0);
  EXPECT_DOUBLE_EQ(entropy_bits(belief({{1, 1.0}})), 0.0);
  EXPECT_DOUBLE_EQ(entropy_bits(belief({{1, 0.5}, {2, 0.25}, {3, 0.25}})), 1.5);
  EXPECT_DOUBLE_EQ(entropy_bits(belief({{1, 1.0}, {2, 0.0}})), 0.0);
}

TEST(Entropy, BoundedByLogSupportEqualityIffUniform) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(12);
    PosteriorBelief b;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double w = rng.uniform01() + 1e-9;
      b.probabilities.emplace_back(static_cast<AsId>(i + 1), w);
      total += w;
    }
    double max_dev = 0.0;
    for (auto& [as, p] : b.probabilities) {
      p /= total;
      max_dev = std::max(max_dev, std::abs(p - 1.0 / static_cast<double>(n)));
    }
    const double h = entropy_bits(b);
    const double cap = std::log2(static_cast<double>(n));
    EXPECT_LE(h, cap + 1e-9);
    if (max_dev < 1e-12) EXPECT_NEAR(h, cap, 1e-9);
    if (h > cap - 1e-9) EXPECT_LT(max_dev, 1e-3);
  }
}

TEST(AccuracyRejection, Examples) {
  auto guess = [](const char* who) { return GuessOutcome{who, 0.9}; };
  GuessOutcome reject{std::nullopt, 0.3};

  std::vector<std::pair<GuessOutcome, std::string>> outcomes;
  for (int i = 0; i < 8; ++i) outcomes.emplace_back(reject, "t");
  outcomes.emplace_back(guess("t"), "t");
  outcomes.emplace_back(guess("x"), "t");
  auto rep = accuracy_rejection(outcomes);
  ASSERT_TRUE(rep.accuracy.has_value());
  EXPECT_DOUBLE_EQ(*rep.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(rep.rejection_rate, 0.8);
  EXPECT_EQ(rep.n_guesses + (rep.n_total - rep.n_guesses), rep.n_total);

  auto all_reject = accuracy_rejection({{reject, "t"}, {reject, "t"}});
  EXPECT_FALSE(all_reject.accuracy.has_value());
  EXPECT_DOUBLE_EQ(all_reject.rejection_rate, 1.0);

  auto all_correct = accuracy_rejection({{guess("t"), "t"}, {guess("t"), "t"}});
  EXPECT_DOUBLE_EQ(*all_correct.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(all_correct.rejection_rate, 0.0);

  EXPECT_THROW(accuracy_rejection({}), ValidationError);
}

TEST(Quartiles, Examples) {
  auto s = quartile_summary({1, 2, 3, 4, 100});
  EXPECT_DOUBLE_EQ(s.q1, 2.0);
  EXPECT_DOUBLE_EQ(s.median, 3.0);
  EXPECT_DOUBLE_EQ(s.q3, 4.0);
  EXPECT_DOUBLE_EQ(s.band_lo, -1.0);
  EXPECT_DOUBLE_EQ(s.band_hi, 7.0);
  EXPECT_EQ(s.n, 5u);

  auto one = quartile_summary({5});
  EXPECT_DOUBLE_EQ(one.q1, 5.0);
  EXPECT_DOUBLE_EQ(one.median, 5.0);
  EXPECT_DOUBLE_EQ(one.q3, 5.0);
  EXPECT_DOUBLE_EQ(one.band_lo, 5.0);
  EXPECT_DOUBLE_EQ(one.band_hi, 5.0);

  auto flat = quartile_summary({1, 1, 1, 1});
  EXPECT_DOUBLE_EQ(flat.iqr(), 0.0);
  EXPECT_DOUBLE_EQ(flat.band_lo, 1.0);
  EXPECT_DOUBLE_EQ(flat.band_hi, 1.0);

  EXPECT_THROW(quartile_summary({}), ValidationError);
}

TEST(Quartiles, PermutationInvariant) {
  std::vector<double> values{7, 1, 3, 3, 9, 2, 8, 4};
  auto base = quartile_summary(values);
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    for (std::size_t k = values.size(); k > 1; --k)
      std::swap(values[k - 1], values[rng.uniform_index(k)]);
    auto s = quartile_summary(values);
    EXPECT_DOUBLE_EQ(s.q1, base.q1);
    EXPECT_DOUBLE_EQ(s.median, base.median);
    EXPECT_DOUBLE_EQ(s.q3, base.q3);
  }
}

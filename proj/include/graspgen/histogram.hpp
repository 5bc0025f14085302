#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>

namespace graspgen {

/// Fixed 20-bin histogram over [0, 1]; 1.0 lands in the last bin.
struct ScoreHistogram {
  static constexpr std::size_t kBins = 20;
  std::array<std::size_t, kBins> counts{};

  static std::size_t bin_of(double v) {
    if (!(v > 0.0)) return 0;
    return std::min<std::size_t>(kBins - 1, static_cast<std::size_t>(std::floor(v * kBins)));
  }
  static double bin_low(std::size_t k) { return static_cast<double>(k) / kBins; }
  static double bin_high(std::size_t k) { return static_cast<double>(k + 1) / kBins; }

  void add(double v) { ++counts[bin_of(v)]; }

  std::size_t total() const {
    std::size_t n = 0;
    for (auto c : counts) n += c;
    return n;
  }

  bool operator==(const ScoreHistogram&) const = default;
};

/// Sum over bins of |p_k - q_k| between the normalised histograms, in [0, 2].
/// Two empty histograms are at distance 0; one empty one is at distance 2.
inline double l1_distance(const ScoreHistogram& a, const ScoreHistogram& b) {
  const double na = static_cast<double>(a.total()), nb = static_cast<double>(b.total());
  if (na == 0.0 && nb == 0.0) return 0.0;
  if (na == 0.0 || nb == 0.0) return 2.0;
  double d = 0.0;
  for (std::size_t k = 0; k < ScoreHistogram::kBins; ++k)
    d += std::abs(static_cast<double>(a.counts[k]) / na - static_cast<double>(b.counts[k]) / nb);
  return d;
}

/// CSV with header `bin_low,bin_high,<first>,<second>`.
inline void write_histogram_csv(std::ostream& out, const ScoreHistogram& first,
                                const ScoreHistogram& second, const char* first_name,
                                const char* second_name) {
  out << "bin_low,bin_high," << first_name << ',' << second_name << '\n';
  for (std::size_t k = 0; k < ScoreHistogram::kBins; ++k)
    out << ScoreHistogram::bin_low(k) << ',' << ScoreHistogram::bin_high(k) << ','
        << first.counts[k] << ',' << second.counts[k] << '\n';
}

}  // namespace graspgen

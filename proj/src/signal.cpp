#include "morpi/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace morpi {

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;

  static Biquad butterworth_lowpass(double cutoff_hz, double rate_hz) {
    double w = std::tan(std::numbers::pi * cutoff_hz / rate_hz);
    double n = 1.0 / (1.0 + std::numbers::sqrt2 * w + w * w);
    Biquad q;
    q.b0 = w * w * n;
    q.b1 = 2.0 * q.b0;
    q.b2 = q.b0;
    q.a1 = 2.0 * n * (w * w - 1.0);
    q.a2 = n * (1.0 - std::numbers::sqrt2 * w + w * w);
    return q;
  }

  // direct form I, initialized to the DC steady state of x0
  void run(std::vector<double>& x) const {
    if (x.empty()) return;
    double x1 = x[0], x2 = x[0], y1 = x[0], y2 = x[0];
    for (double& v : x) {
      double y = b0 * v + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
      x2 = x1;
      x1 = v;
      y2 = y1;
      y1 = y;
      v = y;
    }
  }
};

}  // namespace

std::vector<double> lowpass_zero_phase(std::span<const double> x,
                                       double cutoff_hz, double rate_hz) {
  std::vector<double> out(x.begin(), x.end());
  if (x.size() < 4 || cutoff_hz <= 0.0 || cutoff_hz >= 0.5 * rate_hz)
    return out;

  std::size_t pad = std::min<std::size_t>(
      x.size() - 1,
      static_cast<std::size_t>(std::lround(3.0 * rate_hz / cutoff_hz)));
  std::vector<double> ext;
  ext.reserve(x.size() + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i)  // odd reflection about the ends
    ext.push_back(2.0 * x.front() - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 2; i <= pad + 1; ++i)
    ext.push_back(2.0 * x.back() - x[x.size() - i]);

  Biquad q = Biquad::butterworth_lowpass(cutoff_hz, rate_hz);
  q.run(ext);
  std::reverse(ext.begin(), ext.end());
  q.run(ext);
  std::reverse(ext.begin(), ext.end());

  std::copy(ext.begin() + static_cast<std::ptrdiff_t>(pad),
            ext.begin() + static_cast<std::ptrdiff_t>(pad + x.size()),
            out.begin());
  return out;
}

namespace {

double prominence_of(std::span<const double> x, std::size_t p) {
  double base_left = x[p], base_right = x[p];
  for (std::size_t i = p; i-- > 0;) {
    if (x[i] > x[p]) break;
    base_left = std::min(base_left, x[i]);
  }
  for (std::size_t i = p + 1; i < x.size(); ++i) {
    if (x[i] > x[p]) break;
    base_right = std::min(base_right, x[i]);
  }
  return x[p] - std::max(base_left, base_right);
}

}  // namespace

std::vector<Peak> find_peaks(std::span<const double> x, double min_prominence,
                             std::size_t min_separation) {
  std::vector<Peak> candidates;
  std::size_t n = x.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(x[i] > x[i - 1])) continue;
    std::size_t j = i;
    while (j + 1 < n && x[j + 1] == x[i]) ++j;  // plateau
    if (j + 1 >= n || x[j + 1] > x[i]) {
      i = j;
      continue;
    }
    std::size_t idx = (i + j) / 2;
    double prom = prominence_of(x, idx);
    if (prom >= min_prominence) candidates.push_back({idx, x[idx], prom});
    i = j;
  }
  if (min_separation > 1 && candidates.size() > 1) {
    std::vector<Peak> by_height = candidates;
    std::stable_sort(by_height.begin(), by_height.end(),
                     [](const Peak& a, const Peak& b) {
                       return a.height > b.height;
                     });
    std::vector<Peak> kept;
    for (const Peak& c : by_height) {
      bool clear = std::all_of(kept.begin(), kept.end(), [&](const Peak& k) {
        std::size_t d = k.index > c.index ? k.index - c.index
                                          : c.index - k.index;
        return d >= min_separation;
      });
      if (clear) kept.push_back(c);
    }
    std::sort(kept.begin(), kept.end(),
              [](const Peak& a, const Peak& b) { return a.index < b.index; });
    return kept;
  }
  return candidates;
}

double median(std::vector<double> x) {
  if (x.empty()) return 0.0;
  auto mid = x.begin() + static_cast<std::ptrdiff_t>(x.size() / 2);
  std::nth_element(x.begin(), mid, x.end());
  double m = *mid;
  if (x.size() % 2 == 0) {
    double lower = *std::max_element(x.begin(), mid);
    m = 0.5 * (m + lower);
  }
  return m;
}

double interquartile_range(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double p) {
    double h = p * static_cast<double>(sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(h);
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  return quantile(0.75) - quantile(0.25);
}

}  // namespace morpi

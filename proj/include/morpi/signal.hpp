#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace morpi {

/// Forward-backward (zero-phase) 2nd-order Butterworth low-pass. Edges are
/// reflection-padded so a constant input passes through unchanged.
/// cutoff >= rate/2 returns the input as-is.
std::vector<double> lowpass_zero_phase(std::span<const double> x,
                                       double cutoff_hz, double rate_hz);

struct Peak {
  std::size_t index = 0;
  double height = 0.0;
  double prominence = 0.0;
};

/// Local maxima of x (plateaus report their midpoint), filtered by minimum
/// prominence, then thinned so surviving peaks are at least min_separation
/// samples apart (higher peaks win). Result sorted by index.
std::vector<Peak> find_peaks(std::span<const double> x,
                             double min_prominence = 0.0,
                             std::size_t min_separation = 0);

double median(std::vector<double> x);

/// Q3 - Q1 with linear interpolation between order statistics.
double interquartile_range(std::span<const double> x);

}  // namespace morpi

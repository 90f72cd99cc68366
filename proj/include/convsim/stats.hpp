#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "convsim/rng.hpp"

namespace convsim {

double mean(std::span<const double> samples);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Percentile bootstrap of the mean. Deterministic given seed.
Interval bootstrap_ci(std::span<const double> samples, int n_boot, double level,
                      std::uint64_t seed);

// Kendall tau-b over two score lists; nullopt when either list is constant
// (the coefficient is undefined there).
std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y);

// FNV-1a, used to fingerprint configurations in reports.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace convsim

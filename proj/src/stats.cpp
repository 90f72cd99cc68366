#include "convsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace convsim {

double mean(std::span<const double> samples) {
    if (samples.empty()) throw std::invalid_argument("mean: empty sample");
    double s = 0.0;
    for (double v : samples) s += v;
    return s / static_cast<double>(samples.size());
}

Interval bootstrap_ci(std::span<const double> samples, int n_boot, double level,
                      std::uint64_t seed) {
    if (samples.empty()) throw std::invalid_argument("bootstrap_ci: empty sample");
    if (n_boot < 100) throw std::invalid_argument("bootstrap_ci: n_boot must be >= 100");
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("bootstrap_ci: level must be in (0,1)");

    RngStream rng = substream(seed, 0, StreamTag::bootstrap);
    const int n = static_cast<int>(samples.size());
    std::vector<double> means(n_boot);
    for (int b = 0; b < n_boot; ++b) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += samples[rng.uniform_int(n)];
        means[b] = s / n;
    }
    std::sort(means.begin(), means.end());
    double alpha = (1.0 - level) / 2.0;
    auto pick = [&](double q) {
        double pos = q * (n_boot - 1);
        int lo = static_cast<int>(std::floor(pos));
        int hi = static_cast<int>(std::ceil(pos));
        double frac = pos - lo;
        return means[lo] * (1.0 - frac) + means[hi] * frac;
    };
    return {pick(alpha), pick(1.0 - alpha)};
}

std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("kendall_tau_b: length mismatch");
    const int n = static_cast<int>(x.size());
    long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double dx = x[i] - x[j];
            double dy = y[i] - y[j];
            if (dx == 0.0 && dy == 0.0) continue;
            if (dx == 0.0)
                ++ties_x;
            else if (dy == 0.0)
                ++ties_y;
            else if (dx * dy > 0.0)
                ++concordant;
            else
                ++discordant;
        }
    }
    double denom = std::sqrt(static_cast<double>(concordant + discordant + ties_x) *
                             static_cast<double>(concordant + discordant + ties_y));
    if (denom == 0.0) return std::nullopt;
    return static_cast<double>(concordant - discordant) / denom;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace convsim

#pragma once

#include <cmath>
#include <cstdint>

namespace convsim {

// splitmix64 finalizer; used for seed derivation and as the stream generator.
inline std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic counter-based stream. Small state, cheap to derive, so each
// (user, purpose) pair gets its own independent stream. Counterfactual arms
// that share a stream see identical draws regardless of what the other
// streams consumed.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    // uniform in [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    // index in [0, n)
    int uniform_int(int n) {
        return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
    }

    // standard normal via Box-Muller; consumes exactly two draws per pair
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

// Stream purposes. Keeping event-type transitions, organic choices, click
// draws and sale draws on separate streams is what makes common-random-number
// comparisons exact: changing an action can never shift another family's draws.
enum class StreamTag : std::uint64_t {
    chain = 1,
    organic = 2,
    click = 3,
    sale = 4,
    user_init = 5,
    policy = 6,
    catalog = 7,
    training = 8,
    bootstrap = 9,
};

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t scope, StreamTag tag) {
    std::uint64_t h = mix64(master ^ 0x6a09e667f3bcc909ULL);
    h = mix64(h ^ (scope + 0x9e3779b97f4a7c15ULL));
    h = mix64(h ^ static_cast<std::uint64_t>(tag) * 0xff51afd7ed558ccdULL);
    return h;
}

inline RngStream substream(std::uint64_t master, std::uint64_t scope, StreamTag tag) {
    return RngStream(derive_seed(master, scope, tag));
}

}  // namespace convsim

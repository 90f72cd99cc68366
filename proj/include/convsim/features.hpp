#pragma once

#include <span>
#include <vector>

#include "convsim/events.hpp"

namespace convsim {

// Length P+1: organic view counts normalized to sum to 1 (all-zero if the user
// has viewed nothing yet), then a constant 1 bias term.
using FeatureVector = std::vector<double>;

inline FeatureVector featurize(std::span<const Event> history, int num_products) {
    FeatureVector features(num_products + 1, 0.0);
    double total = 0.0;
    for (const Event& e : history) {
        if (e.kind == EventKind::organic) {
            features[e.product_id] += 1.0;
            total += 1.0;
        }
    }
    if (total > 0.0)
        for (int a = 0; a < num_products; ++a) features[a] /= total;
    features[num_products] = 1.0;
    return features;
}

}  // namespace convsim

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "convsim/events.hpp"

namespace convsim {

enum class Scheme { last_click, discounted_last_click, baseline_subtracted };

struct AttributionConfig {
    Scheme scheme = Scheme::last_click;
    double gamma = 1.0;               // per-step decay of a sale's credit
    std::optional<int> window;        // max steps between click and sale; nullopt = unbounded
    bool match_product = false;       // require the sale product to equal the clicked product
    double baseline = 0.0;            // expected unmediated sales subtracted per click

    void validate() const;
};

// Credit assigned to each clicked bandit event of one timeline, in emission
// order, plus the count of conversions no qualifying click could absorb.
struct CreditMap {
    std::vector<std::size_t> click_positions;  // indices into Timeline::events
    std::vector<double> credits;               // aligned with click_positions
    int unattributed = 0;

    double total_credit() const {
        double s = 0.0;
        for (double c : credits) s += c;
        return s;
    }
};

// A sale at step t goes in full to the most recent qualifying click at step
// t' <= t (ties at equal t': later emission wins).
CreditMap attribute_last_click(const Timeline& timeline, const AttributionConfig& config);

// Same click selection, but the sale contributes gamma^(t - t').
CreditMap attribute_discounted(const Timeline& timeline, const AttributionConfig& config);

// Discounted credit minus the unmediated-sales baseline; may go negative.
CreditMap attribute_baseline_subtracted(const Timeline& timeline, const AttributionConfig& config);

CreditMap attribute(const Timeline& timeline, const AttributionConfig& config);

struct BaselineEstimate {
    double value = 0.0;
    bool defined = false;  // false when the corpus has no pre-click steps
};

// Mean conversions per window-step block over user-steps strictly before each
// user's first click. Users who never click contribute their whole episode.
BaselineEstimate estimate_organic_baseline(std::span<const Timeline> timelines, int window);

// The unit agents train on: what the user looked like when the recommendation
// was shown, what was recommended, and how much credit the scheme assigned.
struct CreditedExample {
    std::vector<double> features;
    int action = 0;
    double credit = 0.0;
};

struct TrainingSet {
    std::vector<CreditedExample> sales_examples;  // one per clicked bandit event
    std::vector<CreditedExample> click_examples;  // one per bandit event, credit = clicked
};

TrainingSet build_training_set(std::span<const Timeline> timelines,
                               const AttributionConfig& config, int num_products);

}  // namespace convsim

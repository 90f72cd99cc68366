#include "convsim/attribution.hpp"

#include <cmath>
#include <stdexcept>

#include "convsim/features.hpp"

namespace convsim {

void AttributionConfig::validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma: must be in (0,1]");
    if (baseline < 0.0) throw std::invalid_argument("baseline: must be >= 0");
    if (window.has_value() && *window < 1) throw std::invalid_argument("window: must be >= 1");
}

namespace {

// Single pass, tracking the most recent click overall and per product. Sales
// are folded into their click's accumulator in timeline order.
CreditMap run_last_click(const Timeline& timeline, const AttributionConfig& config,
                         bool discounted) {
    CreditMap map;
    std::vector<std::ptrdiff_t> slot_of_position;  // click position -> credit slot

    std::ptrdiff_t last_any = -1;  // index into map.click_positions
    std::vector<std::ptrdiff_t> last_per_product;

    for (std::size_t i = 0; i < timeline.events.size(); ++i) {
        const Event& e = timeline.events[i];
        if (is_click(e)) {
            map.click_positions.push_back(i);
            map.credits.push_back(0.0);
            last_any = static_cast<std::ptrdiff_t>(map.credits.size()) - 1;
            if (config.match_product) {
                if (last_per_product.size() <= static_cast<std::size_t>(e.product_id))
                    last_per_product.resize(e.product_id + 1, -1);
                last_per_product[e.product_id] = last_any;
            }
        } else if (e.kind == EventKind::conversion) {
            std::ptrdiff_t slot = -1;
            if (config.match_product) {
                if (static_cast<std::size_t>(e.product_id) < last_per_product.size())
                    slot = last_per_product[e.product_id];
            } else {
                slot = last_any;
            }
            if (slot >= 0) {
                int click_t = timeline.events[map.click_positions[slot]].t;
                int dt = e.t - click_t;
                if (config.window.has_value() && dt > *config.window) slot = -1;
                if (slot >= 0) {
                    map.credits[slot] += discounted ? std::pow(config.gamma, dt) : 1.0;
                    continue;
                }
            }
            ++map.unattributed;
        }
    }
    return map;
}

}  // namespace

CreditMap attribute_last_click(const Timeline& timeline, const AttributionConfig& config) {
    config.validate();
    return run_last_click(timeline, config, /*discounted=*/false);
}

CreditMap attribute_discounted(const Timeline& timeline, const AttributionConfig& config) {
    config.validate();
    return run_last_click(timeline, config, /*discounted=*/true);
}

CreditMap attribute_baseline_subtracted(const Timeline& timeline,
                                        const AttributionConfig& config) {
    CreditMap map = attribute_discounted(timeline, config);
    for (double& c : map.credits) c -= config.baseline;
    return map;
}

CreditMap attribute(const Timeline& timeline, const AttributionConfig& config) {
    switch (config.scheme) {
        case Scheme::last_click: return attribute_last_click(timeline, config);
        case Scheme::discounted_last_click: return attribute_discounted(timeline, config);
        case Scheme::baseline_subtracted: return attribute_baseline_subtracted(timeline, config);
    }
    throw std::logic_error("unknown attribution scheme");
}

BaselineEstimate estimate_organic_baseline(std::span<const Timeline> timelines, int window) {
    if (window < 1) throw std::invalid_argument("window: must be >= 1");
    long long preclick_steps = 0;
    long long preclick_sales = 0;
    for (const Timeline& timeline : timelines) {
        int first_click_t = timeline.num_steps();  // no click: whole episode counts
        for (const Event& e : timeline.events) {
            if (is_click(e)) {
                first_click_t = e.t;
                break;
            }
        }
        preclick_steps += first_click_t;
        for (const Event& e : timeline.events) {
            if (e.t >= first_click_t) break;
            if (e.kind == EventKind::conversion) ++preclick_sales;
        }
    }
    if (preclick_steps == 0) return {0.0, false};
    return {static_cast<double>(preclick_sales) * window / static_cast<double>(preclick_steps),
            true};
}

TrainingSet build_training_set(std::span<const Timeline> timelines,
                               const AttributionConfig& config, int num_products) {
    TrainingSet out;
    for (const Timeline& timeline : timelines) {
        CreditMap map = attribute(timeline, config);
        std::size_t next_credit_slot = 0;
        for (std::size_t i = 0; i < timeline.events.size(); ++i) {
            const Event& e = timeline.events[i];
            if (e.kind != EventKind::bandit) continue;
            // snapshot strictly before the recommendation's step
            std::span<const Event> prefix(timeline.events.data(), i);
            while (!prefix.empty() && prefix.back().t >= e.t)
                prefix = prefix.subspan(0, prefix.size() - 1);
            FeatureVector features = featurize(prefix, num_products);

            out.click_examples.push_back({features, e.product_id, e.clicked ? 1.0 : 0.0});
            if (e.clicked) {
                out.sales_examples.push_back(
                    {std::move(features), e.product_id, map.credits[next_credit_slot]});
                ++next_credit_slot;
            }
        }
    }
    return out;
}

}  // namespace convsim

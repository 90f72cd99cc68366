#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace convsim {

// One row of the event-type transition matrix.
struct ChainRow {
    double to_organic = 0.0;
    double to_bandit = 0.0;
    double to_stop = 0.0;

    double sum() const { return to_organic + to_bandit + to_stop; }
};

struct EventChain {
    ChainRow from_organic{0.70, 0.25, 0.05};
    ChainRow from_bandit{0.30, 0.60, 0.10};
};

struct EnvConfig {
    int num_products = 10;
    int embed_dim = 5;
    double kappa = 0.3;        // click update mixing weight, in [0,1]
    double ctr_offset = -3.0;  // log-odds shift for clicks
    double sale_offset = -4.0; // log-odds shift for sales
    double sale_scale = 0.05;  // cap on the per-product sale probability
    double lambda_corr = 1.0;  // correlation of conversion rows with organic rows
    EventChain event_chain;
    int max_steps = 200;
    std::uint64_t master_seed = 0;

    void validate() const;
};

inline void check_chain_row(const ChainRow& row, const std::string& name) {
    if (row.to_organic < 0.0 || row.to_bandit < 0.0 || row.to_stop < 0.0)
        throw std::invalid_argument(name + ": negative transition probability");
    if (std::abs(row.sum() - 1.0) > 1e-12)
        throw std::invalid_argument(name + ": row must sum to 1");
}

inline void EnvConfig::validate() const {
    if (num_products < 2) throw std::invalid_argument("num_products: must be >= 2");
    if (embed_dim < 1) throw std::invalid_argument("embed_dim: must be >= 1");
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw std::invalid_argument("kappa: must be in [0,1]");
    if (!(sale_scale >= 0.0 && sale_scale <= 1.0))
        throw std::invalid_argument("sale_scale: must be in [0,1]");
    if (!(lambda_corr >= -1.0 && lambda_corr <= 1.0))
        throw std::invalid_argument("lambda_corr: must be in [-1,1]");
    if (max_steps < 0) throw std::invalid_argument("max_steps: must be >= 0");
    if (!std::isfinite(ctr_offset)) throw std::invalid_argument("ctr_offset: must be finite");
    if (!std::isfinite(sale_offset)) throw std::invalid_argument("sale_offset: must be finite");
    check_chain_row(event_chain.from_organic, "event_chain.organic");
    check_chain_row(event_chain.from_bandit, "event_chain.bandit");
}

}  // namespace convsim

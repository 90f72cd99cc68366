#pragma once

#include <vector>

#include "convsim/catalog.hpp"
#include "convsim/config.hpp"
#include "convsim/rng.hpp"

namespace convsim {

// Hidden per-episode user state. omega drives organic views and clicks and is
// fixed for the life of the episode; delta drives conversions and moves only
// when the user clicks a recommendation.
struct UserState {
    std::vector<double> omega;
    std::vector<double> delta;
    int step = 0;
    bool alive = true;
};

UserState init_user(const EnvConfig& config, RngStream& rng);

// delta' = (1 - kappa) * delta + kappa * conversion_embed[a]; omega untouched.
void apply_click_update(UserState& user, const ProductCatalog& catalog, int a, double kappa);

}  // namespace convsim

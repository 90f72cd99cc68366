#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "convsim/catalog.hpp"
#include "convsim/config.hpp"
#include "convsim/events.hpp"
#include "convsim/rng.hpp"
#include "convsim/user.hpp"

namespace convsim {

enum class ChainState { organic, bandit, stop };

// softmax over organic_embed * omega, guarded against overflow
std::vector<double> organic_view_probs(const ProductCatalog& catalog, const UserState& user);

// sigma(click_embed[a] . omega + ctr_offset); clicking taste is organic taste
double click_prob(const ProductCatalog& catalog, const UserState& user, int a,
                  const EnvConfig& config);

// sale_scale * sigma(delta . conversion_embed[a] + sale_offset)
double sale_prob(const ProductCatalog& catalog, const UserState& user, int a,
                 const EnvConfig& config);

// RNG streams owned by one episode, one per draw family.
struct UserStreams {
    RngStream chain;
    RngStream organic;
    RngStream click;
    RngStream sale;
    RngStream user_init;
    RngStream policy;
};

UserStreams make_user_streams(std::uint64_t master_seed, int user_id);

// One episode of the event simulator. Each step emits the current organic or
// bandit event, then checks one independent sale Bernoulli per product, then
// advances the event-type chain. A clicked recommendation updates delta before
// the same step's sale check, so the click can pay off immediately.
class EnvSim {
public:
    EnvSim(const ProductCatalog& catalog, const EnvConfig& config, std::uint64_t master_seed,
           int user_id);

    const UserState& user() const { return user_; }
    UserState& user() { return user_; }
    ChainState state() const { return state_; }
    bool done() const { return done_; }
    int t() const { return t_; }
    RngStream& policy_rng() { return streams_.policy; }

    // action must be present exactly when state() == bandit
    std::vector<Event> step(std::optional<int> action);

    // Probe variant: a bandit slot passes with nothing shown (no bandit event,
    // no click draw). Keeps the chain/organic/sale streams flowing so paired
    // counterfactual arms stay draw-aligned.
    std::vector<Event> step_blank();

    // Intervention used by counterfactual probes: apply the click update as if
    // the user had just clicked on a, without emitting an event.
    void force_click(int a);

private:
    std::vector<Event> run_step(std::optional<int> action, bool blank);
    void advance_chain();

    const ProductCatalog& catalog_;
    const EnvConfig& config_;
    UserStreams streams_;
    UserState user_;
    ChainState state_ = ChainState::organic;
    int t_ = 0;
    bool done_ = false;
};

// Everything a policy may look at when asked for a recommendation. Log-trained
// agents use only the event history; the incrementality oracle reads the true
// simulator state.
struct SimContext {
    std::span<const Event> history;
    int num_products;
    const UserState& user;
    const ProductCatalog& catalog;
    const EnvConfig& config;
    RngStream& policy_rng;
};

using Policy = std::function<int(const SimContext&)>;

Timeline simulate_episode(const ProductCatalog& catalog, const EnvConfig& config,
                          const Policy& policy, std::uint64_t master_seed, int user_id);

}  // namespace convsim

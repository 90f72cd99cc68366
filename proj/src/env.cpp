#include "convsim/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace convsim {

ProductCatalog sample_catalog(const EnvConfig& config, RngStream& rng) {
    const int p = config.num_products;
    const int k = config.embed_dim;
    ProductCatalog catalog{Matrix(p, k), Matrix(p, k), Matrix(p, k)};

    for (int i = 0; i < p; ++i)
        for (int j = 0; j < k; ++j) catalog.organic_embed.at(i, j) = rng.gaussian();
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < k; ++j) catalog.click_embed.at(i, j) = rng.gaussian();

    const double rho = config.lambda_corr;
    const double noise = std::sqrt(1.0 - rho * rho);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < k; ++j)
            catalog.conversion_embed.at(i, j) =
                rho * catalog.organic_embed.at(i, j) + noise * rng.gaussian();
    return catalog;
}

UserState init_user(const EnvConfig& config, RngStream& rng) {
    UserState user;
    user.omega.resize(config.embed_dim);
    for (double& w : user.omega) w = rng.gaussian();
    user.delta = user.omega;  // aligned at episode start
    user.step = 0;
    user.alive = true;
    return user;
}

void apply_click_update(UserState& user, const ProductCatalog& catalog, int a, double kappa) {
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw std::invalid_argument("kappa: must be in [0,1]");
    if (a < 0 || a >= catalog.num_products()) throw std::out_of_range("product id out of range");
    auto lambda = catalog.conversion_embed.row(a);
    for (std::size_t j = 0; j < user.delta.size(); ++j)
        user.delta[j] = (1.0 - kappa) * user.delta[j] + kappa * lambda[j];
}

std::vector<double> organic_view_probs(const ProductCatalog& catalog, const UserState& user) {
    const int p = catalog.num_products();
    std::vector<double> logits(p);
    for (int a = 0; a < p; ++a) logits[a] = dot(catalog.organic_embed.row(a), user.omega);
    double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (int a = 0; a < p; ++a) {
        logits[a] = std::exp(logits[a] - m);
        z += logits[a];
    }
    for (int a = 0; a < p; ++a) logits[a] /= z;
    return logits;
}

double click_prob(const ProductCatalog& catalog, const UserState& user, int a,
                  const EnvConfig& config) {
    if (a < 0 || a >= catalog.num_products()) throw std::out_of_range("product id out of range");
    return sigmoid(dot(catalog.click_embed.row(a), user.omega) + config.ctr_offset);
}

double sale_prob(const ProductCatalog& catalog, const UserState& user, int a,
                 const EnvConfig& config) {
    if (a < 0 || a >= catalog.num_products()) throw std::out_of_range("product id out of range");
    return config.sale_scale *
           sigmoid(dot(catalog.conversion_embed.row(a), user.delta) + config.sale_offset);
}

UserStreams make_user_streams(std::uint64_t master_seed, int user_id) {
    auto scope = static_cast<std::uint64_t>(user_id);
    return UserStreams{
        substream(master_seed, scope, StreamTag::chain),
        substream(master_seed, scope, StreamTag::organic),
        substream(master_seed, scope, StreamTag::click),
        substream(master_seed, scope, StreamTag::sale),
        substream(master_seed, scope, StreamTag::user_init),
        substream(master_seed, scope, StreamTag::policy),
    };
}

EnvSim::EnvSim(const ProductCatalog& catalog, const EnvConfig& config, std::uint64_t master_seed,
               int user_id)
    : catalog_(catalog), config_(config), streams_(make_user_streams(master_seed, user_id)) {
    user_ = init_user(config_, streams_.user_init);
    done_ = config_.max_steps <= 0;
    user_.alive = !done_;
}

std::vector<Event> EnvSim::step(std::optional<int> action) {
    if (state_ == ChainState::bandit && !action.has_value())
        throw std::logic_error("step: bandit state requires an action");
    return run_step(action, /*blank=*/false);
}

std::vector<Event> EnvSim::step_blank() { return run_step(std::nullopt, /*blank=*/true); }

void EnvSim::force_click(int a) { apply_click_update(user_, catalog_, a, config_.kappa); }

std::vector<Event> EnvSim::run_step(std::optional<int> action, bool blank) {
    if (done_) throw std::logic_error("step: episode already finished");

    std::vector<Event> out;
    if (state_ == ChainState::organic) {
        const auto probs = organic_view_probs(catalog_, user_);
        double u = streams_.organic.uniform01();
        double acc = 0.0;
        int viewed = catalog_.num_products() - 1;
        for (int a = 0; a < catalog_.num_products(); ++a) {
            acc += probs[a];
            if (u < acc) {
                viewed = a;
                break;
            }
        }
        out.push_back(Event{t_, EventKind::organic, viewed, false});
    } else if (!blank) {
        const int a = *action;
        bool clicked = streams_.click.bernoulli(click_prob(catalog_, user_, a, config_));
        if (clicked) apply_click_update(user_, catalog_, a, config_.kappa);
        out.push_back(Event{t_, EventKind::bandit, a, clicked});
    }

    // one independent sale opportunity per product, after any click update
    for (int b = 0; b < catalog_.num_products(); ++b) {
        bool sold = streams_.sale.bernoulli(sale_prob(catalog_, user_, b, config_));
        if (sold) out.push_back(Event{t_, EventKind::conversion, b, false});
    }

    advance_chain();
    ++t_;
    user_.step = t_;
    if (state_ == ChainState::stop || t_ >= config_.max_steps) {
        done_ = true;
        user_.alive = false;
    }
    return out;
}

void EnvSim::advance_chain() {
    const ChainRow& row = state_ == ChainState::organic ? config_.event_chain.from_organic
                                                        : config_.event_chain.from_bandit;
    double u = streams_.chain.uniform01();
    if (u < row.to_organic)
        state_ = ChainState::organic;
    else if (u < row.to_organic + row.to_bandit)
        state_ = ChainState::bandit;
    else
        state_ = ChainState::stop;
}

Timeline simulate_episode(const ProductCatalog& catalog, const EnvConfig& config,
                          const Policy& policy, std::uint64_t master_seed, int user_id) {
    EnvSim sim(catalog, config, master_seed, user_id);
    Timeline timeline;
    timeline.user_id = user_id;
    while (!sim.done()) {
        std::optional<int> action;
        if (sim.state() == ChainState::bandit) {
            SimContext ctx{timeline.events, catalog.num_products(), sim.user(),
                           catalog,         config,                 sim.policy_rng()};
            action = policy(ctx);
            if (*action < 0 || *action >= catalog.num_products())
                throw std::out_of_range("policy returned product id out of range");
        }
        auto events = sim.step(action);
        timeline.events.insert(timeline.events.end(), events.begin(), events.end());
    }
    return timeline;
}

}  // namespace convsim

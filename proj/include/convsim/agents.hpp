#pragma once

#include <span>
#include <string>
#include <vector>

#include "convsim/attribution.hpp"
#include "convsim/env.hpp"
#include "convsim/features.hpp"
#include "convsim/model.hpp"

namespace convsim {

enum class AgentKind {
    random_uniform,
    popularity,
    click_bandit,
    last_click_sales,
    discounted_sales,
    baseline_subtracted_sales,
    oracle_incremental,
};

const char* agent_kind_name(AgentKind kind);
AgentKind agent_kind_from_name(const std::string& name);

struct AgentSpec {
    AgentKind kind = AgentKind::random_uniform;
    double epsilon = 0.0;
    AttributionConfig attribution;  // sales kinds only
    Hyper hyper;

    void validate() const;
};

// A spec plus whatever act() needs: a trained model for bandit kinds, organic
// view frequencies for the popularity baseline.
struct Agent {
    AgentSpec spec;
    int num_products = 0;
    PolicyModel model;
    std::vector<double> popularity;
};

// Fit an agent on a logged corpus. Random and oracle kinds need no fit; sales
// kinds run the configured attribution scheme first.
Agent train_agent(const AgentSpec& spec, std::span<const Timeline> logs, int num_products);

// Pure action choice from a feature vector; exploration and sampling draws
// come from the caller's stream. Oracle agents cannot act from features alone.
int act(const Agent& agent, const FeatureVector& features, RngStream& rng);

// Expected one-step incremental sale mass of recommending a:
// click_prob(a) * sum_b [sale_prob_b(after click on a) - sale_prob_b(now)].
double oracle_incremental_score(const ProductCatalog& catalog, const UserState& user,
                                const EnvConfig& config, int a);

// Policy adapter for the simulator; handles the oracle kind via the context's
// true state.
Policy make_policy(const Agent& agent);

}  // namespace convsim

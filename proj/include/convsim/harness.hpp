#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "convsim/agents.hpp"
#include "convsim/experiment.hpp"
#include "convsim/stats.hpp"

namespace convsim {

// A concrete environment: configuration plus the catalog it runs on.
struct ScenarioEnv {
    EnvConfig config;
    ProductCatalog catalog;
};

// "sampled": catalog drawn from the config's Gaussian law.
// "bias": the constructed decoy/incremental catalog (see make_bias_scenario).
ScenarioEnv build_scenario(const ExperimentSpec& spec);

// Hand-built four-product catalog in which last-click attribution reliably
// prefers the wrong product. Product 0 is a decoy: its clickers are users who
// buy it organically, and its conversion row sits at their typical state, so
// clicking barely moves them. Product 1 genuinely shifts any user toward its
// own conversion row, but its clickers are heavy clickers whose next click
// arrives quickly, so its last-click credit window is short. Products 2 and 3
// are conversion-neutral click sinks (2 is the clickbait the CTR agent loves).
ScenarioEnv make_bias_scenario(std::uint64_t master_seed);

std::vector<Timeline> generate_logs(const ScenarioEnv& env, const Agent& logging_policy,
                                    int n_users, std::uint64_t seed, int parallel);

struct AgentMetrics {
    std::string name;
    double clicks_per_user = 0.0;
    double ctr = 0.0;
    double sales_per_user = 0.0;
    double attributed_sales_per_user = 0.0;
    Interval sales_ci;
    std::vector<double> per_user_sales;      // independent-seed arms
    std::vector<double> per_user_sales_crn;  // common-random-number arms
};

struct PairedDiff {
    std::string agent_a;
    std::string agent_b;
    double mean_diff = 0.0;  // a minus b, common random numbers
    Interval ci;
};

struct SchemeTau {
    std::string scheme;
    double mean_tau = 0.0;
    int n_defined = 0;  // contexts where tau was defined
};

struct MetricsReport {
    std::vector<AgentMetrics> agents;
    std::vector<PairedDiff> paired;
    std::vector<SchemeTau> taus;  // filled by ranking runs
    std::uint64_t train_seed = 0;
    std::uint64_t eval_seed = 0;
    std::string config_hash;
};

// Evaluates every agent on fresh users. Headline numbers come from
// independent per-arm seeds; paired differences reuse identical per-user
// streams across arms so the contrast is purely the policy.
MetricsReport run_ab_test(const ExperimentSpec& spec, const ScenarioEnv& env,
                          std::span<const Agent> agents);

// Two rollouts sharing every draw; the treated arm gets one forced click on a
// at step 0 and the control arm gets nothing. Bandit slots show no ad in
// either arm. Returns treated sales minus control sales over the horizon.
double counterfactual_probe_once(const ScenarioEnv& env, std::uint64_t master_seed, int user_id,
                                 int a, int horizon);

struct ProbeResult {
    double mean_delta = 0.0;
    Interval ci;
    int n_users = 0;
};

ProbeResult counterfactual_probe(const ScenarioEnv& env, std::uint64_t master_seed, int n_users,
                                 int a, int horizon, int n_bootstrap, int parallel);

// argmax of ||conversion_embed[a]||^2: the product whose own-click alignment
// gain kappa (||L||^2 - delta . L) is largest for a typical fresh user.
int alignment_maximizing_product(const ProductCatalog& catalog);

// Mean Kendall tau-b of one credit-score ranking against per-context oracle
// rankings; contexts where tau is undefined are excluded.
double ranking_quality(std::span<const double> credit_scores,
                       std::span<const std::vector<double>> oracle_scores, int* n_defined = nullptr);

struct RankRun {
    std::vector<double> score_last_click;     // mean credit per click, by action
    std::vector<double> score_discounted;
    std::vector<double> score_baseline_sub;
    SchemeTau tau_last_click;
    SchemeTau tau_discounted;
    SchemeTau tau_baseline_sub;
    double baseline_used = 0.0;
};

// One full ranking experiment: log under the logging policy, score actions by
// mean credit per click under each scheme, compare against the one-step
// incrementality oracle over sampled fresh contexts.
RankRun ranking_quality_run(const ExperimentSpec& spec, const ScenarioEnv& env,
                            std::uint64_t seed);

}  // namespace convsim

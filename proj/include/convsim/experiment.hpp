#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "convsim/agents.hpp"
#include "convsim/attribution.hpp"
#include "convsim/config.hpp"

namespace convsim {

// Full description of one experiment: environment, logging policy, the agent
// roster, the attribution scheme under test, and the evaluation budget.
struct ExperimentSpec {
    EnvConfig env;
    std::string scenario = "sampled";  // "sampled" | "bias"
    AgentSpec logging_policy{AgentKind::random_uniform, 0.0, {}, {}};
    int n_train_users = 2000;
    int n_eval_users = 2000;
    std::vector<AgentSpec> agents;
    AttributionConfig attribution;
    int n_bootstrap = 1000;
    std::string output_dir = "out";
    std::uint64_t train_seed = 0;  // 0 = derive from env.master_seed
    std::uint64_t eval_seed = 0;
    bool estimate_baseline = true;  // fit b from the training corpus
    int baseline_window = 10;       // window for the estimate when attribution is unbounded
    int n_rank_seeds = 20;
    int n_rank_users = 2000;
    int n_contexts = 200;
    int probe_horizon = 100;
    int probe_users = 2000;
    int parallel = 1;

    std::uint64_t effective_train_seed() const;
    std::uint64_t effective_eval_seed() const;
    void validate() const;
};

inline std::uint64_t ExperimentSpec::effective_train_seed() const {
    return train_seed != 0 ? train_seed : mix64(env.master_seed ^ 0x747261696eULL);  // "train"
}

inline std::uint64_t ExperimentSpec::effective_eval_seed() const {
    return eval_seed != 0 ? eval_seed : mix64(env.master_seed ^ 0x6576616cULL);  // "eval"
}

inline void ExperimentSpec::validate() const {
    env.validate();
    attribution.validate();
    logging_policy.validate();
    for (const AgentSpec& a : agents) a.validate();
    if (scenario != "sampled" && scenario != "bias")
        throw std::invalid_argument("scenario: must be \"sampled\" or \"bias\"");
    if (n_train_users < 0) throw std::invalid_argument("n_train_users: must be >= 0");
    if (n_eval_users < 1) throw std::invalid_argument("n_eval_users: must be >= 1");
    if (n_bootstrap < 100) throw std::invalid_argument("n_bootstrap: must be >= 100");
    if (baseline_window < 1) throw std::invalid_argument("baseline_window: must be >= 1");
    if (n_rank_seeds < 1) throw std::invalid_argument("n_rank_seeds: must be >= 1");
    if (n_contexts < 1) throw std::invalid_argument("n_contexts: must be >= 1");
    if (probe_horizon < 0) throw std::invalid_argument("probe_horizon: must be >= 0");
    if (probe_horizon > env.max_steps)
        throw std::invalid_argument("probe_horizon: must be <= env.max_steps");
    if (parallel < 1) throw std::invalid_argument("parallel: must be >= 1");
    if (effective_train_seed() == effective_eval_seed())
        throw std::invalid_argument("train_seed/eval_seed: phase seeds must differ");
}

}  // namespace convsim

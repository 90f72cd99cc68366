// scratch: agent-level check of the bias scenario, not part of the build
#include <cstdlib>
#include <cstdio>
#include <vector>

#include "convsim/harness.hpp"

using namespace convsim;

int main() {
    ExperimentSpec spec;
    spec.scenario = "bias";
    spec.env.master_seed = atoi(getenv("MS") ? getenv("MS") : "600");
    spec.n_train_users = 8000;
    spec.n_eval_users = 10000;
    spec.n_bootstrap = 1000;
    spec.attribution.gamma = 0.75;
    spec.parallel = 8;

    AttributionConfig attr = spec.attribution;
    AgentSpec base{AgentKind::random_uniform, 0.0, attr, {}};
    for (AgentKind kind :
         {AgentKind::random_uniform, AgentKind::popularity, AgentKind::click_bandit,
          AgentKind::last_click_sales, AgentKind::discounted_sales,
          AgentKind::baseline_subtracted_sales, AgentKind::oracle_incremental}) {
        AgentSpec a = base;
        a.kind = kind;
        spec.agents.push_back(a);
    }

    ScenarioEnv env = build_scenario(spec);
    Agent logger{spec.logging_policy, env.config.num_products, {}, {}};
    auto logs = generate_logs(env, logger, spec.n_train_users, spec.effective_train_seed(), 8);

    BaselineEstimate est = estimate_organic_baseline(logs, spec.baseline_window);
    printf("estimated baseline: %.4f (defined %d)\n", est.value, est.defined);
    for (AgentSpec& a : spec.agents)
        if (a.kind == AgentKind::baseline_subtracted_sales) a.attribution.baseline = est.value;

    std::vector<Agent> agents;
    for (const AgentSpec& a : spec.agents)
        agents.push_back(train_agent(a, logs, env.config.num_products));

    // what does each model agent recommend for a generic user?
    for (const Agent& a : agents) {
        if (a.model.weights.rows() == 0) continue;
        FeatureVector f(5, 0.0);
        f[4] = 1.0;
        RngStream r(1);
        printf("%-28s generic action: %d | intercepts:", agent_kind_name(a.spec.kind),
               act(a, f, r));
        for (int i = 0; i < 4; ++i) printf(" %.3f", a.model.weights.at(i, 4));
        printf("\n");
    }

    MetricsReport report = run_ab_test(spec, env, agents);
    for (const AgentMetrics& m : report.agents)
        printf("%-28s clicks/u %6.3f ctr %.4f sales/u %7.4f [%.4f, %.4f]\n", m.name.c_str(),
               m.clicks_per_user, m.ctr, m.sales_per_user, m.sales_ci.lo, m.sales_ci.hi);
    for (const PairedDiff& d : report.paired)
        if (d.agent_a == "discounted_sales" || d.agent_b == "discounted_sales" ||
            d.agent_a == "baseline_subtracted_sales")
            printf("paired %s - %s: %+.4f [%.4f, %.4f]\n", d.agent_a.c_str(), d.agent_b.c_str(),
                   d.mean_diff, d.ci.lo, d.ci.hi);
    return 0;
}

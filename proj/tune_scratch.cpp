// scratch tuning harness, not part of the build
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "convsim/harness.hpp"

using namespace convsim;

struct Params {
    double b0u, b0w;      // decoy click row (affinity, anti-clickiness)
    double b1, b2, b3;    // clicker rows for inc, clickbait, weak sink
    double L0, L1;        // conversion row magnitudes
    double kappa, gamma, mu;
    double stop_o, stop_b;
    int max_steps;
};

ScenarioEnv scenario_from(const Params& q, std::uint64_t seed) {
    EnvConfig config;
    config.num_products = 4;
    config.embed_dim = 3;
    config.kappa = q.kappa;
    config.ctr_offset = q.mu;
    config.sale_offset = -4.0;
    config.sale_scale = 0.1;
    config.event_chain.from_organic = ChainRow{1.0 - 0.20 - q.stop_o, 0.20, q.stop_o};
    config.event_chain.from_bandit = ChainRow{1.0 - 0.50 - q.stop_b, 0.50, q.stop_b};
    config.max_steps = q.max_steps;
    config.master_seed = seed;
    Matrix organic(4, 3), click(4, 3), conversion(4, 3);
    auto set_row = [](Matrix& m, int r, double a, double b, double c) {
        m.at(r, 0) = a; m.at(r, 1) = b; m.at(r, 2) = c;
    };
    set_row(organic, 0, 1.2, 0, 0);
    set_row(organic, 1, 0, 1.2, 0);
    set_row(organic, 2, 0, 0, 1.2);
    set_row(organic, 3, 0, 0, -1.2);
    set_row(click, 0, q.b0u, q.b0w, 0);
    set_row(click, 1, 0, q.b1, 0);
    set_row(click, 2, 0, q.b2, 0);
    set_row(click, 3, 0, q.b3, 0);
    set_row(conversion, 0, q.L0, 0, 0);
    set_row(conversion, 1, 0, 0, q.L1);
    set_row(conversion, 2, 0, 0, 0);
    set_row(conversion, 3, 0, 0, 0);
    return ScenarioEnv{config, ProductCatalog{organic, click, conversion}};
}

int main() {
    std::vector<Params> grid;
    grid.push_back(Params{1.4, -0.8, 2.4, 3.6, 2.2, 1.45, 2.3, 0.45, 0.75, -3.8, 0.004, 0.004, 250});
    grid.push_back(Params{1.4, -0.8, 2.4, 3.6, 2.2, 1.55, 2.3, 0.45, 0.75, -3.8, 0.004, 0.004, 250});

    for (const Params& q : grid) {
        ExperimentSpec spec;
        spec.scenario = "bias";
        spec.n_rank_users = 2500;
        spec.n_contexts = 200;
        spec.attribution.gamma = q.gamma;
        spec.parallel = 8;
        ScenarioEnv env = scenario_from(q, 600);
        const int p = 4;

        Agent logger{AgentSpec{AgentKind::random_uniform, 0.0, {}, {}}, p, {}, {}};
        auto logs = generate_logs(env, logger, spec.n_rank_users, 9000, 8);
        std::vector<double> clicks(p, 0), credit_lc(p, 0), credit_disc(p, 0), window_sum(p, 0);
        AttributionConfig lc;
        AttributionConfig disc;
        disc.scheme = Scheme::discounted_last_click;
        disc.gamma = q.gamma;
        for (const auto& t : logs) {
            CreditMap m1 = attribute_last_click(t, lc);
            CreditMap m2 = attribute_discounted(t, disc);
            for (size_t s = 0; s < m1.click_positions.size(); ++s) {
                int a = t.events[m1.click_positions[s]].product_id;
                clicks[a]++;
                credit_lc[a] += m1.credits[s];
                credit_disc[a] += m2.credits[s];
                int t0 = t.events[m1.click_positions[s]].t;
                int end = t.num_steps();
                if (s + 1 < m1.click_positions.size()) end = t.events[m1.click_positions[s + 1]].t;
                window_sum[a] += end - t0;
            }
        }
        double lc0 = credit_lc[0] / clicks[0], lc1 = credit_lc[1] / clicks[1];
        double d0 = credit_disc[0] / clicks[0], d1 = credit_disc[1] / clicks[1];

        RngStream ctx_rng = substream(1234, 1, StreamTag::user_init);
        int inc_wins = 0;
        for (int j = 0; j < 1000; ++j) {
            UserState u = init_user(env.config, ctx_rng);
            if (oracle_incremental_score(env.catalog, u, env.config, 1) >
                oracle_incremental_score(env.catalog, u, env.config, 0))
                inc_wins++;
        }

        int tau_wins = 0, bs_wins = 0;
        const int seeds = 20;
        double mean_lc = 0, mean_disc = 0;
        for (int s = 0; s < seeds; ++s) {
            RankRun run = ranking_quality_run(spec, env, 9100 + s);
            mean_lc += run.tau_last_click.mean_tau / seeds;
            mean_disc += run.tau_discounted.mean_tau / seeds;
            if (run.tau_discounted.mean_tau > run.tau_last_click.mean_tau) tau_wins++;
            if (run.tau_baseline_sub.mean_tau > run.tau_last_click.mean_tau) bs_wins++;
        }
        printf("  20-seed: mean tau lc %.4f disc %.4f | disc wins %d/20 bs wins %d/20\n", mean_lc,
               mean_disc, tau_wins, bs_wins);

        printf("b0u=%.1f b2=%.1f L0=%.2f L1=%.1f g=%.2f | und %.3f/%.3f (%.2f) disc %.3f/%.3f "
               "(%.2f) w0=%.0f w1=%.0f n0=%.0f | orc %d%% | tau %d/%d %s\n",
               q.b0u, q.b2, q.L0, q.L1, q.gamma, lc0, lc1, lc0 / lc1, d0, d1, d1 / d0,
               window_sum[0] / clicks[0], window_sum[1] / clicks[1], clicks[0], inc_wins / 10,
               tau_wins, seeds,
               (lc0 > lc1 * 1.1 && d1 > d0 * 1.1 && tau_wins == seeds) ? "<== CAND" : "");
        fflush(stdout);
    }
    return 0;
}

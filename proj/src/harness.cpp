#include "convsim/harness.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

#include "convsim/logio.hpp"

namespace convsim {

namespace {

// Deterministic fan-out: workers own disjoint index ranges and write to
// preallocated slots, so results never depend on scheduling.
void parallel_for(int n, int n_threads, const std::function<void(int)>& body) {
    if (n <= 0) return;
    n_threads = std::max(1, std::min(n_threads, n));
    if (n_threads == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (int w = 0; w < n_threads; ++w) {
        workers.emplace_back([&, w] {
            for (int i = w; i < n; i += n_threads) body(i);
        });
    }
    for (auto& t : workers) t.join();
}

}  // namespace

ScenarioEnv build_scenario(const ExperimentSpec& spec) {
    if (spec.scenario == "bias") return make_bias_scenario(spec.env.master_seed);
    RngStream rng = substream(spec.env.master_seed, 0, StreamTag::catalog);
    return ScenarioEnv{spec.env, sample_catalog(spec.env, rng)};
}

ScenarioEnv make_bias_scenario(std::uint64_t master_seed) {
    EnvConfig config;
    config.num_products = 4;
    config.embed_dim = 3;
    config.kappa = 0.45;
    config.ctr_offset = -3.8;
    config.sale_offset = -4.0;
    config.sale_scale = 0.1;
    config.lambda_corr = 0.0;  // unused: the catalog is built by hand
    config.event_chain.from_organic = ChainRow{0.796, 0.20, 0.004};
    config.event_chain.from_bandit = ChainRow{0.496, 0.50, 0.004};
    config.max_steps = 250;
    config.master_seed = master_seed;
    config.validate();

    // axes: 0 decoy affinity, 1 click proneness, 2 incremental conversion
    Matrix organic(4, 3), click(4, 3), conversion(4, 3);
    auto set_row = [](Matrix& m, int r, double a, double b, double c) {
        m.at(r, 0) = a;
        m.at(r, 1) = b;
        m.at(r, 2) = c;
    };
    set_row(organic, 0, 1.2, 0.0, 0.0);
    set_row(organic, 1, 0.0, 1.2, 0.0);
    set_row(organic, 2, 0.0, 0.0, 1.2);
    set_row(organic, 3, 0.0, 0.0, -1.2);

    // Decoy clickers buy it anyway and click little else, so each decoy click
    // soaks up a long stretch of their always-on sales. The heavy clickers
    // around products 1-3 re-click within ~15 steps, so product 1's credit
    // window is short even though its true effect is large.
    set_row(click, 0, 1.4, -0.8, 0.0);
    set_row(click, 1, 0.0, 2.4, 0.0);
    set_row(click, 2, 0.0, 3.6, 0.0);  // clickbait sink
    set_row(click, 3, 0.0, 2.2, 0.0);  // weaker sink

    set_row(conversion, 0, 1.45, 0.0, 0.0);  // ~ the typical decoy clicker's state
    set_row(conversion, 1, 0.0, 0.0, 2.3);   // large, off every user's typical state
    set_row(conversion, 2, 0.0, 0.0, 0.0);
    set_row(conversion, 3, 0.0, 0.0, 0.0);

    return ScenarioEnv{config, ProductCatalog{organic, click, conversion}};
}

std::vector<Timeline> generate_logs(const ScenarioEnv& env, const Agent& logging_policy,
                                    int n_users, std::uint64_t seed, int parallel) {
    std::vector<Timeline> corpus(static_cast<std::size_t>(std::max(0, n_users)));
    Policy policy = make_policy(logging_policy);
    parallel_for(n_users, parallel, [&](int user_id) {
        corpus[user_id] = simulate_episode(env.catalog, env.config, policy, seed, user_id);
    });
    return corpus;
}

namespace {

struct ArmOutcome {
    double clicks = 0.0;
    double recommendations = 0.0;
    double sales = 0.0;
    double attributed = 0.0;
};

ArmOutcome summarize(const Timeline& timeline, const AttributionConfig& attribution) {
    ArmOutcome out;
    for (const Event& e : timeline.events) {
        if (e.kind == EventKind::bandit) {
            out.recommendations += 1.0;
            if (e.clicked) out.clicks += 1.0;
        } else if (e.kind == EventKind::conversion) {
            out.sales += 1.0;
        }
    }
    CreditMap map = attribute_last_click(timeline,
                                         AttributionConfig{Scheme::last_click, 1.0,
                                                           attribution.window,
                                                           attribution.match_product, 0.0});
    out.attributed = out.sales - static_cast<double>(map.unattributed);
    return out;
}

}  // namespace

MetricsReport run_ab_test(const ExperimentSpec& spec, const ScenarioEnv& env,
                          std::span<const Agent> agents) {
    MetricsReport report;
    report.train_seed = spec.effective_train_seed();
    report.eval_seed = spec.effective_eval_seed();
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config_to_string(spec))));
    report.config_hash = hash;

    const int n = spec.n_eval_users;
    for (std::size_t arm = 0; arm < agents.size(); ++arm) {
        const Agent& agent = agents[arm];
        AgentMetrics metrics;
        metrics.name = agent_kind_name(agent.spec.kind);
        metrics.per_user_sales.resize(n);
        metrics.per_user_sales_crn.resize(n);

        Policy policy = make_policy(agent);
        std::vector<ArmOutcome> outcomes(n);
        // independent seeds per arm for the headline numbers
        std::uint64_t arm_seed = mix64(report.eval_seed ^ (0x41424dULL + arm));
        parallel_for(n, spec.parallel, [&](int user_id) {
            Timeline t = simulate_episode(env.catalog, env.config, policy, arm_seed, user_id);
            outcomes[user_id] = summarize(t, spec.attribution);
            metrics.per_user_sales[user_id] = outcomes[user_id].sales;
        });
        // shared per-user streams across arms for the paired contrast
        parallel_for(n, spec.parallel, [&](int user_id) {
            Timeline t =
                simulate_episode(env.catalog, env.config, policy, report.eval_seed, user_id);
            double sales = 0.0;
            for (const Event& e : t.events)
                if (e.kind == EventKind::conversion) sales += 1.0;
            metrics.per_user_sales_crn[user_id] = sales;
        });

        double clicks = 0.0, recs = 0.0, sales = 0.0, attributed = 0.0;
        for (const ArmOutcome& o : outcomes) {
            clicks += o.clicks;
            recs += o.recommendations;
            sales += o.sales;
            attributed += o.attributed;
        }
        metrics.clicks_per_user = clicks / n;
        metrics.ctr = recs > 0.0 ? clicks / recs : 0.0;
        metrics.sales_per_user = sales / n;
        metrics.attributed_sales_per_user = attributed / n;
        metrics.sales_ci = bootstrap_ci(metrics.per_user_sales, spec.n_bootstrap, 0.95,
                                        mix64(report.eval_seed ^ arm));
        report.agents.push_back(std::move(metrics));
    }

    for (std::size_t a = 0; a < agents.size(); ++a) {
        for (std::size_t b = a + 1; b < agents.size(); ++b) {
            std::vector<double> diff(n);
            for (int i = 0; i < n; ++i)
                diff[i] =
                    report.agents[a].per_user_sales_crn[i] - report.agents[b].per_user_sales_crn[i];
            PairedDiff paired{report.agents[a].name, report.agents[b].name, mean(diff),
                              bootstrap_ci(diff, spec.n_bootstrap, 0.95,
                                           mix64(report.eval_seed ^ (a * 131 + b)))};
            report.paired.push_back(std::move(paired));
        }
    }
    return report;
}

double counterfactual_probe_once(const ScenarioEnv& env, std::uint64_t master_seed, int user_id,
                                 int a, int horizon) {
    if (horizon > env.config.max_steps)
        throw std::invalid_argument("horizon: must be <= max_steps");
    EnvSim control(env.catalog, env.config, master_seed, user_id);
    EnvSim treated(env.catalog, env.config, master_seed, user_id);
    treated.force_click(a);

    double delta = 0.0;
    for (int step = 0; step < horizon && !control.done(); ++step) {
        auto count_sales = [](const std::vector<Event>& events) {
            double s = 0.0;
            for (const Event& e : events)
                if (e.kind == EventKind::conversion) s += 1.0;
            return s;
        };
        delta += count_sales(treated.step_blank());
        delta -= count_sales(control.step_blank());
    }
    return delta;
}

ProbeResult counterfactual_probe(const ScenarioEnv& env, std::uint64_t master_seed, int n_users,
                                 int a, int horizon, int n_bootstrap, int parallel) {
    if (n_users < 1) throw std::invalid_argument("n_users: must be >= 1");
    std::vector<double> deltas(n_users);
    parallel_for(n_users, parallel, [&](int user_id) {
        deltas[user_id] = counterfactual_probe_once(env, master_seed, user_id, a, horizon);
    });
    ProbeResult result;
    result.n_users = n_users;
    result.mean_delta = mean(deltas);
    result.ci = bootstrap_ci(deltas, n_bootstrap, 0.95, mix64(master_seed ^ 0x50524f4245ULL));
    return result;
}

int alignment_maximizing_product(const ProductCatalog& catalog) {
    int best = 0;
    double best_norm = -1.0;
    for (int a = 0; a < catalog.num_products(); ++a) {
        double norm = dot(catalog.conversion_embed.row(a), catalog.conversion_embed.row(a));
        if (norm > best_norm) {
            best_norm = norm;
            best = a;
        }
    }
    return best;
}

double ranking_quality(std::span<const double> credit_scores,
                       std::span<const std::vector<double>> oracle_scores, int* n_defined) {
    double sum = 0.0;
    int defined = 0;
    for (const std::vector<double>& oracle : oracle_scores) {
        auto tau = kendall_tau_b(credit_scores, oracle);
        if (tau.has_value()) {
            sum += *tau;
            ++defined;
        }
    }
    if (n_defined) *n_defined = defined;
    return defined > 0 ? sum / defined : 0.0;
}

namespace {

std::vector<double> mean_credit_per_action(std::span<const Timeline> logs,
                                           const AttributionConfig& config, int num_products) {
    std::vector<double> sum(num_products, 0.0);
    std::vector<double> count(num_products, 0.0);
    for (const Timeline& timeline : logs) {
        CreditMap map = attribute(timeline, config);
        for (std::size_t slot = 0; slot < map.click_positions.size(); ++slot) {
            int action = timeline.events[map.click_positions[slot]].product_id;
            sum[action] += map.credits[slot];
            count[action] += 1.0;
        }
    }
    for (int a = 0; a < num_products; ++a) sum[a] = count[a] > 0.0 ? sum[a] / count[a] : 0.0;
    return sum;
}

}  // namespace

RankRun ranking_quality_run(const ExperimentSpec& spec, const ScenarioEnv& env,
                            std::uint64_t seed) {
    const int p = env.config.num_products;
    Agent logger = train_agent(spec.logging_policy, {}, p);
    std::vector<Timeline> logs = generate_logs(env, logger, spec.n_rank_users, seed, spec.parallel);

    RankRun run;
    AttributionConfig base = spec.attribution;
    AttributionConfig lc = base;
    lc.scheme = Scheme::last_click;
    AttributionConfig disc = base;
    disc.scheme = Scheme::discounted_last_click;
    AttributionConfig bs = base;
    bs.scheme = Scheme::baseline_subtracted;
    if (spec.estimate_baseline) {
        int window = base.window.value_or(spec.baseline_window);
        BaselineEstimate estimate = estimate_organic_baseline(logs, window);
        bs.baseline = estimate.value;
    }
    run.baseline_used = bs.baseline;

    run.score_last_click = mean_credit_per_action(logs, lc, p);
    run.score_discounted = mean_credit_per_action(logs, disc, p);
    run.score_baseline_sub = mean_credit_per_action(logs, bs, p);

    RngStream ctx_rng = substream(seed, 1, StreamTag::user_init);
    std::vector<std::vector<double>> oracle(spec.n_contexts);
    for (int j = 0; j < spec.n_contexts; ++j) {
        UserState user = init_user(env.config, ctx_rng);
        oracle[j].resize(p);
        for (int a = 0; a < p; ++a)
            oracle[j][a] = oracle_incremental_score(env.catalog, user, env.config, a);
    }

    run.tau_last_click = {"last_click", 0.0, 0};
    run.tau_last_click.mean_tau =
        ranking_quality(run.score_last_click, oracle, &run.tau_last_click.n_defined);
    run.tau_discounted = {"discounted", 0.0, 0};
    run.tau_discounted.mean_tau =
        ranking_quality(run.score_discounted, oracle, &run.tau_discounted.n_defined);
    run.tau_baseline_sub = {"baseline_subtracted", 0.0, 0};
    run.tau_baseline_sub.mean_tau =
        ranking_quality(run.score_baseline_sub, oracle, &run.tau_baseline_sub.n_defined);
    return run;
}

}  // namespace convsim

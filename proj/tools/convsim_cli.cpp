#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "convsim/harness.hpp"
#include "convsim/logio.hpp"
#include "convsim/report.hpp"

namespace {

using namespace convsim;

struct GlobalArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> parallel;
};

ExperimentSpec load_spec(const GlobalArgs& args) {
    ExperimentSpec spec;
    if (!args.config_path.empty()) spec = parse_config(args.config_path);
    if (args.seed) spec.env.master_seed = *args.seed;
    if (args.out) spec.output_dir = *args.out;
    if (args.parallel) spec.parallel = *args.parallel;
    spec.validate();
    return spec;
}

std::string logs_path(const ExperimentSpec& spec) { return spec.output_dir + "/train_logs.jsonl"; }

std::string model_path(const ExperimentSpec& spec, std::size_t index, AgentKind kind) {
    return spec.output_dir + "/model_" + std::to_string(index) + "_" + agent_kind_name(kind) +
           ".txt";
}

int cmd_simulate(const GlobalArgs& args) {
    ExperimentSpec spec = load_spec(args);
    ScenarioEnv env = build_scenario(spec);
    Agent logger = train_agent(spec.logging_policy, {}, env.config.num_products);
    auto corpus =
        generate_logs(env, logger, spec.n_train_users, spec.effective_train_seed(), spec.parallel);
    std::filesystem::create_directories(spec.output_dir);
    write_log(corpus, logs_path(spec));
    long long events = 0;
    for (const Timeline& t : corpus) events += static_cast<long long>(t.events.size());
    std::cout << "wrote " << corpus.size() << " timelines (" << events << " events) to "
              << logs_path(spec) << "\n";
    return 0;
}

int cmd_train(const GlobalArgs& args) {
    ExperimentSpec spec = load_spec(args);
    ScenarioEnv env = build_scenario(spec);
    auto corpus = read_log(logs_path(spec));

    if (spec.estimate_baseline) {
        int window = spec.attribution.window.value_or(spec.baseline_window);
        BaselineEstimate estimate = estimate_organic_baseline(corpus, window);
        for (AgentSpec& agent : spec.agents)
            if (agent.kind == AgentKind::baseline_subtracted_sales && agent.attribution.baseline == 0.0)
                agent.attribution.baseline = estimate.value;
        std::cout << "estimated organic baseline: " << estimate.value
                  << (estimate.defined ? "" : " (no pre-click steps; using 0)") << "\n";
    }

    for (std::size_t i = 0; i < spec.agents.size(); ++i) {
        Agent agent = train_agent(spec.agents[i], corpus, env.config.num_products);
        switch (agent.spec.kind) {
            case AgentKind::random_uniform:
            case AgentKind::oracle_incremental: break;
            case AgentKind::popularity: {
                Matrix m(1, env.config.num_products);
                for (int a = 0; a < env.config.num_products; ++a)
                    m.at(0, a) = agent.popularity[a];
                save_matrix(m, model_path(spec, i, agent.spec.kind));
                break;
            }
            default: save_matrix(agent.model.weights, model_path(spec, i, agent.spec.kind));
        }
        std::cout << "trained " << agent_kind_name(agent.spec.kind) << "\n";
    }
    return 0;
}

std::vector<Agent> load_agents(const ExperimentSpec& spec, const ScenarioEnv& env) {
    std::vector<Agent> agents;
    for (std::size_t i = 0; i < spec.agents.size(); ++i) {
        Agent agent{spec.agents[i], env.config.num_products, {}, {}};
        switch (agent.spec.kind) {
            case AgentKind::random_uniform:
            case AgentKind::oracle_incremental: break;
            case AgentKind::popularity: {
                Matrix m = load_matrix(model_path(spec, i, agent.spec.kind));
                agent.popularity.assign(m.row(0).begin(), m.row(0).end());
                break;
            }
            default: agent.model.weights = load_matrix(model_path(spec, i, agent.spec.kind));
        }
        agents.push_back(std::move(agent));
    }
    return agents;
}

int cmd_abtest(const GlobalArgs& args) {
    ExperimentSpec spec = load_spec(args);
    ScenarioEnv env = build_scenario(spec);
    std::vector<Agent> agents = load_agents(spec, env);
    MetricsReport report = run_ab_test(spec, env, agents);
    std::filesystem::create_directories(spec.output_dir);
    std::ofstream out(spec.output_dir + "/metrics.json", std::ios::binary);
    out << metrics_to_json(report);
    std::printf("%-28s %10s %8s %12s %12s\n", "agent", "clicks/u", "ctr", "sales/u", "attr/u");
    for (const AgentMetrics& m : report.agents)
        std::printf("%-28s %10.4f %8.4f %12.4f %12.4f\n", m.name.c_str(), m.clicks_per_user,
                    m.ctr, m.sales_per_user, m.attributed_sales_per_user);
    for (const PairedDiff& d : report.paired)
        std::printf("paired CRN %s - %s: %.4f [%.4f, %.4f]\n", d.agent_a.c_str(),
                    d.agent_b.c_str(), d.mean_diff, d.ci.lo, d.ci.hi);
    return 0;
}

int cmd_probe(const GlobalArgs& args, int product, int horizon, int n_users) {
    ExperimentSpec spec = load_spec(args);
    ScenarioEnv env = build_scenario(spec);
    if (product < 0) product = alignment_maximizing_product(env.catalog);
    if (horizon < 0) horizon = spec.probe_horizon;
    if (n_users < 1) n_users = spec.probe_users;
    ProbeResult result = counterfactual_probe(env, spec.env.master_seed, n_users, product, horizon,
                                              spec.n_bootstrap, spec.parallel);
    std::printf("forced click on product %d, horizon %d, %d users\n", product, horizon, n_users);
    std::printf("mean incremental sales: %.6f  95%% CI [%.6f, %.6f]\n", result.mean_delta,
                result.ci.lo, result.ci.hi);
    return 0;
}

int cmd_rank(const GlobalArgs& args) {
    ExperimentSpec spec = load_spec(args);
    ScenarioEnv env = build_scenario(spec);
    double sum_lc = 0.0, sum_disc = 0.0, sum_bs = 0.0;
    int wins_disc = 0, wins_bs = 0;
    for (int s = 0; s < spec.n_rank_seeds; ++s) {
        std::uint64_t seed = mix64(spec.env.master_seed ^ (0x52414e4bULL + s));
        RankRun run = ranking_quality_run(spec, env, seed);
        sum_lc += run.tau_last_click.mean_tau;
        sum_disc += run.tau_discounted.mean_tau;
        sum_bs += run.tau_baseline_sub.mean_tau;
        if (run.tau_discounted.mean_tau > run.tau_last_click.mean_tau) ++wins_disc;
        if (run.tau_baseline_sub.mean_tau > run.tau_last_click.mean_tau) ++wins_bs;
    }
    const int n = spec.n_rank_seeds;
    std::printf("mean tau vs oracle over %d seeds:\n", n);
    std::printf("  last_click          %.4f\n", sum_lc / n);
    std::printf("  discounted          %.4f  (> last_click in %d/%d seeds)\n", sum_disc / n,
                wins_disc, n);
    std::printf("  baseline_subtracted %.4f  (> last_click in %d/%d seeds)\n", sum_bs / n, wins_bs,
                n);

    MetricsReport report;
    report.taus = {{"last_click", sum_lc / n, n},
                   {"discounted", sum_disc / n, n},
                   {"baseline_subtracted", sum_bs / n, n}};
    std::filesystem::create_directories(spec.output_dir);
    std::ofstream out(spec.output_dir + "/rank.json", std::ios::binary);
    out << metrics_to_json(report);
    return 0;
}

int cmd_report(const GlobalArgs& args) {
    ExperimentSpec spec = load_spec(args);
    MetricsReport report = metrics_from_json_file(spec.output_dir + "/metrics.json");
    std::string rank_path = spec.output_dir + "/rank.json";
    if (std::filesystem::exists(rank_path)) {
        MetricsReport rank = metrics_from_json_file(rank_path);
        report.taus = rank.taus;
    }
    emit_report(report, spec.output_dir);
    std::cout << "wrote metrics.csv, metrics.json and charts to " << spec.output_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conversion-aware recommendation simulator"};
    app.require_subcommand(1);

    GlobalArgs args;
    app.add_option("--config", args.config_path, "experiment config (JSON)");
    std::uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "master seed override");
    std::string out;
    auto* out_opt = app.add_option("--out", out, "output directory override");
    int parallel = 0;
    auto* par_opt = app.add_option("--parallel", parallel, "worker threads");

    auto* sim = app.add_subcommand("simulate", "generate training logs");
    auto* train = app.add_subcommand("train", "train agents from logs");
    auto* abtest = app.add_subcommand("abtest", "evaluate trained agents online");
    auto* probe = app.add_subcommand("probe", "counterfactual incrementality probe");
    int probe_product = -1, probe_horizon = -1, probe_users = -1;
    probe->add_option("--product", probe_product, "forced-click product (default: auto)");
    probe->add_option("--horizon", probe_horizon, "steps per rollout");
    probe->add_option("--n-users", probe_users, "number of paired rollouts");
    auto* rank = app.add_subcommand("rank", "attribution ranking quality vs oracle");
    auto* report = app.add_subcommand("report", "emit CSV and SVG charts from metrics.json");

    CLI11_PARSE(app, argc, argv);

    if (*seed_opt) args.seed = seed;
    if (*out_opt) args.out = out;
    if (*par_opt) args.parallel = parallel;

    try {
        if (sim->parsed()) return cmd_simulate(args);
        if (train->parsed()) return cmd_train(args);
        if (abtest->parsed()) return cmd_abtest(args);
        if (probe->parsed()) return cmd_probe(args, probe_product, probe_horizon, probe_users);
        if (rank->parsed()) return cmd_rank(args);
        if (report->parsed()) return cmd_report(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

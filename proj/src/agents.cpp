#include "convsim/agents.hpp"

#include <stdexcept>

namespace convsim {

const char* agent_kind_name(AgentKind kind) {
    switch (kind) {
        case AgentKind::random_uniform: return "random";
        case AgentKind::popularity: return "popularity";
        case AgentKind::click_bandit: return "click_bandit";
        case AgentKind::last_click_sales: return "last_click_sales";
        case AgentKind::discounted_sales: return "discounted_sales";
        case AgentKind::baseline_subtracted_sales: return "baseline_subtracted_sales";
        case AgentKind::oracle_incremental: return "oracle_incremental";
    }
    return "?";
}

AgentKind agent_kind_from_name(const std::string& name) {
    if (name == "random") return AgentKind::random_uniform;
    if (name == "popularity") return AgentKind::popularity;
    if (name == "click_bandit") return AgentKind::click_bandit;
    if (name == "last_click_sales") return AgentKind::last_click_sales;
    if (name == "discounted_sales") return AgentKind::discounted_sales;
    if (name == "baseline_subtracted_sales") return AgentKind::baseline_subtracted_sales;
    if (name == "oracle_incremental") return AgentKind::oracle_incremental;
    throw std::invalid_argument("unknown agent kind: " + name);
}

void AgentSpec::validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("epsilon: must be in [0,1]");
    attribution.validate();
}

namespace {

AttributionConfig scheme_for(const AgentSpec& spec) {
    AttributionConfig config = spec.attribution;
    switch (spec.kind) {
        case AgentKind::last_click_sales: config.scheme = Scheme::last_click; break;
        case AgentKind::discounted_sales: config.scheme = Scheme::discounted_last_click; break;
        case AgentKind::baseline_subtracted_sales:
            config.scheme = Scheme::baseline_subtracted;
            break;
        default: break;
    }
    return config;
}

}  // namespace

Agent train_agent(const AgentSpec& spec, std::span<const Timeline> logs, int num_products) {
    spec.validate();
    Agent agent{spec, num_products, {}, {}};
    switch (spec.kind) {
        case AgentKind::random_uniform:
        case AgentKind::oracle_incremental: break;
        case AgentKind::popularity: {
            std::vector<double> counts(num_products, 0.0);
            double total = 0.0;
            for (const Timeline& timeline : logs)
                for (const Event& e : timeline.events)
                    if (e.kind == EventKind::organic) {
                        counts[e.product_id] += 1.0;
                        total += 1.0;
                    }
            if (total == 0.0) {
                counts.assign(num_products, 1.0 / num_products);
            } else {
                for (double& c : counts) c /= total;
            }
            agent.popularity = std::move(counts);
            break;
        }
        case AgentKind::click_bandit: {
            TrainingSet set = build_training_set(logs, spec.attribution, num_products);
            agent.model = train_logistic(set.click_examples, num_products,
                                         LabelEncoding::click_label, spec.hyper);
            break;
        }
        case AgentKind::last_click_sales:
        case AgentKind::discounted_sales:
        case AgentKind::baseline_subtracted_sales: {
            TrainingSet set = build_training_set(logs, scheme_for(spec), num_products);
            agent.model = train_logistic(set.sales_examples, num_products,
                                         LabelEncoding::sales_credit, spec.hyper);
            break;
        }
    }
    return agent;
}

namespace {

int argmax_lowest_id(std::span<const double> scores) {
    int best = 0;
    for (int a = 1; a < static_cast<int>(scores.size()); ++a)
        if (scores[a] > scores[best]) best = a;
    return best;
}

int sample_categorical(std::span<const double> probs, RngStream& rng) {
    double u = rng.uniform01();
    double acc = 0.0;
    for (int a = 0; a < static_cast<int>(probs.size()); ++a) {
        acc += probs[a];
        if (u < acc) return a;
    }
    return static_cast<int>(probs.size()) - 1;
}

}  // namespace

int act(const Agent& agent, const FeatureVector& features, RngStream& rng) {
    const int p = agent.num_products;
    if (agent.spec.epsilon > 0.0 && rng.bernoulli(agent.spec.epsilon)) return rng.uniform_int(p);
    switch (agent.spec.kind) {
        case AgentKind::random_uniform: return rng.uniform_int(p);
        case AgentKind::popularity: return sample_categorical(agent.popularity, rng);
        case AgentKind::oracle_incremental:
            throw std::logic_error("oracle agent needs simulator state; use make_policy");
        default: break;
    }
    std::vector<double> scores(p);
    for (int a = 0; a < p; ++a) scores[a] = dot(agent.model.weights.row(a), features);
    return argmax_lowest_id(scores);
}

double oracle_incremental_score(const ProductCatalog& catalog, const UserState& user,
                                const EnvConfig& config, int a) {
    UserState shifted = user;
    apply_click_update(shifted, catalog, a, config.kappa);
    double gain = 0.0;
    for (int b = 0; b < catalog.num_products(); ++b)
        gain += sale_prob(catalog, shifted, b, config) - sale_prob(catalog, user, b, config);
    return click_prob(catalog, user, a, config) * gain;
}

Policy make_policy(const Agent& agent) {
    return [agent](const SimContext& ctx) -> int {
        if (agent.spec.kind == AgentKind::oracle_incremental) {
            if (agent.spec.epsilon > 0.0 && ctx.policy_rng.bernoulli(agent.spec.epsilon))
                return ctx.policy_rng.uniform_int(ctx.num_products);
            std::vector<double> scores(ctx.num_products);
            for (int a = 0; a < ctx.num_products; ++a)
                scores[a] = oracle_incremental_score(ctx.catalog, ctx.user, ctx.config, a);
            int best = 0;
            for (int a = 1; a < ctx.num_products; ++a)
                if (scores[a] > scores[best]) best = a;
            return best;
        }
        FeatureVector features = featurize(ctx.history, ctx.num_products);
        return act(agent, features, ctx.policy_rng);
    };
}

}  // namespace convsim

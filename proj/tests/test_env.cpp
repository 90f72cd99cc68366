#include <cmath>
#include <vector>

#include "convsim/env.hpp"
#include "doctest.h"

using namespace convsim;

namespace {

EnvConfig small_config() {
    EnvConfig config;
    config.num_products = 3;
    config.embed_dim = 2;
    config.master_seed = 42;
    return config;
}

ProductCatalog catalog_from_rows(const std::vector<std::vector<double>>& organic,
                                 const std::vector<std::vector<double>>& click,
                                 const std::vector<std::vector<double>>& conversion) {
    int p = static_cast<int>(organic.size());
    int k = static_cast<int>(organic[0].size());
    ProductCatalog catalog{Matrix(p, k), Matrix(p, k), Matrix(p, k)};
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < k; ++j) {
            catalog.organic_embed.at(i, j) = organic[i][j];
            catalog.click_embed.at(i, j) = click[i][j];
            catalog.conversion_embed.at(i, j) = conversion[i][j];
        }
    return catalog;
}

UserState user_with(std::vector<double> omega, std::vector<double> delta) {
    UserState u;
    u.omega = std::move(omega);
    u.delta = std::move(delta);
    return u;
}

// Drives an episode with a scripted action sequence (cycled at bandit states).
Timeline run_scripted(const ProductCatalog& catalog, const EnvConfig& config,
                      std::uint64_t seed, int user_id, const std::vector<int>& actions) {
    EnvSim sim(catalog, config, seed, user_id);
    Timeline timeline{user_id, {}};
    std::size_t next = 0;
    while (!sim.done()) {
        std::optional<int> action;
        if (sim.state() == ChainState::bandit) {
            action = actions[next % actions.size()];
            ++next;
        }
        auto events = sim.step(action);
        timeline.events.insert(timeline.events.end(), events.begin(), events.end());
    }
    return timeline;
}

}  // namespace

TEST_CASE("sample_catalog shapes and rho extremes") {
    EnvConfig config = small_config();
    config.num_products = 5;
    config.embed_dim = 4;
    config.lambda_corr = 1.0;
    RngStream rng(7);
    ProductCatalog catalog = sample_catalog(config, rng);
    CHECK(catalog.organic_embed.rows() == 5);
    CHECK(catalog.organic_embed.cols() == 4);
    CHECK(catalog.click_embed.rows() == 5);
    CHECK(catalog.conversion_embed.cols() == 4);
    // rho = 1: conversion rows coincide with organic rows exactly
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(catalog.conversion_embed.at(i, j) == catalog.organic_embed.at(i, j));
}

TEST_CASE("sample_catalog rho=0 decorrelates conversion rows") {
    EnvConfig config;
    config.num_products = 2000;
    config.embed_dim = 8;
    config.lambda_corr = 0.0;
    RngStream rng(123);
    ProductCatalog catalog = sample_catalog(config, rng);

    // sample Pearson correlation over all entries
    const auto& g = catalog.organic_embed.data();
    const auto& l = catalog.conversion_embed.data();
    double n = static_cast<double>(g.size());
    double mg = 0.0, ml = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        mg += g[i];
        ml += l[i];
    }
    mg /= n;
    ml /= n;
    double cov = 0.0, vg = 0.0, vl = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        cov += (g[i] - mg) * (l[i] - ml);
        vg += (g[i] - mg) * (g[i] - mg);
        vl += (l[i] - ml) * (l[i] - ml);
    }
    double corr = cov / std::sqrt(vg * vl);
    CHECK(std::abs(corr) < 0.05);
}

TEST_CASE("init_user aligns delta with omega") {
    EnvConfig config = small_config();
    config.embed_dim = 3;
    RngStream rng(99);
    UserState user = init_user(config, rng);
    CHECK(user.omega.size() == 3);
    CHECK(user.delta == user.omega);
    CHECK(user.step == 0);
    CHECK(user.alive);

    RngStream again(99);
    UserState user2 = init_user(config, again);
    CHECK(user2.omega == user.omega);
}

TEST_CASE("organic_view_probs softmax") {
    UserState user = user_with({0.0}, {0.0});

    SUBCASE("identical rows give the uniform vector") {
        auto catalog = catalog_from_rows({{2.5}, {2.5}, {2.5}}, {{0}, {0}, {0}}, {{0}, {0}, {0}});
        user = user_with({1.7}, {1.7});
        auto probs = organic_view_probs(catalog, user);
        for (double p : probs) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("zero logits give a fair coin") {
        auto catalog = catalog_from_rows({{1.0}, {0.0}}, {{0}, {0}}, {{0}, {0}});
        auto probs = organic_view_probs(catalog, user);
        CHECK(probs[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(probs[1] == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("omega = ln 3 tilts a two-product catalog to 3:1") {
        auto catalog = catalog_from_rows({{1.0}, {0.0}}, {{0}, {0}}, {{0}, {0}});
        user = user_with({std::log(3.0)}, {std::log(3.0)});
        auto probs = organic_view_probs(catalog, user);
        CHECK(probs[0] == doctest::Approx(0.75).epsilon(1e-12));
        CHECK(probs[1] == doctest::Approx(0.25).epsilon(1e-12));
    }
}

TEST_CASE("organic_view_probs normalizes across random states") {
    EnvConfig config;
    config.num_products = 17;
    config.embed_dim = 6;
    RngStream rng(5);
    ProductCatalog catalog = sample_catalog(config, rng);
    for (int trial = 0; trial < 200; ++trial) {
        UserState user = init_user(config, rng);
        auto probs = organic_view_probs(catalog, user);
        double sum = 0.0;
        for (double p : probs) {
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
            sum += p;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("click_prob is a logistic of the click alignment") {
    auto catalog = catalog_from_rows({{0.0}, {0.0}}, {{1.0}, {0.0}}, {{0.0}, {0.0}});
    EnvConfig config = small_config();
    config.num_products = 2;
    config.embed_dim = 1;

    SUBCASE("zero logit, zero offset") {
        config.ctr_offset = 0.0;
        UserState user = user_with({0.0}, {0.0});
        CHECK(click_prob(catalog, user, 0, config) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("alignment 1, offset -3") {
        config.ctr_offset = -3.0;
        UserState user = user_with({1.0}, {1.0});
        double expected = 1.0 / (1.0 + std::exp(2.0));  // sigma(-2)
        CHECK(click_prob(catalog, user, 0, config) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(click_prob(catalog, user, 0, config) == doctest::Approx(0.1192029).epsilon(1e-6));
    }
    SUBCASE("deep negative offset saturates to zero") {
        config.ctr_offset = -50.0;
        UserState user = user_with({1.0}, {1.0});
        CHECK(click_prob(catalog, user, 0, config) < 1e-20);
    }
}

TEST_CASE("sale_prob is a scaled logistic of the conversion alignment") {
    auto catalog = catalog_from_rows({{0.0}, {0.0}}, {{0.0}, {0.0}}, {{1.0}, {0.0}});
    EnvConfig config = small_config();
    config.num_products = 2;
    config.embed_dim = 1;

    SUBCASE("zero alignment, unit scale") {
        config.sale_offset = 0.0;
        config.sale_scale = 1.0;
        UserState user = user_with({0.0}, {0.0});
        CHECK(sale_prob(catalog, user, 0, config) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("alignment 2, offset -4, scale 0.1") {
        config.sale_offset = -4.0;
        config.sale_scale = 0.1;
        UserState user = user_with({0.0}, {2.0});
        double expected = 0.1 / (1.0 + std::exp(2.0));  // 0.1 * sigma(-2)
        CHECK(sale_prob(catalog, user, 0, config) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(sale_prob(catalog, user, 0, config) == doctest::Approx(0.0119203).epsilon(1e-5));
    }
    SUBCASE("strictly increasing in the alignment") {
        config.sale_offset = -1.0;
        config.sale_scale = 0.3;
        double prev = -1.0;
        for (double x = -5.0; x <= 5.0; x += 0.25) {
            UserState user = user_with({0.0}, {x});
            double p = sale_prob(catalog, user, 0, config);
            CHECK(p > prev);
            CHECK(p >= 0.0);
            CHECK(p <= config.sale_scale);
            prev = p;
        }
    }
}

TEST_CASE("apply_click_update mixes delta toward the conversion row") {
    auto catalog = catalog_from_rows({{0, 0}, {0, 0}}, {{0, 0}, {0, 0}}, {{0.0, 1.0}, {2.0, -1.0}});

    SUBCASE("kappa 0 is a no-op") {
        UserState user = user_with({1.0, 0.0}, {1.0, 0.0});
        apply_click_update(user, catalog, 0, 0.0);
        CHECK(user.delta == std::vector<double>{1.0, 0.0});
    }
    SUBCASE("kappa 1 lands exactly on the row") {
        UserState user = user_with({1.0, 0.0}, {1.0, 0.0});
        apply_click_update(user, catalog, 1, 1.0);
        CHECK(user.delta == std::vector<double>{2.0, -1.0});
    }
    SUBCASE("kappa 0.5 is the midpoint") {
        UserState user = user_with({1.0, 0.0}, {1.0, 0.0});
        apply_click_update(user, catalog, 0, 0.5);
        CHECK(user.delta == std::vector<double>{0.5, 0.5});
        CHECK(user.omega == std::vector<double>{1.0, 0.0});
    }
    SUBCASE("kappa outside [0,1] is rejected") {
        UserState user = user_with({1.0, 0.0}, {1.0, 0.0});
        CHECK_THROWS_AS(apply_click_update(user, catalog, 0, 1.5), std::invalid_argument);
        CHECK_THROWS_AS(apply_click_update(user, catalog, 0, -0.1), std::invalid_argument);
    }
}

TEST_CASE("delta follows the closed form under repeated clicks") {
    EnvConfig config;
    config.num_products = 6;
    config.embed_dim = 4;
    config.kappa = 0.37;
    RngStream rng(2024);
    ProductCatalog catalog = sample_catalog(config, rng);

    for (int trial = 0; trial < 100; ++trial) {
        UserState user = init_user(config, rng);
        std::vector<double> omega = user.omega;
        int n_clicks = 1 + static_cast<int>(rng.next_u64() % 10);
        std::vector<int> clicks(n_clicks);
        for (int& a : clicks) a = rng.uniform_int(config.num_products);

        for (int a : clicks) apply_click_update(user, catalog, a, config.kappa);

        // (1-k)^n omega + k sum_i (1-k)^(n-i) Lambda_{a_i}
        double decay = std::pow(1.0 - config.kappa, n_clicks);
        for (int j = 0; j < config.embed_dim; ++j) {
            double expected = decay * omega[j];
            for (int i = 1; i <= n_clicks; ++i)
                expected += config.kappa * std::pow(1.0 - config.kappa, n_clicks - i) *
                            catalog.conversion_embed.at(clicks[i - 1], j);
            CHECK(user.delta[j] == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("one-step alignment identity") {
    EnvConfig config;
    config.num_products = 4;
    config.embed_dim = 3;
    config.kappa = 0.6;
    RngStream rng(11);
    ProductCatalog catalog = sample_catalog(config, rng);
    for (int trial = 0; trial < 50; ++trial) {
        UserState user = init_user(config, rng);
        int a = rng.uniform_int(config.num_products);
        auto lambda = catalog.conversion_embed.row(a);
        double before = dot(lambda, user.delta);
        double norm2 = dot(lambda, lambda);
        apply_click_update(user, catalog, a, config.kappa);
        double after = dot(lambda, user.delta);
        CHECK(after - before == doctest::Approx(config.kappa * (norm2 - before)).epsilon(1e-12));
        if (before < norm2) CHECK(after > before);
    }
}

TEST_CASE("step emits no conversions when sale_scale is zero") {
    EnvConfig config = small_config();
    config.sale_scale = 0.0;
    RngStream rng(3);
    ProductCatalog catalog = sample_catalog(config, rng);
    Timeline timeline = run_scripted(catalog, config, 77, 0, {0, 1, 2});
    for (const Event& e : timeline.events) CHECK(e.kind != EventKind::conversion);
    CHECK(!timeline.events.empty());
}

TEST_CASE("an unclicked recommendation leaves delta untouched") {
    EnvConfig config = small_config();
    config.ctr_offset = -80.0;  // clicks never happen
    RngStream rng(8);
    ProductCatalog catalog = sample_catalog(config, rng);
    EnvSim sim(catalog, config, 5, 0);
    std::vector<double> delta0 = sim.user().delta;
    int bandit_steps = 0;
    while (!sim.done() && bandit_steps < 5) {
        if (sim.state() == ChainState::bandit) {
            auto events = sim.step(1);
            ++bandit_steps;
            CHECK(!events.empty());
            CHECK(events[0].kind == EventKind::bandit);
            CHECK(!events[0].clicked);
        } else {
            sim.step(std::nullopt);
        }
        CHECK(sim.user().delta == delta0);
    }
    CHECK(sim.user().omega == delta0);
}

TEST_CASE("step requires an action exactly at bandit states") {
    EnvConfig config = small_config();
    config.event_chain.from_organic = ChainRow{0.0, 1.0, 0.0};  // jump to bandit immediately
    config.event_chain.from_bandit = ChainRow{0.0, 1.0, 0.0};
    RngStream rng(1);
    ProductCatalog catalog = sample_catalog(config, rng);
    EnvSim sim(catalog, config, 9, 0);
    CHECK(sim.state() == ChainState::organic);
    sim.step(std::nullopt);
    CHECK(sim.state() == ChainState::bandit);
    CHECK_THROWS_AS(sim.step(std::nullopt), std::logic_error);
    CHECK_NOTHROW(sim.step(0));
}

TEST_CASE("fixed seed and actions reproduce the event list") {
    EnvConfig config = small_config();
    RngStream rng(31);
    ProductCatalog catalog = sample_catalog(config, rng);
    Timeline a = run_scripted(catalog, config, 123, 4, {2, 0, 1});
    Timeline b = run_scripted(catalog, config, 123, 4, {2, 0, 1});
    CHECK(a == b);
    Timeline c = run_scripted(catalog, config, 124, 4, {2, 0, 1});
    CHECK(a != c);
}

TEST_CASE("kappa 0 makes conversions independent of the action sequence") {
    EnvConfig config = small_config();
    config.kappa = 0.0;
    config.ctr_offset = 2.0;  // clicks are frequent, so the update path is exercised
    RngStream rng(17);
    ProductCatalog catalog = sample_catalog(config, rng);
    for (int user = 0; user < 20; ++user) {
        Timeline a = run_scripted(catalog, config, 900, user, {0});
        Timeline b = run_scripted(catalog, config, 900, user, {2, 1});
        std::vector<Event> sales_a, sales_b;
        for (const Event& e : a.events)
            if (e.kind == EventKind::conversion) sales_a.push_back(e);
        for (const Event& e : b.events)
            if (e.kind == EventKind::conversion) sales_b.push_back(e);
        CHECK(sales_a == sales_b);
    }
}

TEST_CASE("simulate_episode boundary and contract cases") {
    EnvConfig config = small_config();
    RngStream rng(21);
    ProductCatalog catalog = sample_catalog(config, rng);

    SUBCASE("max_steps 0 gives an empty timeline") {
        config.max_steps = 0;
        Policy policy = [](const SimContext&) { return 0; };
        Timeline t = simulate_episode(catalog, config, policy, 1, 0);
        CHECK(t.events.empty());
        CHECK(t.num_steps() == 0);
    }
    SUBCASE("a constant policy shows up on every bandit event") {
        Policy policy = [](const SimContext&) { return 2; };
        Timeline t = simulate_episode(catalog, config, policy, 1, 0);
        for (const Event& e : t.events)
            if (e.kind == EventKind::bandit) CHECK(e.product_id == 2);
    }
}

TEST_CASE("clicks raise sales when kappa mixes toward a strong conversion row") {
    EnvConfig config;
    config.num_products = 3;
    config.embed_dim = 2;
    config.ctr_offset = 5.0;  // recommendations are essentially always clicked
    config.sale_offset = -4.0;
    config.sale_scale = 0.05;
    config.max_steps = 60;
    auto catalog = catalog_from_rows({{0.5, 0.0}, {0.0, 0.5}, {0.3, 0.3}},
                                     {{0, 0}, {0, 0}, {0, 0}},
                                     {{3.0, 0.0}, {0.0, 0.5}, {0.2, 0.2}});
    Policy policy = [](const SimContext&) { return 0; };

    auto total_sales = [&](double kappa) {
        EnvConfig c = config;
        c.kappa = kappa;
        double sales = 0.0;
        for (int user = 0; user < 1000; ++user) {
            Timeline t = simulate_episode(catalog, c, policy, 555, user);
            for (const Event& e : t.events)
                if (e.kind == EventKind::conversion) sales += 1.0;
        }
        return sales / 1000.0;
    };

    double with_update = total_sales(0.5);
    double frozen = total_sales(0.0);
    CHECK(with_update > frozen);
}

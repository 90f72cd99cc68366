#include "convsim/logio.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace convsim {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void append_record(std::string& out, const Timeline& timeline, const Event& e) {
    ordered_json j;
    j["schema_version"] = kLogSchemaVersion;
    j["t"] = e.t;
    j["user_id"] = timeline.user_id;
    j["kind"] = event_kind_name(e.kind);
    if (e.kind == EventKind::bandit) {
        j["recommended_id"] = e.product_id;
        j["clicked"] = e.clicked;
    } else {
        j["product_id"] = e.product_id;
    }
    out += j.dump();
    out += '\n';
}

[[noreturn]] void line_error(const std::string& origin, std::size_t line_no,
                             const std::string& what) {
    throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": " + what);
}

void expect_keys(const ordered_json& j, const std::set<std::string>& allowed,
                 const std::string& origin, std::size_t line_no) {
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) line_error(origin, line_no, "unknown field \"" + key + "\"");
}

}  // namespace

std::string log_to_string(std::span<const Timeline> corpus) {
    std::string out;
    for (const Timeline& timeline : corpus)
        for (const Event& e : timeline.events) append_record(out, timeline, e);
    return out;
}

std::vector<Timeline> log_from_string(const std::string& text, const std::string& origin) {
    static const std::set<std::string> organic_keys{"schema_version", "t", "user_id", "kind",
                                                    "product_id"};
    static const std::set<std::string> bandit_keys{"schema_version", "t",       "user_id",
                                                   "kind",           "recommended_id", "clicked"};

    std::vector<Timeline> corpus;
    long long current_user = -1;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            line_error(origin, line_no, std::string("malformed record: ") + e.what());
        }
        if (!j.is_object()) line_error(origin, line_no, "malformed record: not an object");
        if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
            line_error(origin, line_no, "missing schema_version");
        int version = j["schema_version"].get<int>();
        if (version != kLogSchemaVersion)
            line_error(origin, line_no,
                       "schema version mismatch: file has " + std::to_string(version) +
                           ", reader supports " + std::to_string(kLogSchemaVersion));
        for (const std::string key : {"t", "user_id", "kind"})
            if (!j.contains(key)) line_error(origin, line_no, "missing field \"" + key + "\"");

        Event e;
        e.t = j["t"].get<int>();
        int user_id = j["user_id"].get<int>();
        std::string kind = j["kind"].get<std::string>();
        if (kind == "organic" || kind == "conversion") {
            expect_keys(j, organic_keys, origin, line_no);
            if (!j.contains("product_id"))
                line_error(origin, line_no, "missing field \"product_id\"");
            e.kind = kind == "organic" ? EventKind::organic : EventKind::conversion;
            e.product_id = j["product_id"].get<int>();
        } else if (kind == "bandit") {
            expect_keys(j, bandit_keys, origin, line_no);
            for (const std::string key : {"recommended_id", "clicked"})
                if (!j.contains(key)) line_error(origin, line_no, "missing field \"" + key + "\"");
            e.kind = EventKind::bandit;
            e.product_id = j["recommended_id"].get<int>();
            e.clicked = j["clicked"].get<bool>();
        } else {
            line_error(origin, line_no, "unknown kind \"" + kind + "\"");
        }
        if (e.t < 0) line_error(origin, line_no, "negative step");
        if (e.product_id < 0) line_error(origin, line_no, "negative product id");

        if (user_id != current_user) {
            corpus.push_back(Timeline{user_id, {}});
            current_user = user_id;
        }
        if (!corpus.back().events.empty() && corpus.back().events.back().t > e.t)
            line_error(origin, line_no, "steps must be non-decreasing within a timeline");
        corpus.back().events.push_back(e);
    }
    return corpus;
}

void write_log(std::span<const Timeline> corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    std::string text = log_to_string(corpus);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error(path + ": write failed");
}

std::vector<Timeline> read_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open for reading");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return log_from_string(buffer.str(), path);
}

// ---------------------------------------------------------------------------
// configuration files

namespace {

// nlohmann keeps the last duplicate silently; a parser callback lets us reject
// duplicates with the key name instead.
ordered_json parse_json_strict(const std::string& text, const std::string& origin) {
    std::vector<std::set<std::string>> object_keys;
    std::string duplicate;
    auto callback = [&](int /*depth*/, ordered_json::parse_event_t event,
                        ordered_json& parsed) -> bool {
        switch (event) {
            case ordered_json::parse_event_t::object_start: object_keys.emplace_back(); break;
            case ordered_json::parse_event_t::object_end: object_keys.pop_back(); break;
            case ordered_json::parse_event_t::key: {
                auto key = parsed.get<std::string>();
                if (!object_keys.back().insert(key).second && duplicate.empty()) duplicate = key;
                break;
            }
            default: break;
        }
        return true;
    };
    ordered_json j;
    try {
        j = ordered_json::parse(text, callback);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(origin + ": " + e.what());
    }
    if (!duplicate.empty())
        throw std::runtime_error(origin + ": duplicate key \"" + duplicate + "\"");
    return j;
}

[[noreturn]] void key_error(const std::string& origin, const std::string& path,
                            const std::string& what) {
    throw std::runtime_error(origin + ": " + path + ": " + what);
}

class Section {
public:
    Section(const ordered_json& j, std::string path, const std::string& origin)
        : j_(j), path_(std::move(path)), origin_(origin) {
        if (!j_.is_object()) key_error(origin_, path_, "must be an object");
    }

    ~Section() = default;

    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key)) key_error(origin_, path_ + "." + key, "unknown key");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const ordered_json* get(const std::string& key) const {
        seen_.insert(key);
        if (!j_.contains(key)) return nullptr;
        return &j_.at(key);
    }

    template <typename T>
    void read(const std::string& key, T& out) const {
        const ordered_json* v = get(key);
        if (!v) return;
        try {
            out = v->get<T>();
        } catch (const nlohmann::json::exception&) {
            key_error(origin_, path_ + "." + key, "wrong type");
        }
    }

    const std::string& path() const { return path_; }
    const std::string& origin() const { return origin_; }
    const ordered_json& json() const { return j_; }

private:
    const ordered_json& j_;
    std::string path_;
    const std::string& origin_;
    mutable std::set<std::string> seen_;
};

ChainRow parse_chain_row(const ordered_json& j, const std::string& path,
                         const std::string& origin) {
    if (!j.is_array() || j.size() != 3) key_error(origin, path, "must be an array of 3 numbers");
    for (const auto& v : j)
        if (!v.is_number()) key_error(origin, path, "must be an array of 3 numbers");
    return ChainRow{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void parse_env(const Section& parent, EnvConfig& env) {
    const ordered_json* j = parent.get("env");
    if (!j) return;
    Section s(*j, parent.path() + ".env", parent.origin());
    s.read("num_products", env.num_products);
    s.read("embed_dim", env.embed_dim);
    s.read("kappa", env.kappa);
    s.read("ctr_offset", env.ctr_offset);
    s.read("sale_offset", env.sale_offset);
    s.read("sale_scale", env.sale_scale);
    s.read("lambda_corr", env.lambda_corr);
    s.read("max_steps", env.max_steps);
    s.read("master_seed", env.master_seed);
    if (const ordered_json* chain = s.get("event_chain")) {
        Section c(*chain, s.path() + ".event_chain", s.origin());
        if (const ordered_json* row = c.get("organic"))
            env.event_chain.from_organic =
                parse_chain_row(*row, c.path() + ".organic", c.origin());
        if (const ordered_json* row = c.get("bandit"))
            env.event_chain.from_bandit = parse_chain_row(*row, c.path() + ".bandit", c.origin());
        c.finish();
    }
    s.finish();
}

void parse_attribution_into(const Section& s, AttributionConfig& config) {
    if (const ordered_json* v = s.get("scheme")) {
        std::string name = v->get<std::string>();
        if (name == "last_click")
            config.scheme = Scheme::last_click;
        else if (name == "discounted")
            config.scheme = Scheme::discounted_last_click;
        else if (name == "baseline_subtracted")
            config.scheme = Scheme::baseline_subtracted;
        else
            key_error(s.origin(), s.path() + ".scheme", "unknown scheme \"" + name + "\"");
    }
    s.read("gamma", config.gamma);
    if (const ordered_json* v = s.get("window")) {
        if (v->is_string() && v->get<std::string>() == "unbounded")
            config.window.reset();
        else if (v->is_number_integer())
            config.window = v->get<int>();
        else
            key_error(s.origin(), s.path() + ".window", "must be an integer or \"unbounded\"");
    }
    s.read("match_product", config.match_product);
    s.read("baseline", config.baseline);
}

void parse_attribution(const Section& parent, AttributionConfig& config) {
    const ordered_json* j = parent.get("attribution");
    if (!j) return;
    Section s(*j, parent.path() + ".attribution", parent.origin());
    parse_attribution_into(s, config);
    s.finish();
}

void parse_hyper(const Section& parent, Hyper& hyper) {
    const ordered_json* j = parent.get("hyper");
    if (!j) return;
    Section s(*j, parent.path() + ".hyper", parent.origin());
    s.read("learning_rate", hyper.learning_rate);
    s.read("l2", hyper.l2);
    s.read("epochs", hyper.epochs);
    s.read("batch_size", hyper.batch_size);
    s.read("seed", hyper.seed);
    s.finish();
}

AgentSpec parse_agent(const ordered_json& j, const std::string& path, const std::string& origin,
                      const AttributionConfig& default_attribution) {
    Section s(j, path, origin);
    AgentSpec spec;
    spec.attribution = default_attribution;
    if (!s.has("kind")) key_error(origin, path + ".kind", "missing required key");
    std::string kind;
    s.read("kind", kind);
    try {
        spec.kind = agent_kind_from_name(kind);
    } catch (const std::invalid_argument& e) {
        key_error(origin, path + ".kind", e.what());
    }
    s.read("epsilon", spec.epsilon);
    if (const ordered_json* attr = s.get("attribution")) {
        Section a(*attr, path + ".attribution", origin);
        parse_attribution_into(a, spec.attribution);
        a.finish();
    }
    parse_hyper(s, spec.hyper);
    s.finish();
    return spec;
}

void parse_experiment(const Section& parent, ExperimentSpec& spec) {
    const ordered_json* j = parent.get("experiment");
    if (!j) return;
    Section s(*j, parent.path() + ".experiment", parent.origin());
    s.read("scenario", spec.scenario);
    s.read("n_train_users", spec.n_train_users);
    s.read("n_eval_users", spec.n_eval_users);
    s.read("n_bootstrap", spec.n_bootstrap);
    s.read("output_dir", spec.output_dir);
    s.read("train_seed", spec.train_seed);
    s.read("eval_seed", spec.eval_seed);
    s.read("estimate_baseline", spec.estimate_baseline);
    s.read("baseline_window", spec.baseline_window);
    s.read("n_rank_seeds", spec.n_rank_seeds);
    s.read("n_rank_users", spec.n_rank_users);
    s.read("n_contexts", spec.n_contexts);
    s.read("probe_horizon", spec.probe_horizon);
    s.read("probe_users", spec.probe_users);
    s.read("parallel", spec.parallel);
    s.finish();
}

}  // namespace

ExperimentSpec parse_config_text(const std::string& text, const std::string& origin) {
    ordered_json root = parse_json_strict(text, origin);
    Section top(root, "config", origin);

    ExperimentSpec spec;
    parse_env(top, spec.env);
    parse_attribution(top, spec.attribution);
    if (const ordered_json* j = top.get("logging_policy"))
        spec.logging_policy = parse_agent(*j, "config.logging_policy", origin, spec.attribution);
    if (const ordered_json* j = top.get("agents")) {
        if (!j->is_array()) key_error(origin, "config.agents", "must be an array");
        spec.agents.clear();
        for (std::size_t i = 0; i < j->size(); ++i)
            spec.agents.push_back(parse_agent((*j)[i], "config.agents[" + std::to_string(i) + "]",
                                              origin, spec.attribution));
    }
    parse_experiment(top, spec);
    top.finish();

    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(origin + ": " + e.what());
    }
    return spec;
}

ExperimentSpec parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open for reading");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path);
}

namespace {

const char* scheme_name(Scheme scheme) {
    switch (scheme) {
        case Scheme::last_click: return "last_click";
        case Scheme::discounted_last_click: return "discounted";
        case Scheme::baseline_subtracted: return "baseline_subtracted";
    }
    return "?";
}

ordered_json attribution_to_json(const AttributionConfig& config) {
    ordered_json j;
    j["scheme"] = scheme_name(config.scheme);
    j["gamma"] = config.gamma;
    if (config.window.has_value())
        j["window"] = *config.window;
    else
        j["window"] = "unbounded";
    j["match_product"] = config.match_product;
    j["baseline"] = config.baseline;
    return j;
}

ordered_json agent_to_json(const AgentSpec& spec) {
    ordered_json j;
    j["kind"] = agent_kind_name(spec.kind);
    j["epsilon"] = spec.epsilon;
    j["attribution"] = attribution_to_json(spec.attribution);
    j["hyper"] = {{"learning_rate", spec.hyper.learning_rate},
                  {"l2", spec.hyper.l2},
                  {"epochs", spec.hyper.epochs},
                  {"batch_size", spec.hyper.batch_size},
                  {"seed", spec.hyper.seed}};
    return j;
}

}  // namespace

std::string config_to_string(const ExperimentSpec& spec) {
    ordered_json j;
    j["env"] = {{"num_products", spec.env.num_products},
                {"embed_dim", spec.env.embed_dim},
                {"kappa", spec.env.kappa},
                {"ctr_offset", spec.env.ctr_offset},
                {"sale_offset", spec.env.sale_offset},
                {"sale_scale", spec.env.sale_scale},
                {"lambda_corr", spec.env.lambda_corr},
                {"event_chain",
                 {{"organic",
                   {spec.env.event_chain.from_organic.to_organic,
                    spec.env.event_chain.from_organic.to_bandit,
                    spec.env.event_chain.from_organic.to_stop}},
                  {"bandit",
                   {spec.env.event_chain.from_bandit.to_organic,
                    spec.env.event_chain.from_bandit.to_bandit,
                    spec.env.event_chain.from_bandit.to_stop}}}},
                {"max_steps", spec.env.max_steps},
                {"master_seed", spec.env.master_seed}};
    j["attribution"] = attribution_to_json(spec.attribution);
    j["logging_policy"] = agent_to_json(spec.logging_policy);
    j["agents"] = ordered_json::array();
    for (const AgentSpec& a : spec.agents) j["agents"].push_back(agent_to_json(a));
    j["experiment"] = {{"scenario", spec.scenario},
                       {"n_train_users", spec.n_train_users},
                       {"n_eval_users", spec.n_eval_users},
                       {"n_bootstrap", spec.n_bootstrap},
                       {"output_dir", spec.output_dir},
                       {"train_seed", spec.train_seed},
                       {"eval_seed", spec.eval_seed},
                       {"estimate_baseline", spec.estimate_baseline},
                       {"baseline_window", spec.baseline_window},
                       {"n_rank_seeds", spec.n_rank_seeds},
                       {"n_rank_users", spec.n_rank_users},
                       {"n_contexts", spec.n_contexts},
                       {"probe_horizon", spec.probe_horizon},
                       {"probe_users", spec.probe_users},
                       {"parallel", spec.parallel}};
    return j.dump(2) + "\n";
}

void save_matrix(const Matrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    std::string text = std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            if (c > 0) text += ' ';
            text += format_double(m.at(r, c));
        }
        text += '\n';
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error(path + ": write failed");
}

Matrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open for reading");
    int rows = 0, cols = 0;
    if (!(in >> rows >> cols) || rows < 0 || cols < 0)
        throw std::runtime_error(path + ": malformed shape header");
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            if (!(in >> m.at(r, c)))
                throw std::runtime_error(path + ": truncated matrix at row " + std::to_string(r));
    return m;
}

}  // namespace convsim

#include "convsim/report.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace convsim {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

// fixed decimals for SVG coordinates
std::string fmt2(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error(path + ": write failed");
}

struct Bar {
    std::string label;
    double value;
    double lo;
    double hi;
};

std::string bar_chart(const std::string& title, const std::vector<Bar>& bars, bool whiskers) {
    const double width = 640.0, height = 400.0;
    const double left = 60.0, right = 20.0, top = 40.0, bottom = 70.0;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double max_v = 1e-9;
    double min_v = 0.0;
    for (const Bar& b : bars) {
        max_v = std::max({max_v, b.value, b.hi});
        min_v = std::min({min_v, b.value, b.lo, 0.0});
    }
    double span = max_v - min_v;
    auto y_of = [&](double v) { return top + plot_h * (1.0 - (v - min_v) / span); };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt2(width) << "\" height=\""
        << fmt2(height) << "\" viewBox=\"0 0 " << fmt2(width) << " " << fmt2(height) << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << fmt2(width / 2) << "\" y=\"24\" font-family=\"sans-serif\" "
        << "font-size=\"16\" text-anchor=\"middle\">" << title << "</text>\n";

    double zero_y = y_of(0.0);
    svg << "<line x1=\"" << fmt2(left) << "\" y1=\"" << fmt2(zero_y) << "\" x2=\""
        << fmt2(width - right) << "\" y2=\"" << fmt2(zero_y)
        << "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";

    const double slot = plot_w / std::max<std::size_t>(1, bars.size());
    const double bar_w = slot * 0.6;
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const Bar& b = bars[i];
        double x = left + slot * i + (slot - bar_w) / 2.0;
        double y0 = y_of(std::max(0.0, b.value));
        double h = std::abs(y_of(b.value) - zero_y);
        svg << "<rect x=\"" << fmt2(x) << "\" y=\"" << fmt2(y0) << "\" width=\"" << fmt2(bar_w)
            << "\" height=\"" << fmt2(h) << "\" fill=\"#4878a8\"/>\n";
        if (whiskers) {
            double cx = x + bar_w / 2.0;
            svg << "<line x1=\"" << fmt2(cx) << "\" y1=\"" << fmt2(y_of(b.lo)) << "\" x2=\""
                << fmt2(cx) << "\" y2=\"" << fmt2(y_of(b.hi))
                << "\" stroke=\"#222222\" stroke-width=\"2\"/>\n";
            for (double v : {b.lo, b.hi})
                svg << "<line x1=\"" << fmt2(cx - 6) << "\" y1=\"" << fmt2(y_of(v)) << "\" x2=\""
                    << fmt2(cx + 6) << "\" y2=\"" << fmt2(y_of(v))
                    << "\" stroke=\"#222222\" stroke-width=\"2\"/>\n";
        }
        svg << "<text x=\"" << fmt2(x + bar_w / 2.0) << "\" y=\"" << fmt2(height - bottom + 16)
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\""
            << " transform=\"rotate(20 " << fmt2(x + bar_w / 2.0) << " "
            << fmt2(height - bottom + 16) << ")\">" << b.label << "</text>\n";
        svg << "<text x=\"" << fmt2(x + bar_w / 2.0) << "\" y=\"" << fmt2(y0 - 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
            << fmt(b.value) << "</text>\n";
    }
    svg << "<text x=\"16\" y=\"" << fmt2(top - 10)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(max_v) << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace

std::string metrics_to_csv(const MetricsReport& report) {
    std::string csv =
        "agent,clicks_per_user,ctr,sales_per_user,attributed_sales_per_user,"
        "sales_ci_lo,sales_ci_hi\n";
    for (const AgentMetrics& m : report.agents) {
        csv += m.name + ',' + fmt(m.clicks_per_user) + ',' + fmt(m.ctr) + ',' +
               fmt(m.sales_per_user) + ',' + fmt(m.attributed_sales_per_user) + ',' +
               fmt(m.sales_ci.lo) + ',' + fmt(m.sales_ci.hi) + '\n';
    }
    return csv;
}

std::string metrics_to_json(const MetricsReport& report) {
    ordered_json j;
    j["train_seed"] = report.train_seed;
    j["eval_seed"] = report.eval_seed;
    j["config_hash"] = report.config_hash;
    j["agents"] = ordered_json::array();
    for (const AgentMetrics& m : report.agents) {
        ordered_json a;
        a["name"] = m.name;
        a["clicks_per_user"] = m.clicks_per_user;
        a["ctr"] = m.ctr;
        a["sales_per_user"] = m.sales_per_user;
        a["attributed_sales_per_user"] = m.attributed_sales_per_user;
        a["sales_ci"] = {m.sales_ci.lo, m.sales_ci.hi};
        j["agents"].push_back(std::move(a));
    }
    j["paired_crn_diffs"] = ordered_json::array();
    for (const PairedDiff& d : report.paired) {
        ordered_json p;
        p["agent_a"] = d.agent_a;
        p["agent_b"] = d.agent_b;
        p["mean_diff"] = d.mean_diff;
        p["ci"] = {d.ci.lo, d.ci.hi};
        j["paired_crn_diffs"].push_back(std::move(p));
    }
    j["taus"] = ordered_json::array();
    for (const SchemeTau& t : report.taus) {
        ordered_json s;
        s["scheme"] = t.scheme;
        s["mean_tau"] = t.mean_tau;
        s["n_defined"] = t.n_defined;
        j["taus"].push_back(std::move(s));
    }
    return j.dump(2) + "\n";
}

MetricsReport metrics_from_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open for reading");
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    MetricsReport report;
    report.train_seed = j.value("train_seed", 0ULL);
    report.eval_seed = j.value("eval_seed", 0ULL);
    report.config_hash = j.value("config_hash", std::string());
    for (const auto& a : j.value("agents", ordered_json::array())) {
        AgentMetrics m;
        m.name = a.at("name").get<std::string>();
        m.clicks_per_user = a.at("clicks_per_user").get<double>();
        m.ctr = a.at("ctr").get<double>();
        m.sales_per_user = a.at("sales_per_user").get<double>();
        m.attributed_sales_per_user = a.at("attributed_sales_per_user").get<double>();
        m.sales_ci = {a.at("sales_ci")[0].get<double>(), a.at("sales_ci")[1].get<double>()};
        report.agents.push_back(std::move(m));
    }
    for (const auto& d : j.value("paired_crn_diffs", ordered_json::array())) {
        PairedDiff p;
        p.agent_a = d.at("agent_a").get<std::string>();
        p.agent_b = d.at("agent_b").get<std::string>();
        p.mean_diff = d.at("mean_diff").get<double>();
        p.ci = {d.at("ci")[0].get<double>(), d.at("ci")[1].get<double>()};
        report.paired.push_back(std::move(p));
    }
    for (const auto& t : j.value("taus", ordered_json::array())) {
        report.taus.push_back(
            {t.at("scheme").get<std::string>(), t.at("mean_tau").get<double>(),
             t.at("n_defined").get<int>()});
    }
    return report;
}

std::string sales_chart_svg(const MetricsReport& report) {
    std::vector<Bar> bars;
    for (const AgentMetrics& m : report.agents)
        bars.push_back({m.name, m.sales_per_user, m.sales_ci.lo, m.sales_ci.hi});
    return bar_chart("sales per user (95% bootstrap CI)", bars, /*whiskers=*/true);
}

std::string tau_chart_svg(const MetricsReport& report) {
    std::vector<Bar> bars;
    for (const SchemeTau& t : report.taus) bars.push_back({t.scheme, t.mean_tau, 0.0, 0.0});
    return bar_chart("mean Kendall tau vs oracle ranking", bars, /*whiskers=*/false);
}

void emit_report(const MetricsReport& report, const std::string& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir + "/metrics.csv", metrics_to_csv(report));
    write_file(dir + "/metrics.json", metrics_to_json(report));
    write_file(dir + "/sales_per_user.svg", sales_chart_svg(report));
    if (!report.taus.empty()) write_file(dir + "/tau_per_scheme.svg", tau_chart_svg(report));
}

}  // namespace convsim

#include "levyglass/report.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace levyglass {

bool ExperimentReport::all_pass() const {
    for (const ReportRow& row : rows)
        if (!row.pass) return false;
    return true;
}

std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
    return std::string(buf, ptr);
}

void write_csv(const ExperimentReport& report, std::ostream& out) {
    out << "experiment,N,alpha,c0,epsilon,beta,samples,seed,quantity,estimate,stderr,"
           "comparator,margin,pass\n";
    for (const ReportRow& row : report.rows) {
        out << report.name << ',' << row.n << ',' << format_double(report.config.alpha) << ','
            << format_double(report.config.c0) << ',' << format_double(report.config.epsilon)
            << ',' << format_double(report.config.beta) << ',' << report.config.samples << ','
            << report.seed << ',' << row.quantity << ',' << format_double(row.estimate) << ','
            << format_double(row.stderr_) << ',' << format_double(row.comparator) << ','
            << format_double(row.margin) << ',' << (row.pass ? "true" : "false") << '\n';
    }
}

void write_json(const ExperimentReport& report, std::ostream& out) {
    nlohmann::ordered_json j;
    j["experiment"] = report.name;
    j["config"] = {{"alpha", report.config.alpha},
                   {"c0", report.config.c0},
                   {"epsilon", report.config.epsilon},
                   {"beta", report.config.beta},
                   {"samples", report.config.samples}};
    j["seed"] = report.seed;
    j["rows"] = nlohmann::ordered_json::array();
    for (const ReportRow& row : report.rows) {
        j["rows"].push_back({{"quantity", row.quantity},
                             {"N", row.n},
                             {"estimate", row.estimate},
                             {"stderr", row.stderr_},
                             {"comparator", row.comparator},
                             {"margin", row.margin},
                             {"pass", row.pass}});
    }
    j["wall_time_s"] = report.wall_time_s;
    out << j.dump(2) << "\n";
}

ExperimentReport read_json(std::istream& in) {
    nlohmann::json j = nlohmann::json::parse(in);
    ExperimentReport report;
    report.name = j.at("experiment").get<std::string>();
    const auto& cfg = j.at("config");
    report.config.alpha = cfg.at("alpha").get<double>();
    report.config.c0 = cfg.at("c0").get<double>();
    report.config.epsilon = cfg.at("epsilon").get<double>();
    report.config.beta = cfg.at("beta").get<double>();
    report.config.samples = cfg.at("samples").get<std::size_t>();
    report.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& row : j.at("rows")) {
        ReportRow r;
        r.quantity = row.at("quantity").get<std::string>();
        r.n = row.at("N").get<int>();
        r.estimate = row.at("estimate").get<double>();
        r.stderr_ = row.at("stderr").get<double>();
        r.comparator = row.at("comparator").get<double>();
        r.margin = row.at("margin").get<double>();
        r.pass = row.at("pass").get<bool>();
        report.rows.push_back(std::move(r));
    }
    report.wall_time_s = j.at("wall_time_s").get<double>();
    return report;
}

bool operator==(const ReportRow& a, const ReportRow& b) {
    return a.quantity == b.quantity && a.n == b.n && a.estimate == b.estimate &&
           a.stderr_ == b.stderr_ && a.comparator == b.comparator && a.margin == b.margin &&
           a.pass == b.pass;
}

bool operator==(const ReportConfigEcho& a, const ReportConfigEcho& b) {
    return a.alpha == b.alpha && a.c0 == b.c0 && a.epsilon == b.epsilon && a.beta == b.beta &&
           a.samples == b.samples;
}

bool same_results(const ExperimentReport& a, const ExperimentReport& b) {
    return a.name == b.name && a.config == b.config && a.seed == b.seed && a.rows == b.rows;
}

}  // namespace levyglass

#ifndef LEVYGLASS_REPORT_HPP
#define LEVYGLASS_REPORT_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace levyglass {

// One checked quantity. `pass` is always the predicate margin >= 0, so the
// flag can be recomputed from the recorded numbers; report-only rows carry
// margin = 0.
struct ReportRow {
    std::string quantity;
    int n = 0;
    double estimate = 0.0;
    double stderr_ = 0.0;
    double comparator = 0.0;
    double margin = 0.0;
    bool pass = true;
};

struct ReportConfigEcho {
    double alpha = 0.0;
    double c0 = 0.0;
    double epsilon = 0.0;
    double beta = 0.0;
    std::size_t samples = 0;
};

struct ExperimentReport {
    std::string name;
    ReportConfigEcho config;
    std::uint64_t seed = 0;
    std::vector<ReportRow> rows;
    double wall_time_s = 0.0;

    bool all_pass() const;
};

// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

// CSV schema:
// experiment,N,alpha,c0,epsilon,beta,samples,seed,quantity,estimate,stderr,comparator,margin,pass
void write_csv(const ExperimentReport& report, std::ostream& out);

// JSON mirror of the report structure (includes wall time, which the CSV
// deliberately omits so identical runs emit identical bytes).
void write_json(const ExperimentReport& report, std::ostream& out);
ExperimentReport read_json(std::istream& in);

bool operator==(const ReportRow& a, const ReportRow& b);
bool operator==(const ReportConfigEcho& a, const ReportConfigEcho& b);

// Equality over everything except wall time; the parse-back oracle for emit.
bool same_results(const ExperimentReport& a, const ExperimentReport& b);

}  // namespace levyglass

#endif

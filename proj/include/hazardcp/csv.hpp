#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hazardcp/errors.hpp"
#include "hazardcp/filter.hpp"
#include "hazardcp/model.hpp"

namespace hazardcp {

// All numeric output uses 17 significant digits so files round-trip doubles
// exactly and identical configs give byte-identical files.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

inline void write_scenario_csv(std::ostream& out, const ScenarioPath& s,
                               std::span<const std::string> extra_header = {}) {
    for (const auto& line : extra_header) out << line << "\n";
    out << "# xi=" << fmt17(s.xi) << "\n";
    out << "# theta=" << fmt17(s.theta) << "\n";
    out << "# tau=" << fmt17(s.tau) << "\n";
    out << "# seed=" << s.seed << "\n";
    out << "t,B,Y,H,mu\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << fmt17(s.grid[i]) << ',' << fmt17(s.brownian[i]) << ',' << fmt17(s.y_obs[i]) << ','
            << int(s.h_ind[i]) << ',' << fmt17(s.mu_path[i]) << "\n";
    }
}

// Missing columns (an uncomputed observation-only filter, say) print as nan.
inline void write_filter_csv(std::ostream& out, const ScenarioPath& s, const FilterPath& f,
                             std::span<const std::string> extra_header = {}) {
    for (const auto& line : extra_header) out << line << "\n";
    out << "# xi=" << fmt17(s.xi) << "\n";
    out << "# theta=" << fmt17(s.theta) << "\n";
    out << "# tau=" << fmt17(s.tau) << "\n";
    out << "# seed=" << s.seed << "\n";
    out << "t,pi_g,pi_f,mu_hat_g,mu_hat_f\n";
    const auto at = [](const std::vector<double>& v, std::size_t i) {
        return i < v.size() ? v[i] : std::nan("");
    };
    for (std::size_t i = 0; i < f.grid.size(); ++i) {
        out << fmt17(f.grid[i]) << ',' << fmt17(at(f.pi_g, i)) << ',' << fmt17(at(f.pi_f, i)) << ','
            << fmt17(at(f.mu_hat_g, i)) << ',' << fmt17(at(f.mu_hat_f, i)) << "\n";
    }
}

struct ResultRow {
    std::string label;
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double comparator = 0.0;
    bool pass = false;
};

inline void write_result_header(std::ostream& out) {
    out << "label,estimate,std_error,n,seed,comparator,pass\n";
}

inline void write_result_row(std::ostream& out, const ResultRow& r) {
    out << r.label << ',' << fmt17(r.estimate) << ',' << fmt17(r.std_error) << ',' << r.n << ','
        << r.seed << ',' << fmt17(r.comparator) << ',' << (r.pass ? 1 : 0) << "\n";
}

inline void append_result_row(const std::string& path, const ResultRow& r) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw IoError("cannot open for appending: " + path);
    write_result_row(out, r);
}

}  // namespace hazardcp

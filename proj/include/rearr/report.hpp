#pragma once

// Verdict records for inequality checks and comparisons, and their CSV rows.
//
// Margins are oriented so that a positive margin means the claim holds:
// rhs - lhs for "lhs <= rhs" claims and lhs - rhs for "lhs >= rhs" claims.
// A check passes iff margin >= -tolerance.

#include "rearr/grid.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace rearr {

enum class Claim { le, ge };

struct VerificationReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    bool hypothesis_ok = true; // false when the theorem's hypothesis is not met
    std::string note;
    double h = 0.0;
    std::uint64_t seed = 0;
    std::string case_id;
    std::vector<VerificationReport> parts;
};

inline VerificationReport make_report(std::string name, double lhs, double rhs, Claim claim, double tolerance)
{
    VerificationReport r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.margin = claim == Claim::le ? rhs - lhs : lhs - rhs;
    r.tolerance = tolerance;
    r.pass = r.margin >= -tolerance;
    return r;
}

enum class ComparisonKind { steiner_concentration, pointwise, gradient, dual };

inline const char* to_string(ComparisonKind k)
{
    switch (k) {
    case ComparisonKind::steiner_concentration: return "steiner-concentration";
    case ComparisonKind::pointwise: return "pointwise";
    case ComparisonKind::gradient: return "gradient";
    case ComparisonKind::dual: return "dual";
    }
    return "?";
}

struct ComparisonSample {
    std::string param;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
};

struct ComparisonReport {
    ComparisonKind kind = ComparisonKind::pointwise;
    std::vector<ComparisonSample> samples;
    double worst_margin = std::numeric_limits<double>::infinity();
    std::string worst_param;
    double tolerance = 0.0;
    bool pass = true;
    std::string note;

    /// Adds a sample for the claim lhs <= rhs.
    void add(std::string param, double lhs, double rhs)
    {
        const double m = rhs - lhs;
        if (m < worst_margin) worst_margin = m, worst_param = param;
        samples.push_back({std::move(param), lhs, rhs, m});
    }

    void finish(double tol)
    {
        tolerance = tol;
        if (samples.empty()) worst_margin = 0.0;
        pass = worst_margin >= -tolerance;
    }
};

// ---- CSV ------------------------------------------------------------------

inline const char* verdict(const VerificationReport& r) { return r.pass ? "true" : "false"; }

/// Row `name,lhs,rhs,margin,tolerance,pass,h,seed,case`.
inline void write_report_row(std::ostream& os, const VerificationReport& r)
{
    os << r.name << ',' << format_real(r.lhs) << ',' << format_real(r.rhs) << ',' << format_real(r.margin) << ','
       << format_real(r.tolerance) << ',' << verdict(r) << ',' << format_real(r.h) << ',' << r.seed << ','
       << r.case_id << '\n';
}

inline void write_report_csv(std::ostream& os, const std::vector<VerificationReport>& reports)
{
    os << "name,lhs,rhs,margin,tolerance,pass,h,seed,case\n";
    for (const auto& r : reports) {
        write_report_row(os, r);
        for (const auto& p : r.parts) write_report_row(os, p);
    }
}

/// Rows `kind,param,lhs,rhs,margin,pass`, then a `summary,...` line.
inline void write_comparison_csv(std::ostream& os, const ComparisonReport& c)
{
    os << "kind,param,lhs,rhs,margin,pass\n";
    for (const auto& s : c.samples)
        os << to_string(c.kind) << ',' << s.param << ',' << format_real(s.lhs) << ',' << format_real(s.rhs) << ','
           << format_real(s.margin) << ',' << (s.margin >= -c.tolerance ? "true" : "false") << '\n';
    os << "summary," << c.worst_param << ",worst_margin=" << format_real(c.worst_margin)
       << ",tolerance=" << format_real(c.tolerance) << ',' << c.samples.size() << ','
       << (c.pass ? "true" : "false") << '\n';
}

} // namespace rearr

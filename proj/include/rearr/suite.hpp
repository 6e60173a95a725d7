#pragma once

// Suite configs, per-case check execution, and report files.
//
// Config format: `key = value` lines, `#` comments, and `[case]` headers.
// Keys before the first header are global (c1, c2, c3). Case keys: id,
// shape, h, split, function, w_function, W, p, seed, checks, kernel_radius.

#include "rearr/comparison.hpp"
#include "rearr/fixtures.hpp"
#include "rearr/inequalities.hpp"
#include "rearr/poisson.hpp"
#include "rearr/radial.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace rearr {

inline const std::vector<std::string>& check_kinds()
{
    static const std::vector<std::string> k{"hl",          "riesz",           "ps",       "nonlinear-ps", "weak-form",
                                            "talenti-steiner", "talenti-schwarz", "gradient", "dual"};
    return k;
}

struct CaseConfig {
    std::string id;
    std::string shape;
    double h = 0.0;
    std::string split = "none";
    std::string function = "cone";
    std::string w_function;
    std::string W = "ustar";
    double p = 2.0;
    std::uint64_t seed = 0;
    std::vector<std::string> checks;
    double kernel_radius = 0.25;
};

struct SuiteConfig {
    std::vector<CaseConfig> cases;
    double c1 = 8.0;
    double c2 = 8.0;
    double c3 = 1.0;
};

struct ConfigError : Error {
    ConfigError(int line, int column, const std::string& msg)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg)
    {
    }
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

/// Real number or fraction "a/b".
inline double parse_real(const std::string& s)
{
    const auto slash = s.find('/');
    if (slash == std::string::npos) return number(s, "value");
    return number(trim(s.substr(0, slash)), "value") / number(trim(s.substr(slash + 1)), "value");
}

} // namespace detail

inline SuiteConfig parse_config(std::istream& is)
{
    SuiteConfig cfg;
    std::string raw;
    int line = 0;
    CaseConfig* cur = nullptr;
    std::set<std::string> seen_keys;
    std::vector<int> case_lines;

    auto finish_case = [&](int at) {
        if (!cur) return;
        for (const char* k : {"id", "shape", "h", "seed"})
            if (!seen_keys.count(k)) throw ConfigError(at, 1, std::string("case is missing '") + k + "'");
    };

    while (std::getline(is, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        const int col = static_cast<int>(raw.find_first_not_of(" \t")) + 1;
        if (text == "[case]") {
            finish_case(line);
            cfg.cases.emplace_back();
            cur = &cfg.cases.back();
            seen_keys.clear();
            case_lines.push_back(line);
            continue;
        }
        if (text.front() == '[') throw ConfigError(line, col, "unknown section '" + text + "'");
        const auto eq = raw.find('=');
        if (eq == std::string::npos || (hash != std::string::npos && eq > hash))
            throw ConfigError(line, col, "expected 'key = value'");
        const std::string key = detail::trim(raw.substr(0, eq));
        const std::string value = detail::trim(text.substr(text.find('=') + 1));
        const int vcol = static_cast<int>(raw.find_first_not_of(" \t", eq + 1)) + 1;
        if (value.empty()) throw ConfigError(line, vcol, "empty value for '" + key + "'");
        try {
            if (!cur) {
                if (key == "c1") cfg.c1 = detail::parse_real(value);
                else if (key == "c2") cfg.c2 = detail::parse_real(value);
                else if (key == "c3") cfg.c3 = detail::parse_real(value);
                else throw ConfigError(line, col, "unknown global key '" + key + "'");
                continue;
            }
            if (!seen_keys.insert(key).second) throw ConfigError(line, col, "duplicate key '" + key + "'");
            if (key == "id") cur->id = value;
            else if (key == "shape") {
                parse_shape(value);
                cur->shape = value;
            } else if (key == "h") {
                cur->h = detail::parse_real(value);
                if (!(cur->h > 0.0)) throw ConfigError(line, vcol, "h must be positive");
            } else if (key == "split") {
                parse_split(value);
                cur->split = value;
            } else if (key == "function") cur->function = value;
            else if (key == "w_function") cur->w_function = value;
            else if (key == "W") {
                parse_w_map(value);
                cur->W = value;
            } else if (key == "p") cur->p = detail::parse_real(value);
            else if (key == "seed") {
                std::size_t used = 0;
                const auto s = std::stoull(value, &used);
                if (used != value.size()) throw ConfigError(line, vcol, "bad seed");
                cur->seed = s;
            } else if (key == "checks") {
                cur->checks = detail::tokens(value);
                for (const auto& c : cur->checks)
                    if (std::find(check_kinds().begin(), check_kinds().end(), c) == check_kinds().end())
                        throw ConfigError(line, vcol, "unknown check '" + c + "'");
            } else if (key == "kernel_radius") cur->kernel_radius = detail::parse_real(value);
            else throw ConfigError(line, col, "unknown key '" + key + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(line, vcol, e.what());
        }
    }
    finish_case(line);
    std::set<std::string> ids;
    for (std::size_t k = 0; k < cfg.cases.size(); ++k)
        if (!ids.insert(cfg.cases[k].id).second)
            throw ConfigError(case_lines[k], 1, "duplicate case id '" + cfg.cases[k].id + "'");
    return cfg;
}

// ---- execution ------------------------------------------------------------

/// One CSV row. `status` is "true", "false" or "skipped".
struct ReportRow {
    std::string kind;
    std::string name;
    std::string case_id;
    double h = 0.0;
    double lhs = 0.0, rhs = 0.0, margin = 0.0, tolerance = 0.0;
    std::string status = "true";
    bool hypothesis_ok = true;
    std::string note;
};

struct DetailFile {
    std::string name;
    std::string content;
};

struct CaseResult {
    std::string id;
    std::vector<ReportRow> rows;
    std::vector<DetailFile> details;
    std::vector<std::string> errors;
    double seconds = 0.0;
};

namespace detail {

inline ReportRow row_from(const std::string& kind, const std::string& id, const VerificationReport& r)
{
    ReportRow row{kind, r.name, id, r.h, r.lhs, r.rhs, r.margin, r.tolerance, r.pass ? "true" : "false",
                  r.hypothesis_ok, r.note};
    return row;
}

inline ReportRow row_from(const std::string& kind, const std::string& name, const std::string& id, double h,
                          const ComparisonReport& c)
{
    ReportRow row;
    row.kind = kind;
    row.name = name;
    row.case_id = id;
    row.h = h;
    auto it = std::find_if(c.samples.begin(), c.samples.end(),
                           [&](const ComparisonSample& s) { return s.param == c.worst_param; });
    if (it != c.samples.end()) row.lhs = it->lhs, row.rhs = it->rhs;
    row.margin = c.worst_margin;
    row.tolerance = c.tolerance;
    row.status = c.pass ? "true" : "false";
    row.note = c.note;
    return row;
}

inline ReportRow skipped(const std::string& kind, const std::string& id, double h, std::string why)
{
    ReportRow row;
    row.kind = row.name = kind;
    row.case_id = id;
    row.h = h;
    row.status = "skipped";
    row.note = std::move(why);
    return row;
}

inline std::string comparison_text(const ComparisonReport& c)
{
    std::ostringstream os;
    write_comparison_csv(os, c);
    return os.str();
}

/// Grid kernel (1 - |x| / rho)_+ on a centred grid with a cell at the origin.
inline GridFunction riesz_kernel(int dim, double h, double rho)
{
    const int half = static_cast<int>(std::ceil(rho / h));
    const int N = 2 * half + 1;
    const double org = -(half + 0.5) * h;
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(N) * (dim == 2 ? N : 1), 1);
    auto g = std::make_shared<const MaskedGrid>(dim, h, std::array<double, 2>{org, dim == 2 ? org : 0.0},
                                                std::array<int, 2>{N, dim == 2 ? N : 1}, std::move(mask));
    return GridFunction::sample(g, [&](Point p) { return std::max(0.0, 1.0 - std::hypot(p.x, p.y) / rho); });
}

} // namespace detail

/// Runs every check of a case. Inapplicable checks become skipped rows;
/// any other failure is recorded as an error.
inline CaseResult run_case(const CaseConfig& cc, const SuiteConfig& cfg)
{
    const auto t0 = std::chrono::steady_clock::now();
    CaseResult res;
    res.id = cc.id;
    const double h = cc.h;
    CheckOptions opt;
    opt.c1 = cfg.c1;
    try {
        const auto shape = parse_shape(cc.shape);
        const auto grid = grid_for(shape, h, parse_split(cc.split));
        const auto u = gen_fixture(cc.function, grid, cc.seed);
        const auto ustar = decreasing_rearrangement(u);
        const auto g = parse_w_map(cc.W);
        const auto W = ustar.map(g);
        const auto w = cc.w_function.empty() ? extremal_for(u, W) : gen_fixture(cc.w_function, grid, cc.seed + 1);

        // Poisson pipeline shared by the comparison checks: u as the datum f.
        std::optional<GridFunction> sol;
        auto solution = [&]() -> const GridFunction& {
            if (!sol) sol = solve_poisson(u).u;
            return *sol;
        };

        for (const auto& kind : cc.checks) {
            try {
                if (kind == "hl") {
                    res.rows.push_back(detail::row_from(kind, cc.id, hardy_littlewood_check(u, w, opt)));
                } else if (kind == "riesz") {
                    const auto k = detail::riesz_kernel(grid->dim(), h, cc.kernel_radius);
                    if (u.size() + w.size() + k.size() > 4096) {
                        res.rows.push_back(detail::skipped(kind, cc.id, h, "instance too large for direct Riesz"));
                        continue;
                    }
                    res.rows.push_back(detail::row_from(kind, cc.id, riesz_check(u, w, k)));
                } else if (kind == "ps" || kind == "weak-form") {
                    VerificationReport r;
                    if (kind == "ps") r = ps_couple_check(u, w, opt);
                    else r = weak_form_check(u, symmetrize(w, natural_layout(grid)), opt);
                    res.rows.push_back(detail::row_from(kind, cc.id, r));
                    for (const auto& part : r.parts) res.rows.push_back(detail::row_from(kind, cc.id, part));
                } else if (kind == "nonlinear-ps") {
                    res.rows.push_back(detail::row_from(kind, cc.id, nonlinear_ps_check(u, W, cc.p, opt)));
                } else if (kind == "talenti-schwarz" || kind == "gradient") {
                    if (cc.p != 2.0) {
                        res.rows.push_back(detail::skipped(kind, cc.id, h, "masked solves exist for p = 2 only"));
                        continue;
                    }
                    const auto& us = solution();
                    const int n = grid->dim();
                    const auto prof = radial_profile(decreasing_rearrangement(us), n, 1024);
                    const auto v = solve_radial_poisson(ustar, n, ball_radius(grid->measure(), n), 1024);
                    const double tol = cfg.c3 * h * u.max();
                    ComparisonReport c = kind == "talenti-schwarz" ? pointwise_compare(prof, v.v, tol)
                                                                   : gradient_compare(prof, v, 2.0 * h, tol);
                    res.rows.push_back(detail::row_from(kind, kind, cc.id, h, c));
                    res.details.push_back({cc.id + "_" + kind + ".csv", detail::comparison_text(c)});
                    if (kind == "talenti-schwarz") {
                        std::ostringstream os;
                        os << "r,ustar,v\n";
                        for (std::size_t i = 0; i < v.v.size(); ++i)
                            os << format_real(v.v.r(i)) << ',' << format_real(prof.at(v.v.r(i))) << ','
                               << format_real(v.v.values[i]) << '\n';
                        res.details.push_back({cc.id + "_profiles.csv", os.str()});
                    }
                } else if (kind == "talenti-steiner" || kind == "dual") {
                    const bool rows = grid->split() && grid->split()->m > 0;
                    if (kind == "talenti-steiner" && !rows) {
                        res.rows.push_back(detail::skipped(kind, cc.id, h, "no codimension split"));
                        continue;
                    }
                    const auto lay = natural_layout(grid);
                    const auto fs = symmetrize(u, lay);
                    const auto v = solve_poisson(fs).u;
                    const auto& us = solution();
                    if (kind == "talenti-steiner") {
                        const auto c = steiner_concentration_compare(us, v, cfg.c2);
                        res.rows.push_back(detail::row_from(kind, kind, cc.id, h, c));
                        res.details.push_back({cc.id + "_" + kind + ".csv", detail::comparison_text(c)});
                    } else {
                        double meas = 0.0;
                        for (const auto& s : lay.slices) meas = std::max(meas, s.source.size() * lay.slice_cell);
                        const auto d = dual_test_function_check(us, v, 64, cc.seed, cfg.c2 * h * meas);
                        res.rows.push_back(detail::row_from(kind, "dual-direct", cc.id, h, d.direct));
                        res.rows.push_back(detail::row_from(kind, "dual-tests", cc.id, h, d.tests));
                        ReportRow agree = res.rows.back();
                        agree.name = "dual-agree";
                        agree.lhs = d.tests.worst_margin;
                        agree.rhs = d.direct.worst_margin;
                        agree.margin = 0.0;
                        agree.status = d.agree() ? "true" : "false";
                        res.rows.push_back(agree);
                        res.details.push_back({cc.id + "_dual.csv", detail::comparison_text(d.tests) +
                                                                         detail::comparison_text(d.direct)});
                    }
                }
            } catch (const Error& e) {
                // a theorem hypothesis that does not hold makes the check inapplicable
                static const std::set<std::string> inapplicable{"Lemma hypothesis violated",
                                                                "extremal not Sobolev-regular"};
                res.rows.push_back(detail::skipped(kind, cc.id, h, e.what()));
                if (!inapplicable.count(e.what())) res.errors.push_back(kind + ": " + e.what());
            }
        }
    } catch (const Error& e) {
        res.errors.push_back(std::string("case setup: ") + e.what());
        for (const auto& kind : cc.checks) res.rows.push_back(detail::skipped(kind, cc.id, h, e.what()));
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

/// Runs all cases on up to `jobs` threads; results are ordered by case id.
inline std::vector<CaseResult> run_cases(const SuiteConfig& cfg, int jobs)
{
    std::vector<CaseResult> out(cfg.cases.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < cfg.cases.size();) out[k] = run_case(cfg.cases[k], cfg);
    };
    const int n = std::max(1, std::min<int>(jobs, static_cast<int>(cfg.cases.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    std::sort(out.begin(), out.end(), [](const CaseResult& a, const CaseResult& b) { return a.id < b.id; });
    return out;
}

// ---- reports --------------------------------------------------------------

struct EmitOptions {
    bool strict = false;
    bool timing = true;
};

/// 0 if everything passed, 1 if an inequality check failed, 2 on errors.
/// Failures of checks whose hypothesis is not met are warnings unless strict;
/// in strict mode the unmet hypothesis is itself a failure.
inline int exit_status(const std::vector<CaseResult>& results, bool strict)
{
    bool failed = false;
    for (const auto& r : results) {
        if (!r.errors.empty()) return 2;
        for (const auto& row : r.rows) {
            if (row.status == "skipped") continue;
            if (!row.hypothesis_ok) failed = failed || strict;
            else failed = failed || row.status == "false";
        }
    }
    return failed ? 1 : 0;
}

inline void write_rows_csv(std::ostream& os, const std::vector<ReportRow>& rows)
{
    os << "name,case,h,lhs,rhs,margin,tolerance,pass\n";
    for (const auto& r : rows)
        os << r.name << ',' << r.case_id << ',' << format_real(r.h) << ',' << format_real(r.lhs) << ','
           << format_real(r.rhs) << ',' << format_real(r.margin) << ',' << format_real(r.tolerance) << ','
           << r.status << '\n';
}

/// Writes one CSV per check kind, detail files, and summary.json into `dir`.
/// Returns the exit status.
inline int emit_report(const std::vector<CaseResult>& results, const std::filesystem::path& dir,
                       const EmitOptions& opt = {})
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir / "detail", ec);
    if (ec) return 2;

    std::map<std::string, std::vector<ReportRow>> by_kind;
    for (const auto& k : check_kinds()) by_kind[k];
    for (const auto& r : results)
        for (const auto& row : r.rows) by_kind[row.kind].push_back(row);

    auto write = [&](const fs::path& p, const std::string& text) {
        std::ofstream f(p, std::ios::binary);
        f << text;
        f.close();
        return static_cast<bool>(f);
    };
    bool ok = true;
    for (const auto& [kind, rows] : by_kind) {
        std::ostringstream os;
        write_rows_csv(os, rows);
        ok = write(dir / (kind + ".csv"), os.str()) && ok;
    }
    for (const auto& r : results)
        for (const auto& d : r.details) ok = write(dir / "detail" / d.name, d.content) && ok;

    const int status = ok ? exit_status(results, opt.strict) : 2;
    nlohmann::ordered_json js;
    std::size_t total = 0, passed = 0, failed = 0, skipped = 0, warnings = 0;
    nlohmann::ordered_json worst = nlohmann::ordered_json::object();
    nlohmann::ordered_json errors = nlohmann::ordered_json::array();
    for (const auto& [kind, rows] : by_kind) {
        double w = std::numeric_limits<double>::infinity();
        for (const auto& row : rows) {
            ++total;
            if (row.status == "skipped") ++skipped;
            else {
                (row.status == "true" ? passed : failed) += 1;
                w = std::min(w, row.margin);
            }
            if (!row.hypothesis_ok) ++warnings;
        }
        worst[kind] = std::isfinite(w) ? nlohmann::ordered_json(w) : nlohmann::ordered_json(nullptr);
    }
    for (const auto& r : results)
        for (const auto& e : r.errors) errors.push_back({{"case", r.id}, {"error", e}});
    js["cases"] = results.size();
    js["reports"] = total;
    js["passed"] = passed;
    js["failed"] = failed;
    js["skipped"] = skipped;
    js["hypothesis_warnings"] = warnings;
    js["worst_margin"] = worst;
    js["errors"] = errors;
    js["exit_status"] = status;
    if (opt.timing) {
        nlohmann::ordered_json t = nlohmann::ordered_json::object();
        for (const auto& r : results) t[r.id] = r.seconds;
        js["seconds_per_case"] = t;
    }
    if (!write(dir / "summary.json", js.dump(2) + "\n")) return 2;
    return status;
}

inline int run_suite(const SuiteConfig& cfg, const std::filesystem::path& out, int jobs, const EmitOptions& opt = {})
{
    return emit_report(run_cases(cfg, jobs), out, opt);
}

} // namespace rearr

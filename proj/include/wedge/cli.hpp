/*
   Copyright 2026 The wedge-intensity Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wedge/csv.hpp"
#include "wedge/intensity.hpp"
#include "wedge/montecarlo.hpp"
#include "wedge/svg.hpp"

// Front end of the wedge-intensity executable. Every command builds its whole
// output in memory and writes it only on success, so a failing run leaves no
// partial file behind.

namespace wedge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;      // unreadable or invalid config, bad flags
inline constexpr int kExitNumeric = 3;     // an evaluation failed
inline constexpr int kExitValidation = 4;  // MC disagrees with the analytic values
inline constexpr int kExitIo = 5;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config parsing

namespace detail {

inline const json& member(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_object() || !j.contains(key))
        throw ConfigError(where + ": missing \"" + key + "\"");
    return j.at(key);
}

inline double number(const json& j, const std::string& where) {
    if (!j.is_number())
        throw ConfigError(where + ": expected a number");
    return j.get<double>();
}

inline Vec2 pair(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2)
        throw ConfigError(where + ": expected [a, b]");
    return {number(j[0], where + "[0]"), number(j[1], where + "[1]")};
}

inline std::optional<double> optional_number(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key) || j.at(key).is_null())
        return std::nullopt;
    return number(j.at(key), where + "." + key);
}

}  // namespace detail

inline ModelParams parse_model(const json& j) {
    ModelParams p;
    p.mu = detail::pair(detail::member(j, "mu", "model"), "model.mu");
    const Vec2 sigma = detail::pair(detail::member(j, "sigma", "model"), "model.sigma");
    p.sigma1 = sigma.x;
    p.sigma2 = sigma.y;
    p.rho = detail::number(detail::member(j, "rho", "model"), "model.rho");
    p.x0 = detail::pair(detail::member(j, "x0", "model"), "model.x0");
    try {
        p.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
    return p;
}

/// Scenario from its JSON form:
///   {"model": {"mu": [m1, m2], "sigma": [s1, s2], "rho": r, "x0": [x1, x2]},
///    "observations": [{"t": 0, "x1": 9, "x2": 10}, ...],   (default: x0 at t = 0)
///    "defaults": [{"firm": 1, "time": 2}],                  (optional)
///    "grid": {"start": 0, "stop": 10, "step": 0.05}}        (optional)
inline Scenario parse_scenario(const json& j) {
    if (!j.is_object())
        throw ConfigError("config: expected a JSON object");
    Scenario sc;
    sc.model = parse_model(detail::member(j, "model", "config"));
    if (j.contains("observations")) {
        const json& obs = j.at("observations");
        if (!obs.is_array() || obs.empty())
            throw ConfigError("observations: expected a nonempty array");
        for (std::size_t i = 0; i < obs.size(); ++i) {
            const std::string where = "observations[" + std::to_string(i) + "]";
            Observation o;
            o.t = detail::number(detail::member(obs[i], "t", where), where + ".t");
            o.x1 = detail::optional_number(obs[i], "x1", where);
            o.x2 = detail::optional_number(obs[i], "x2", where);
            sc.observations.push_back(o);
        }
    } else {
        sc.observations = {{0.0, sc.model.x0.x, sc.model.x0.y}};
    }
    if (j.contains("defaults")) {
        const json& d = j.at("defaults");
        if (!d.is_array())
            throw ConfigError("defaults: expected an array");
        for (std::size_t i = 0; i < d.size(); ++i) {
            const std::string where = "defaults[" + std::to_string(i) + "]";
            const json& f = detail::member(d[i], "firm", where);
            if (!f.is_number_integer())
                throw ConfigError(where + ".firm: expected 1 or 2");
            sc.defaults.push_back({f.get<int>(), detail::number(detail::member(d[i], "time", where), where + ".time")});
        }
    }
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        sc.grid = {detail::number(detail::member(g, "start", "grid"), "grid.start"),
                   detail::number(detail::member(g, "stop", "grid"), "grid.stop"),
                   detail::number(detail::member(g, "step", "grid"), "grid.step")};
    } else {
        sc.grid = {0.0, 0.0, 1.0};
    }
    try {
        sc.validate();
        sc.grid.points();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_scenario(j);
}

/// "start:stop:step" (inclusive) or a comma-separated list.
inline std::vector<double> parse_grid_spec(const std::string& spec) {
    try {
        if (spec.find(':') != std::string::npos) {
            std::vector<double> parts;
            std::istringstream in(spec);
            std::string item;
            while (std::getline(in, item, ':'))
                parts.push_back(std::stod(item));
            if (parts.size() != 3)
                throw ConfigError("grid \"" + spec + "\": expected start:stop:step");
            return TimeGrid{parts[0], parts[1], parts[2]}.points();
        }
        std::vector<double> out;
        std::istringstream in(spec);
        std::string item;
        while (std::getline(in, item, ','))
            out.push_back(std::stod(item));
        if (out.empty())
            throw ConfigError("grid \"" + spec + "\" is empty");
        return out;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("grid \"" + spec + "\": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Evaluation with error context

/// Runs f, turning a numerical failure into NumericFailure prefixed by what.
template <class F>
auto in_context(const std::string& what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const DomainError& e) {
        throw NumericFailure(what + ": " + e.what());
    } catch (const OverflowError& e) {
        throw NumericFailure(what + ": " + e.what());
    } catch (const QuadratureError& e) {
        throw NumericFailure(what + ": " + e.what());
    } catch (const DegenerateConditioningError& e) {
        throw NumericFailure(what + ": " + e.what());
    } catch (const InvalidStateError& e) {
        throw NumericFailure(what + ": " + e.what());
    }
}

inline std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::vector<IntensitySample> evaluate_path(const Scenario& sc, const std::vector<double>& grid,
                                                  const QuadConfig& q, Firms firms = Firms::Both) {
    std::vector<IntensitySample> out(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        out[i] = in_context("intensity at u=" + short_num(grid[i]), [&] { return intensity_at(sc, grid[i], q, firms); });
    });
    return out;
}

// ---------------------------------------------------------------------------
// Commands

inline std::string intensity_csv(const Scenario& sc, const QuadConfig& q) {
    const std::vector<double> grid = sc.grid.points();
    const auto path = evaluate_path(sc, grid, q);
    csv::Table t({"u", "lambda1", "lambda2", "regime1", "regime2", "series_terms", "quad_err"});
    for (const auto& s : path)
        t.add_row({csv::number(s.u), csv::number(s.lambda1), csv::number(s.lambda2), regime_name(s.regime1.tag),
                   regime_name(s.regime2.tag), std::to_string(s.quality.series_terms_used),
                   csv::number(s.quality.quadrature_estimate_error)});
    return t.str();
}

/// P(tau1 > t, tau2 > t) from the model's x0 at time 0.
inline std::string survival_csv(const Scenario& sc, const QuadConfig& q) {
    const std::vector<double> grid = sc.grid.points();
    const WedgeState s = build_model(sc.model);
    std::vector<DensityValue> vals(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        if (grid[i] <= 0.0) {
            vals[i] = {grid[i] == 0.0 ? 1.0 : std::nan(""), {}};
            return;
        }
        vals[i] = in_context("survival_prob(t=" + short_num(grid[i]) + ")",
                             [&] { return survival_prob(grid[i], s, q); });
    });
    csv::Table t({"t", "survival", "quad_err"});
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::isnan(vals[i].value))
            t.add_row({csv::number(grid[i]), "", ""});
        else
            t.add_row({csv::number(grid[i]), csv::number(vals[i].value),
                       csv::number(vals[i].quality.quadrature_estimate_error)});
    }
    return t.str();
}

/// g(s, t) on a grid; fields are empty where t <= s or s <= 0.
inline std::string joint_csv(const Scenario& sc, const std::vector<double>& s_grid, const std::vector<double>& t_grid,
                             const QuadConfig& q) {
    const WedgeState st = build_model(sc.model);
    const std::size_t nt = t_grid.size();
    std::vector<std::optional<DensityValue>> vals(s_grid.size() * nt);
    parallel_for(vals.size(), [&](std::size_t k) {
        const double s = s_grid[k / nt];
        const double t = t_grid[k % nt];
        if (!(s > 0.0) || !(t > s))
            return;
        vals[k] = in_context("g_joint(s=" + short_num(s) + ", t=" + short_num(t) + ")",
                             [&] { return g_joint(s, t, st, q); });
    });
    csv::Table tab({"s", "t", "g", "quad_err"});
    for (std::size_t k = 0; k < vals.size(); ++k) {
        const auto& v = vals[k];
        tab.add_row({csv::number(s_grid[k / nt]), csv::number(t_grid[k % nt]), v ? csv::number(v->value) : "",
                     v ? csv::number(v->quality.quadrature_estimate_error) : ""});
    }
    return tab.str();
}

struct ValidationReport {
    std::string csv;
    int compared = 0;
    int failed = 0;
    int budget = 0;
    int low_precision = 0;
    int insufficient = 0;
    bool passed = false;

    std::string summary() const {
        std::string s = "validate: " + std::to_string(compared) + " comparisons, " + std::to_string(failed) +
                        " beyond 3 std errors (allowed " + std::to_string(budget) + ")";
        if (low_precision)
            s += ", " + std::to_string(low_precision) + " low precision";
        if (insufficient)
            s += ", " + std::to_string(insufficient) + " with insufficient sample";
        if (low_precision || insufficient)
            s += "; increase --paths for tight comparisons";
        return s + (passed ? ": PASS" : ": FAIL");
    }
};

inline constexpr double kValidationDt = 5e-4;
inline constexpr double kValidationHorizon = 2.0;
inline constexpr double kValidationBin = 0.25;
inline constexpr double kLowPrecision = 0.05;  // relative std error above which a row is flagged

/// MC against analytic values for each model: survival at t = 0.5, 1, 2, the
/// (tau1 < tau2) histogram bins with at least 100 expected paths, and the
/// local default rate of firm 2 at u = 1. `corrupt` scales every analytic
/// value (a self-test hook; 1 leaves them untouched).
inline ValidationReport run_validation(const std::vector<std::pair<std::string, ModelParams>>& models, long paths,
                                       std::uint64_t seed, const QuadConfig& q, double corrupt = 1.0) {
    csv::Table t({"model", "quantity", "analytic", "mc", "std_err", "z", "precision", "status"});
    ValidationReport rep;
    auto add = [&](const std::string& model, const std::string& what, double analytic, double mc, double se) {
        analytic *= corrupt;
        const double z = se > 0.0 ? (mc - analytic) / se : (mc == analytic ? 0.0 : HUGE_VAL);
        const bool low = !(se <= kLowPrecision * std::abs(analytic));
        const bool ok = std::abs(z) < 3.0;
        ++rep.compared;
        rep.failed += !ok;
        rep.low_precision += low;
        t.add_row({model, what, csv::number(analytic), csv::number(mc), csv::number(se), csv::number(z),
                   low ? "low" : "ok", ok ? "pass" : "fail"});
    };
    for (const auto& [label, model] : models) {
        const WedgeState s = build_model(model);
        SimConfig c;
        c.n_paths = paths;
        c.dt = kValidationDt;
        c.horizon = kValidationHorizon;
        c.seed = seed;
        c.hist_bin = kValidationBin;
        c.survival_times = {0.5, 1.0, 2.0};
        const PathOutcomes po = simulate_paths(model, c);
        const SimEstimates est = estimate(po, c);
        const double n = static_cast<double>(paths);

        for (const CurvePoint& p : est.survival_curve) {
            const double a = in_context("survival_prob(t=" + short_num(p.t) + ")",
                                        [&] { return survival_prob(p.t, s, q).value; });
            add(label, "survival(t=" + short_num(p.t) + ")", a, p.estimate, p.std_error);
        }
        const Hist2D& h = est.default_time_hist2d;
        for (std::size_t i = 0; i < h.n; ++i) {
            for (std::size_t j = i + 1; j < h.n; ++j) {
                const double s_lo = h.bin * i, s_hi = h.bin * (i + 1), t_lo = h.bin * j, t_hi = h.bin * (j + 1);
                const std::string box = "(s=" + short_num(s_lo) + ".." + short_num(s_hi) + ";t=" + short_num(t_lo) +
                                        ".." + short_num(t_hi) + ")";
                const double mass = in_context("joint_box_mass" + box,
                                               [&] { return joint_box_mass(s_lo, s_hi, t_lo, t_hi, s, q).value; });
                if (mass * n < 100.0)
                    continue;
                const double p = static_cast<double>(h.at(i, j)) / n;
                const double se = std::sqrt((p > 0.0 ? p * (1.0 - p) : mass * (1.0 - mass)) / n);
                add(label, "g_box" + box, mass, p, se);
            }
        }
        InformationState info;
        info.obs_times = {0.0};
        info.x1 = model.x0.x;
        info.x2 = model.x0.y;
        info.as_of = 1.0;
        const double lam = in_context("lambda2(u=1)", [&] { return *lambda2(1.0, info, model, q).lambda2; });
        try {
            const RateEstimate r = conditional_rate(po, 1.0, 0.05, {});
            add(label, "rate2(u=1;delta=0.05)", lam, r.rate, r.std_error);
        } catch (const InsufficientSampleError&) {
            ++rep.insufficient;
            t.add_row({label, "rate2(u=1;delta=0.05)", csv::number(lam * corrupt), "", "", "", "low", "insufficient"});
        }
    }
    rep.budget = static_cast<int>(std::floor(0.05 * rep.compared));
    rep.passed = rep.failed <= rep.budget;
    rep.csv = t.str();
    return rep;
}

inline std::vector<std::pair<std::string, ModelParams>> default_battery() {
    std::vector<std::pair<std::string, ModelParams>> out;
    for (double rho : {0.0, -0.5}) {
        ModelParams p;
        p.mu = {0, 0};
        p.rho = rho;
        p.x0 = {1, 1};
        out.emplace_back("rho=" + short_num(rho), p);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Built-in figure scenarios

namespace scenarios {

/// x0 = (9, 10), mu = (2, 3), sigma = (4, 5), observed at t = 0; the next
/// observation is 10 years later, so every grid point below 10 is in the
/// first window.
inline ModelParams large_firms(double rho) {
    ModelParams p;
    p.mu = {2, 3};
    p.sigma1 = 4;
    p.sigma2 = 5;
    p.rho = rho;
    p.x0 = {9, 10};
    return p;
}

/// x0 = (1, 1), mu = (0.1, -0.2), sigma = (1.2, 0.5).
inline ModelParams small_firms(double rho) {
    ModelParams p;
    p.mu = {0.1, -0.2};
    p.sigma1 = 1.2;
    p.sigma2 = 0.5;
    p.rho = rho;
    p.x0 = {1, 1};
    return p;
}

inline Scenario with_default(const ModelParams& p, std::optional<double> tau1, double stop, double step) {
    Scenario sc;
    sc.model = p;
    sc.observations = {{0.0, p.x0.x, p.x0.y}};
    if (tau1)
        sc.defaults = {{1, *tau1}};
    sc.grid = {0.0, stop, step};
    return sc;
}

}  // namespace scenarios

struct OutputFile {
    std::string name;
    std::string content;
};

namespace detail {

inline void add_chart(std::vector<OutputFile>& files, const std::string& stem, const std::string& title,
                      const std::vector<double>& u, const std::vector<std::pair<std::string, std::vector<double>>>& cols,
                      std::vector<svg::Series> extra = {}) {
    std::vector<std::string> header{"u"};
    for (const auto& c : cols)
        header.push_back(c.first);
    csv::Table t(header);
    for (std::size_t i = 0; i < u.size(); ++i) {
        std::vector<std::string> row{csv::number(u[i])};
        for (const auto& c : cols)
            row.push_back(std::isnan(c.second[i]) ? "" : csv::number(c.second[i]));
        t.add_row(std::move(row));
    }
    std::vector<svg::Series> series;
    for (const auto& c : cols)
        series.push_back({c.first, u, c.second, false});
    for (auto& e : extra)
        series.push_back(std::move(e));
    files.push_back({stem + ".csv", t.str()});
    files.push_back({stem + ".svg", svg::line_chart(title, "u (years)", "lambda2 (per year)", series)});
}

inline std::vector<double> lambda2_column(const Scenario& sc, const QuadConfig& q) {
    const auto path = evaluate_path(sc, sc.grid.points(), q, Firms::Second);
    std::vector<double> out;
    for (const auto& s : path)
        out.push_back(s.lambda2 ? *s.lambda2 : std::nan(""));
    return out;
}

}  // namespace detail

inline constexpr double kFig3Dt = 1e-3;
inline constexpr double kFig3Delta = 0.05;

/// fig1: lambda2 for rho = 0, -0.5, -0.7 with tau1 = 2 (large firms).
/// fig2: lambda2 at rho = -0.5 for several tau1.
/// fig3: small firms at rho = 0: closed-form single-name hazard, the full
///       two-firm evaluation and the MC local default rate.
/// fig5, fig6: small firms with tau1 = 2 at rho = 0.1 and rho = -0.1.
inline std::vector<OutputFile> build_figures(long paths, std::uint64_t seed, const QuadConfig& q) {
    using namespace scenarios;
    std::vector<OutputFile> files;

    {
        std::vector<std::pair<std::string, std::vector<double>>> cols;
        std::vector<double> u;
        for (double rho : {0.0, -0.5, -0.7}) {
            const Scenario sc = with_default(large_firms(rho), 2.0, 9.95, 0.05);
            u = sc.grid.points();
            cols.emplace_back("lambda2_rho_" + short_num(rho), detail::lambda2_column(sc, q));
        }
        detail::add_chart(files, "fig1", "Default intensity lambda2, tau1 = 2", u, cols);
    }
    {
        std::vector<std::pair<std::string, std::vector<double>>> cols;
        std::vector<double> u;
        const Scenario none = with_default(large_firms(-0.5), std::nullopt, 9.95, 0.05);
        u = none.grid.points();
        cols.emplace_back("lambda2_no_default", detail::lambda2_column(none, q));
        for (double tau1 : {1.0, 2.0, 4.0, 6.0})
            cols.emplace_back("lambda2_tau1_" + short_num(tau1),
                              detail::lambda2_column(with_default(large_firms(-0.5), tau1, 9.95, 0.05), q));
        detail::add_chart(files, "fig2", "Default intensity lambda2, rho = -0.5, varying tau1", u, cols);
    }
    {
        const ModelParams p = small_firms(0.0);
        const Scenario sc = with_default(p, std::nullopt, 5.0, 0.1);
        std::vector<double> u = sc.grid.points();
        u.erase(u.begin());  // u = 0 is a point mass of nothing; start at 0.1
        Scenario shifted = sc;
        shifted.grid.start = u.front();
        const double z2 = p.x0.y / p.sigma2, m2 = p.mu.y / p.sigma2;
        std::vector<double> closed, model_col = detail::lambda2_column(shifted, q), mc, mc_se;
        for (double v : u)
            closed.push_back(pi_hit(z2, v, m2) / pi_survival(z2, v, m2));
        SimConfig c;
        c.n_paths = paths;
        c.dt = kFig3Dt;
        c.horizon = std::round((u.back() + kFig3Delta) / kFig3Dt) * kFig3Dt;
        c.seed = seed;
        c.hist_bin = c.horizon;
        const PathOutcomes po = simulate_paths(p, c);
        for (double v : u) {
            try {
                const RateEstimate r = conditional_rate(po, v, kFig3Delta, {});
                mc.push_back(r.rate);
                mc_se.push_back(r.std_error);
            } catch (const InsufficientSampleError&) {
                mc.push_back(std::nan(""));
                mc_se.push_back(std::nan(""));
            }
        }
        detail::add_chart(files, "fig3", "lambda2 at rho = 0: closed form, model, Monte Carlo", u,
                          {{"lambda2_closed_form", closed},
                           {"lambda2_model", model_col},
                           {"lambda2_mc", mc},
                           {"mc_std_err", mc_se}});
        // The std error column is not worth a line in the chart.
        OutputFile& chart = files.back();
        std::vector<svg::Series> series{{"closed form", u, closed, false},
                                        {"model", u, model_col, false},
                                        {"Monte Carlo", u, mc, true}};
        chart.content = svg::line_chart("lambda2 at rho = 0: closed form, model, Monte Carlo", "u (years)",
                                        "lambda2 (per year)", series);
    }
    for (auto [stem, rho] : {std::pair{"fig5", 0.1}, std::pair{"fig6", -0.1}}) {
        const Scenario sc = with_default(small_firms(rho), 2.0, 5.0, 0.1);
        const Scenario indep = with_default(small_firms(0.0), 2.0, 5.0, 0.1);
        detail::add_chart(files, stem, "Default intensity lambda2, tau1 = 2, rho = " + short_num(rho),
                          sc.grid.points(),
                          {{"lambda2_rho_" + short_num(rho), detail::lambda2_column(sc, q)},
                           {"lambda2_rho_0", detail::lambda2_column(indep, q)}});
    }
    return files;
}

// ---------------------------------------------------------------------------
// Output and entry point

/// Writes content to path through a temporary file in the same directory.
inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::filesystem::filesystem_error("cannot open for writing", tmp,
                                                    std::make_error_code(std::errc::io_error));
        out << content;
        out.close();
        if (!out)
            throw std::filesystem::filesystem_error("write failed", tmp, std::make_error_code(std::errc::io_error));
    }
    std::filesystem::rename(tmp, path);
}

inline void emit(const std::string& out_path, const std::string& content, std::ostream& out) {
    if (out_path.empty() || out_path == "-")
        out << content;
    else
        write_file(out_path, content);
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Default intensities of two firms whose assets follow correlated Brownian motions"};
    app.name("wedge-intensity");
    app.require_subcommand(1);

    std::string config, out_path, s_grid, t_grid;
    long paths = 100000;
    std::uint64_t seed = 1;
    double tol = QuadConfig{}.rel_tol;
    double corrupt = 1.0;

    auto common = [&](CLI::App* sub, bool need_config) {
        auto* c = sub->add_option("--config", config, "JSON scenario file");
        if (need_config)
            c->required();
        sub->add_option("--out", out_path, "output file (default: stdout)");
        sub->add_option("--tol", tol, "relative quadrature tolerance");
    };
    auto* intensity = app.add_subcommand("intensity", "lambda1 and lambda2 on the scenario grid");
    common(intensity, true);
    auto* survival = app.add_subcommand("survival", "P(tau1 > t, tau2 > t) on the scenario grid");
    common(survival, true);
    auto* joint = app.add_subcommand("joint", "joint default density g(s, t) on a grid");
    common(joint, true);
    joint->add_option("--s-grid", s_grid, "start:stop:step or comma list")->required();
    joint->add_option("--t-grid", t_grid, "start:stop:step or comma list")->required();
    auto* validate = app.add_subcommand("validate", "Monte Carlo against the analytic values");
    common(validate, false);
    validate->add_option("--paths", paths, "simulated paths per model");
    validate->add_option("--seed", seed, "simulation seed");
    validate->add_option("--corrupt-analytic", corrupt, "scale analytic values (harness self-test)")->group("");
    auto* figures = app.add_subcommand("figures", "CSV and SVG for the built-in figure scenarios");
    figures->add_option("--out", out_path, "output directory")->required();
    figures->add_option("--paths", paths, "simulated paths for the Monte Carlo overlay");
    figures->add_option("--seed", seed, "simulation seed");
    figures->add_option("--tol", tol, "relative quadrature tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        QuadConfig q;
        q.rel_tol = tol;
        try {
            q.validate();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("--tol: ") + e.what());
        }
        if (paths < 1)
            throw ConfigError("--paths must be positive");

        if (*intensity) {
            emit(out_path, intensity_csv(load_scenario(config), q), out);
        } else if (*survival) {
            emit(out_path, survival_csv(load_scenario(config), q), out);
        } else if (*joint) {
            const Scenario sc = load_scenario(config);
            emit(out_path, joint_csv(sc, parse_grid_spec(s_grid), parse_grid_spec(t_grid), q), out);
        } else if (*validate) {
            auto models = default_battery();
            if (!config.empty())
                models = {{"config", load_scenario(config).model}};
            const ValidationReport rep = run_validation(models, paths, seed, q, corrupt);
            emit(out_path, rep.csv, out);
            err << rep.summary() << "\n";
            return rep.passed ? kExitOk : kExitValidation;
        } else if (*figures) {
            const std::filesystem::path dir(out_path);
            std::filesystem::create_directories(dir);
            for (const OutputFile& f : build_figures(paths, seed, q))
                write_file(dir / f.name, f.content);
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericFailure& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "I/O error: " << e.what() << "\n";
        return kExitIo;
    }
}

}  // namespace wedge::cli

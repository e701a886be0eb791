#pragma once

// Parameter sweeps and figure data: one CSV row per (m_u, T, omega) with a '#'
// metadata block, rows written in sweep order and flushed as they complete.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "abh/bell_opt.hpp"
#include "abh/errors.hpp"
#include "abh/flow_config.hpp"
#include "abh/gaussian_state.hpp"
#include "abh/pseudospin.hpp"
#include "abh/run_config.hpp"

namespace abh {

inline constexpr const char* kToolVersion = "1.0.0";

inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

class CsvWriter {
public:
    // With resume set, an existing file with the same column line is kept and its data
    // rows are reported through rows_present().
    CsvWriter(const std::string& path, const std::vector<std::string>& meta, const std::vector<std::string>& columns,
              bool resume = false) {
        const std::string header = join(columns);
        if (resume && std::filesystem::exists(path)) {
            std::ifstream in(path);
            std::string line;
            bool header_ok = false;
            while (std::getline(in, line)) {
                if (line.empty() || line[0] == '#') continue;
                if (!header_ok) {
                    header_ok = line == header;
                    if (!header_ok) break;
                    continue;
                }
                ++present_;
            }
            if (header_ok) {
                out_.open(path, std::ios::app);
                if (!out_) throw Error("cannot append to " + path);
                return;
            }
            present_ = 0;
        }
        out_.open(path, std::ios::trunc);
        if (!out_) throw Error("cannot write " + path);
        for (const auto& m : meta) out_ << "# " << m << '\n';
        out_ << header << '\n';
        out_.flush();
    }

    std::size_t rows_present() const { return present_; }

    void row(const std::vector<std::string>& cells) {
        out_ << join(cells) << '\n';
        out_.flush();
    }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
        return s;
    }
    std::ofstream out_;
    std::size_t present_ = 0;
};

enum class Quantity {
    Lambda02, Lambda12, Lambda01, Chsh02, Chsh12, Chsh01, Delta, R2, Gamma0, LambdaF, ChshF, Svetlichny, Mermin
};

inline const std::map<std::string, Quantity>& quantity_names() {
    static const std::map<std::string, Quantity> m = {
        {"lambda02", Quantity::Lambda02}, {"lambda12", Quantity::Lambda12}, {"lambda01", Quantity::Lambda01},
        {"chsh02", Quantity::Chsh02},     {"chsh12", Quantity::Chsh12},     {"chsh01", Quantity::Chsh01},
        {"delta", Quantity::Delta},       {"r2", Quantity::R2},             {"gamma0", Quantity::Gamma0},
        {"lambda_f", Quantity::LambdaF},  {"chsh_f", Quantity::ChshF},      {"svetlichny", Quantity::Svetlichny},
        {"mermin", Quantity::Mermin}};
    return m;
}

inline std::string to_string(Quantity q) {
    for (const auto& [name, v] : quantity_names())
        if (v == q) return name;
    return "?";
}

inline Quantity parse_quantity(const std::string& s) {
    const auto it = quantity_names().find(s);
    if (it == quantity_names().end()) throw ConfigError("unknown quantity '" + s + "'");
    return it->second;
}

struct SweepSpec {
    FlowKind kind = FlowKind::Waterfall;
    std::vector<double> m_u{0.587};
    std::optional<double> m_d;       // flat profile; unset means m_d = m_u^-2
    OmegaGrid grid;
    std::vector<double> temperatures{0.0};
    std::vector<Quantity> quantities{Quantity::Lambda02, Quantity::Lambda12, Quantity::Chsh02, Quantity::Chsh12};
    std::string out = "sweep.csv";
    std::uint64_t seed = 1;
    int threads = 1;
    double guard = kDefaultThresholdGuard;
    GaSettings ga;
    bool resume = false;
    std::vector<std::string> extra_meta;
};

inline FlowConfig sweep_flow(const SweepSpec& s, double m_u) {
    if (s.kind != FlowKind::FlatProfile) return build_config(s.kind, m_u);
    return build_config(s.kind, m_u, s.m_d ? *s.m_d : 1.0 / (m_u * m_u));
}

// Per-row seed: splitmix64 of (seed, row index).
inline std::uint64_t row_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::vector<double> point_quantities(const FlowConfig& c, double omega, double T,
                                            const std::vector<Quantity>& qs, const GaSettings& ga,
                                            std::uint64_t seed, double guard) {
    const ScatteringMatrix S = smatrix(c, omega, ScatteringOptions{.guard = guard});
    const Occupations n = thermal_occupations(c, omega, T, guard);
    const SecondMoments m = second_moments(S, n, T);
    std::optional<Tensor3> tensor;
    std::optional<FModeState> fm;
    auto three = [&]() -> const Tensor3& {
        if (!tensor) tensor = three_mode_correlators(m);
        return *tensor;
    };
    auto fstate = [&]() -> const FModeState& {
        if (!fm) fm = fmode_state(S, n);
        return *fm;
    };
    std::vector<double> v;
    for (Quantity q : qs) {
        switch (q) {
            case Quantity::Lambda02: v.push_back(ppt_measure(m, {0, 2})); break;
            case Quantity::Lambda12: v.push_back(ppt_measure(m, {1, 2})); break;
            case Quantity::Lambda01: v.push_back(ppt_measure(m, {0, 1})); break;
            case Quantity::Chsh02: v.push_back(chsh_parameter(m, {0, 2}).value); break;
            case Quantity::Chsh12: v.push_back(chsh_parameter(m, {1, 2}).value); break;
            case Quantity::Chsh01: v.push_back(chsh_from_table(two_mode_correlators(m, {0, 1}, CorrelatorBasis::CBasis))); break;
            case Quantity::Delta: v.push_back(purity_delta(m)); break;
            case Quantity::R2: v.push_back(optical_model(S).r2); break;
            case Quantity::Gamma0: v.push_back(optical_model(S).gamma0); break;
            case Quantity::LambdaF: v.push_back(fstate().lambda); break;
            case Quantity::ChshF: v.push_back(fstate().chsh); break;
            case Quantity::Svetlichny: v.push_back(svetlichny_parameter(three(), ga, seed).value); break;
            case Quantity::Mermin: v.push_back(mermin_parameter(three(), ga, seed).value); break;
        }
    }
    return v;
}

struct SweepRow {
    double m_u, T, fraction, omega;
    std::vector<double> values;
    std::string status = "ok";
};

// Runs the sweep and writes spec.out plus spec.out + ".manifest". Returns the rows in
// sweep order (rows skipped on resume are not recomputed and not returned).
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    if (spec.grid.count <= 0 || spec.grid.fractions().empty()) throw ConfigError("omega grid is empty");
    if (spec.m_u.empty() || spec.temperatures.empty()) throw ConfigError("sweep needs at least one m_u and one T");
    if (spec.grid.hi >= 1.0 - spec.guard) throw ConfigError("sweep grids must stay below the threshold guard band");

    struct Task {
        double m_u, T, fraction;
    };
    std::vector<Task> tasks;
    for (double mu : spec.m_u)
        for (double T : spec.temperatures)
            for (double f : spec.grid.fractions()) tasks.push_back({mu, T, f});

    std::vector<std::string> meta = {"tool abh " + std::string(kToolVersion),
                                     "kind " + to_string(spec.kind),
                                     "seed " + std::to_string(spec.seed),
                                     "omega_grid " + std::string(spec.grid.logarithmic ? "log" : "lin") + ":" +
                                         fmt(spec.grid.lo) + ":" + fmt(spec.grid.hi) + ":" +
                                         std::to_string(spec.grid.count),
                                     "ga population " + std::to_string(spec.ga.population) + " restarts " +
                                         std::to_string(spec.ga.restarts)};
    if (spec.kind == FlowKind::FlatProfile) meta.push_back("m_d " + (spec.m_d ? fmt(*spec.m_d) : std::string("m_u^-2")));
    for (const auto& e : spec.extra_meta) meta.push_back(e);
    std::vector<std::string> cols = {"m_u", "T", "omega_over_Omega", "omega"};
    for (Quantity q : spec.quantities) cols.push_back(to_string(q));
    cols.push_back("status");

    {
        std::ofstream man(spec.out + ".manifest", std::ios::trunc);
        for (const auto& m : meta) man << m << '\n';
        man << "rows " << tasks.size() << '\n';
    }
    CsvWriter csv(spec.out, meta, cols, spec.resume);
    const std::size_t start = std::min(csv.rows_present(), tasks.size());

    std::vector<SweepRow> done;
    auto compute = [&](std::size_t i) {
        const Task& t = tasks[i];
        SweepRow r{t.m_u, t.T, t.fraction, std::nan(""), {}, "ok"};
        try {
            const FlowConfig c = sweep_flow(spec, t.m_u);
            r.omega = t.fraction * threshold_omega(c);
            r.values = point_quantities(c, r.omega, t.T, spec.quantities, spec.ga, row_seed(spec.seed, i), spec.guard);
        } catch (const Error& e) {
            r.values.assign(spec.quantities.size(), std::nan(""));
            r.status = e.what();
            for (char& ch : r.status)
                if (ch == ',' || ch == '\n') ch = ';';
        }
        return r;
    };
    const int threads = std::max(1, spec.threads);
    for (std::size_t block = start; block < tasks.size(); block += threads) {
        const std::size_t end = std::min(tasks.size(), block + threads);
        std::vector<SweepRow> rows(end - block);
        if (threads == 1) {
            rows[0] = compute(block);
        } else {
            std::vector<std::thread> pool;
            for (std::size_t i = block; i < end; ++i) pool.emplace_back([&, i] { rows[i - block] = compute(i); });
            for (auto& th : pool) th.join();
        }
        for (auto& r : rows) {
            std::vector<std::string> cells = {fmt(r.m_u), fmt(r.T), fmt(r.fraction), fmt(r.omega)};
            for (double v : r.values) cells.push_back(fmt(v));
            cells.push_back(r.status);
            csv.row(cells);
            done.push_back(std::move(r));
        }
    }
    return done;
}

enum class FigureId { Fig3, Fig4, Fig5, Fig6, Fig7, Fig8, FigC1, FigI1, FigI2, FigI3, FigI4, FigI5, FigI6 };

inline const std::map<std::string, FigureId>& figure_names() {
    static const std::map<std::string, FigureId> m = {
        {"fig3", FigureId::Fig3},   {"fig4", FigureId::Fig4},   {"fig5", FigureId::Fig5},
        {"fig6", FigureId::Fig6},   {"fig7", FigureId::Fig7},   {"fig8", FigureId::Fig8},
        {"figc1", FigureId::FigC1}, {"figi1", FigureId::FigI1}, {"figi2", FigureId::FigI2},
        {"figi3", FigureId::FigI3}, {"figi4", FigureId::FigI4}, {"figi5", FigureId::FigI5},
        {"figi6", FigureId::FigI6}};
    return m;
}

inline FigureId parse_figure(std::string s) {
    for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    const auto it = figure_names().find(s);
    if (it == figure_names().end()) throw ConfigError("unknown figure '" + s + "'");
    return it->second;
}

inline std::string to_string(FigureId f) {
    for (const auto& [name, v] : figure_names())
        if (v == f) return name;
    return "?";
}

struct FigureOptions {
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    int threads = 1;
    int omega_points = 30;
    int ga_restarts = 4;
    double guard = kDefaultThresholdGuard;
};

struct FigureOutput {
    std::vector<std::string> csv_files;
    std::string plot_script;
};

namespace detail {

inline std::string plot_script(const std::string& csv, const std::vector<std::string>& ycols, bool logx,
                               const std::string& xcol = "omega_over_Omega") {
    std::string s = "import pandas as pd\nimport matplotlib.pyplot as plt\n\n";
    s += "d = pd.read_csv('" + csv + "', comment='#')\n";
    s += "fig, ax = plt.subplots()\n";
    s += "keys = [k for k in ('m_u', 'T') if k in d.columns]\n";
    s += "groups = d.groupby(keys) if keys else [((), d)]\n";
    s += "for key, g in groups:\n";
    for (const auto& y : ycols) s += "    ax.plot(g['" + xcol + "'], g['" + y + "'], label=f'" + y + " {key}')\n";
    if (logx) s += "ax.set_xscale('log')\n";
    s += "ax.set_xlabel('" + xcol + "')\nax.legend(fontsize=6)\n";
    s += "fig.savefig('" + csv.substr(0, csv.size() - 4) + ".png', dpi=150)\n";
    return s;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out << text;
}

// Maxima over omega of each quantity, one row per (m_u, T).
inline void write_maxima(const std::string& path, const SweepSpec& spec, const std::vector<SweepRow>& rows) {
    std::vector<std::string> cols = {"m_u", "T"};
    for (Quantity q : spec.quantities) cols.push_back("max_" + to_string(q));
    CsvWriter csv(path, {"tool abh " + std::string(kToolVersion), "maxima over omega of " + spec.out}, cols);
    for (double mu : spec.m_u)
        for (double T : spec.temperatures) {
            std::vector<double> best(spec.quantities.size(), -1e300);
            for (const auto& r : rows) {
                if (r.m_u != mu || r.T != T) continue;
                for (std::size_t k = 0; k < best.size(); ++k)
                    if (!std::isnan(r.values[k])) best[k] = std::max(best[k], r.values[k]);
            }
            std::vector<std::string> cells = {fmt(mu), fmt(T)};
            for (double b : best) cells.push_back(fmt(b));
            csv.row(cells);
        }
}

}  // namespace detail

inline FigureOutput reproduce_figure(FigureId id, const FigureOptions& opt) {
    namespace fs = std::filesystem;
    fs::create_directories(opt.out_dir);
    const std::string name = to_string(id);
    const std::string csv = (fs::path(opt.out_dir) / (name + ".csv")).string();
    FigureOutput out;

    SweepSpec s;
    s.out = csv;
    s.seed = opt.seed;
    s.threads = opt.threads;
    s.guard = opt.guard;
    s.ga.restarts = opt.ga_restarts;
    s.grid = OmegaGrid{true, 1e-4, 0.999, opt.omega_points};
    s.extra_meta = {"figure " + name};
    const std::vector<double> mu_sweep = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    const std::vector<double> mu_family = {0.3, 0.5, 0.587, 0.7};

    auto curves = [&](std::vector<std::string> y) {
        run_sweep(s);
        out.csv_files.push_back(csv);
        out.plot_script = detail::plot_script(fs::path(csv).filename().string(), y, true);
    };
    auto maxima = [&]() {
        s.m_u = mu_sweep;
        s.temperatures = {0.0, 0.2};
        s.quantities = {Quantity::Lambda02, Quantity::Lambda12, Quantity::Chsh02, Quantity::Chsh12};
        const auto rows = run_sweep(s);
        const std::string mx = (fs::path(opt.out_dir) / (name + "_maxima.csv")).string();
        detail::write_maxima(mx, s, rows);
        out.csv_files = {csv, mx};
        out.plot_script = detail::plot_script(fs::path(mx).filename().string(),
                                              {"max_lambda02", "max_lambda12", "max_chsh02", "max_chsh12"}, false, "m_u");
    };

    switch (id) {
        case FigureId::Fig3:
        case FigureId::FigC1:
            s.m_u = {1.0 / std::sqrt(2.9)};
            s.temperatures = {0.0, 0.1, 0.2};
            s.grid = OmegaGrid{true, 1e-3, 0.999, std::max(opt.omega_points, 60)};
            if (id == FigureId::Fig3) {
                s.quantities = {Quantity::Lambda02, Quantity::Lambda12, Quantity::Chsh02, Quantity::Chsh12};
                curves({"lambda02", "lambda12", "chsh02", "chsh12"});
            } else {
                s.quantities = {Quantity::LambdaF, Quantity::ChshF, Quantity::R2, Quantity::Gamma0};
                curves({"lambda_f", "chsh_f"});
            }
            break;
        case FigureId::Fig4: maxima(); break;
        case FigureId::FigI1:
            s.kind = FlowKind::DeltaPeak;
            maxima();
            break;
        case FigureId::FigI2:
            s.kind = FlowKind::FlatProfile;
            maxima();
            break;
        case FigureId::Fig5:
        case FigureId::Fig6:
        case FigureId::FigI3:
        case FigureId::FigI4:
            s.kind = id == FigureId::FigI3 ? FlowKind::DeltaPeak
                                           : (id == FigureId::FigI4 ? FlowKind::FlatProfile : FlowKind::Waterfall);
            s.m_u = mu_family;
            s.temperatures = {id == FigureId::Fig6 ? 0.05 : 0.0};
            s.quantities = {Quantity::Svetlichny};
            curves({"svetlichny"});
            break;
        case FigureId::Fig7:
        case FigureId::FigI5:
        case FigureId::FigI6:
            s.kind = id == FigureId::FigI5 ? FlowKind::DeltaPeak
                                           : (id == FigureId::FigI6 ? FlowKind::FlatProfile : FlowKind::Waterfall);
            s.m_u = {0.3, 0.587};
            s.temperatures = {0.0, 0.1};
            s.quantities = {Quantity::Mermin};
            curves({"mermin"});
            break;
        case FigureId::Fig8: {
            const FlowConfig wf = build_config(FlowKind::Waterfall, 0.587);
            const FlowConfig dp = build_config(FlowKind::DeltaPeak, 0.5);
            CsvWriter w(csv, {"tool abh " + std::string(kToolVersion), "figure fig8", "waterfall m_u 0.587",
                              "delta_peak m_u 0.5"},
                        {"x", "n_waterfall", "v_waterfall", "n_delta", "v_delta"});
            for (int k = 0; k <= 300; ++k) {
                const double x = -15.0 + 0.1 * k;
                const auto a = background_profile(wf, x), b = background_profile(dp, x);
                w.row({fmt(x), fmt(a.density), fmt(a.velocity), fmt(b.density), fmt(b.velocity)});
            }
            out.csv_files.push_back(csv);
            out.plot_script = detail::plot_script(fs::path(csv).filename().string(), {"n_waterfall", "n_delta"}, false, "x");
            break;
        }
    }
    const std::string script = (fs::path(opt.out_dir) / (name + "_plot.py")).string();
    detail::write_text(script, out.plot_script);
    return out;
}

}  // namespace abh

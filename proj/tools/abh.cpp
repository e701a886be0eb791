#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "abh/bdg_scattering.hpp"
#include "abh/bell_opt.hpp"
#include "abh/dispersion.hpp"
#include "abh/flow_config.hpp"
#include "abh/fock_oracle.hpp"
#include "abh/gaussian_state.hpp"
#include "abh/pseudospin.hpp"
#include "abh/run_config.hpp"
#include "abh/sweep.hpp"

using namespace abh;

namespace {

struct Globals {
    std::string config;
    std::uint64_t seed = 1;
    std::string out;
    int threads = 1;
    double guard = kDefaultThresholdGuard;
};

// Flags shared by the physics commands; each overrides the matching config entry.
struct PointFlags {
    std::string kind, omega_grid, temperatures;
    double m_u = -1.0, m_d = -1.0, omega = -1.0;
};

RunConfig resolve(const Globals& g, const PointFlags& f) {
    RunConfig rc = g.config.empty() ? RunConfig{} : load_run_config(g.config);
    if (!f.kind.empty()) rc.kind = parse_flow_kind(f.kind);
    if (f.m_u > 0.0) rc.m_u = f.m_u;
    if (f.m_d > 0.0) rc.m_d = f.m_d;
    if (!f.omega_grid.empty()) rc.grid = parse_omega_grid(f.omega_grid);
    if (!f.temperatures.empty()) rc.temperatures = parse_list(f.temperatures, "temperature");
    return rc;
}

// Absolute frequencies: the single --omega (in units of Omega) or the grid.
std::vector<double> frequencies(const RunConfig& rc, const FlowConfig& c, const PointFlags& f, double guard) {
    std::vector<double> w;
    if (f.omega > 0.0) {
        w.push_back(f.omega * threshold_omega(c));
    } else {
        w = rc.grid.omegas(c, guard);
    }
    if (w.empty()) throw ConfigError("omega grid is empty");
    return w;
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw Error("cannot write " + path);
        }
    }
    std::ostream& os() { return file_ ? *file_ : std::cout; }
    void meta(const RunConfig& rc, const Globals& g) {
        os() << "# tool abh " << kToolVersion << "\n# kind " << to_string(rc.kind) << "\n# m_u " << fmt(rc.m_u)
             << "\n# seed " << g.seed << '\n';
        if (rc.m_d) os() << "# m_d " << fmt(*rc.m_d) << '\n';
        for (const auto& [k, v] : rc.raw) os() << "# config " << k << " = " << v << '\n';
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os() << (i ? "," : "") << cells[i];
        os() << '\n';
    }

private:
    std::unique_ptr<std::ofstream> file_;
};

void add_point_flags(CLI::App* cmd, PointFlags& f, bool grid = true, bool temps = true) {
    cmd->add_option("--kind", f.kind, "waterfall | delta | flat");
    cmd->add_option("--m-u", f.m_u, "upstream Mach number");
    cmd->add_option("--m-d", f.m_d, "downstream Mach number (flat profile)");
    cmd->add_option("--omega", f.omega, "single frequency in units of Omega");
    if (grid) cmd->add_option("--omega-grid", f.omega_grid, "lin|log:lo:hi:count in units of Omega");
    if (temps) cmd->add_option("--T", f.temperatures, "comma separated temperatures");
}

std::vector<std::string> smatrix_cells(const ScatteringMatrix& S, double Om) {
    std::vector<std::string> cells = {fmt(S.omega), fmt(S.omega / Om)};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const cplx v = (i < S.dim && j < S.dim) ? S(i, j) : cplx(std::nan(""), std::nan(""));
            cells.push_back(fmt(v.real()));
            cells.push_back(fmt(v.imag()));
        }
    if (S.dim == 3) {
        const OpticalModel om = optical_model(S);
        cells.push_back(fmt(om.r2));
        cells.push_back(fmt(om.gamma0));
    } else {
        cells.push_back("nan");
        cells.push_back("nan");
    }
    cells.push_back(fmt(skew_unitarity_residual(S)));
    return cells;
}

void run_spectrum(const Globals& g, const PointFlags& f, const std::string& region) {
    const RunConfig rc = resolve(g, f);
    const FlowConfig c = rc.flow();
    const Region r = region == "u" ? Region::Upstream : Region::Downstream;
    Output out(g.out);
    out.meta(rc, g);
    out.row({"omega", "omega_over_Omega", "channel", "re_q", "im_q", "v_group", "norm_sign"});
    const double Om = threshold_omega(c);
    for (double w : frequencies(rc, c, f, g.guard))
        for (const auto& root : channel_roots(c, r, w, g.guard))
            out.row({fmt(w), fmt(w / Om), to_string(root.label), fmt(root.q.real()), fmt(root.q.imag()),
                     fmt(root.v_group), std::to_string(root.norm_sign)});
}

void run_smatrix(const Globals& g, const PointFlags& f) {
    const RunConfig rc = resolve(g, f);
    const FlowConfig c = rc.flow();
    Output out(g.out);
    out.meta(rc, g);
    std::vector<std::string> cols = {"omega", "omega_over_Omega"};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            cols.push_back("re_S" + std::to_string(i) + std::to_string(j));
            cols.push_back("im_S" + std::to_string(i) + std::to_string(j));
        }
    for (const char* s : {"r2", "gamma0", "skew_residual"}) cols.push_back(s);
    out.row(cols);
    const double Om = threshold_omega(c);
    for (double w : frequencies(rc, c, f, g.guard))
        out.row(smatrix_cells(smatrix(c, w, ScatteringOptions{.guard = g.guard}), Om));
}

void run_entanglement(const Globals& g, const PointFlags& f, const std::string& pairs) {
    const RunConfig rc = resolve(g, f);
    const FlowConfig c = rc.flow();
    std::vector<ModePair> ps;
    for (const auto& p : split(pairs, ',')) {
        if (p.size() != 2 || p[0] < '0' || p[0] > '2' || p[1] < '0' || p[1] > '2' || p[0] == p[1])
            throw ConfigError("pairs are written as two distinct mode digits, e.g. 02");
        ps.push_back({p[0] - '0', p[1] - '0'});
    }
    Output out(g.out);
    out.meta(rc, g);
    std::vector<std::string> cols = {"omega", "omega_over_Omega", "T"};
    for (const auto& p : ps) {
        const std::string tag = std::to_string(p.i) + std::to_string(p.j);
        cols.push_back("lambda" + tag);
        cols.push_back("chsh" + tag);
    }
    cols.push_back("delta");
    out.row(cols);
    const double Om = threshold_omega(c);
    for (double w : frequencies(rc, c, f, g.guard)) {
        const ScatteringMatrix S = smatrix(c, w, ScatteringOptions{.guard = g.guard});
        for (double T : rc.temperatures) {
            const SecondMoments m = second_moments(S, thermal_occupations(c, w, T, g.guard), T);
            std::vector<std::string> cells = {fmt(w), fmt(w / Om), fmt(T)};
            for (const auto& p : ps) {
                cells.push_back(fmt(ppt_measure(m, p)));
                cells.push_back(fmt(p.j == 2 ? chsh_parameter(m, p).value
                                             : chsh_from_table(two_mode_correlators(m, p, CorrelatorBasis::CBasis))));
            }
            cells.push_back(fmt(purity_delta(m)));
            out.row(cells);
        }
    }
}

void run_correlators(const Globals& g, const PointFlags& f) {
    const RunConfig rc = resolve(g, f);
    const FlowConfig c = rc.flow();
    Output out(g.out);
    out.meta(rc, g);
    out.row({"omega", "omega_over_Omega", "T", "modes", "axes", "value"});
    const double Om = threshold_omega(c);
    for (double w : frequencies(rc, c, f, g.guard)) {
        const ScatteringMatrix S = smatrix(c, w, ScatteringOptions{.guard = g.guard});
        for (double T : rc.temperatures) {
            const CorrelatorTensor t = correlators(second_moments(S, thermal_occupations(c, w, T, g.guard), T));
            const std::pair<const char*, const Eigen::Matrix3d*> tables[] = {
                {"02", &t.two_mode02}, {"12", &t.two_mode12}, {"01", &t.two_mode01}};
            for (const auto& [name, M] : tables)
                for (int r = 0; r < 3; ++r)
                    for (int s = 0; s < 3; ++s)
                        out.row({fmt(w), fmt(w / Om), fmt(T), name,
                                 std::string{axis_char(Axis(r)), axis_char(Axis(s))}, fmt((*M)(r, s))});
            for (int r = 0; r < 3; ++r)
                for (int u = 0; u < 3; ++u)
                    for (int s = 0; s < 3; ++s)
                        out.row({fmt(w), fmt(w / Om), fmt(T), "012",
                                 std::string{axis_char(Axis(r)), axis_char(Axis(u)), axis_char(Axis(s))},
                                 fmt(t.three_mode[r][u][s])});
        }
    }
}

void run_oracle(const Globals& g, const PointFlags& f, int n_max) {
    const RunConfig rc = resolve(g, f);
    const FlowConfig c = rc.flow();
    Output out(g.out);
    out.meta(rc, g);
    out.row({"omega_over_Omega", "n_max", "captured_norm", "max_deviation", "ghz_yyz", "ghz_yzy", "ghz_zyy", "ghz_zzz"});
    const double Om = threshold_omega(c);
    for (double w : frequencies(rc, c, f, g.guard)) {
        const ScatteringMatrix S = smatrix(c, w, ScatteringOptions{.guard = g.guard});
        const int n = n_max > 0 ? n_max : fock_truncation(S);
        const FockState st = fock_oracle_state(S, n);
        const PseudospinMatrices P(n);
        const Tensor3 T = three_mode_correlators(second_moments(S, {}, 0.0));
        double dev = 0.0;
        for (int r = 0; r < 3; ++r)
            for (int u = 0; u < 3; ++u)
                for (int t = 0; t < 3; ++t)
                    dev = std::max(dev, std::abs(fock_oracle_correlator(st, P, Axis(r), Axis(u), Axis(t)) - T[r][u][t]));
        const GhzResiduals gr = ghz_eigenrelation_check(st, P);
        out.row({fmt(w / Om), std::to_string(n), fmt(st.captured_norm), fmt(dev), fmt(gr.residual[0]),
                 fmt(gr.residual[1]), fmt(gr.residual[2]), fmt(gr.residual[3])});
    }
}

void run_bell(const Globals& g, const PointFlags& f, const std::string& which, int restarts) {
    const RunConfig rc = resolve(g, f);
    const FlowConfig c = rc.flow();
    GaSettings gs;
    gs.threads = g.threads;
    if (restarts > 0) gs.restarts = restarts;
    Output out(g.out);
    out.meta(rc, g);
    std::vector<std::string> cols = {"omega", "omega_over_Omega", "T", "value"};
    if (which == "chsh") {
        cols = {"omega", "omega_over_Omega", "T", "chsh02", "chsh12", "chsh02_cbasis", "chsh12_cbasis"};
    } else if (which == "svetlichny" || which == "mermin") {
        for (const char* v : {"a", "ap", "b", "bp", "c", "cp"}) {
            cols.push_back(std::string("theta_") + v);
            cols.push_back(std::string("phi_") + v);
        }
        for (const char* d : {"generations", "restarts", "converged", "seed"}) cols.push_back(d);
    } else {
        throw ConfigError("bell expects chsh, svetlichny or mermin");
    }
    out.row(cols);
    const double Om = threshold_omega(c);
    std::uint64_t index = 0;
    for (double w : frequencies(rc, c, f, g.guard)) {
        const ScatteringMatrix S = smatrix(c, w, ScatteringOptions{.guard = g.guard});
        for (double T : rc.temperatures) {
            const SecondMoments m = second_moments(S, thermal_occupations(c, w, T, g.guard), T);
            std::vector<std::string> cells = {fmt(w), fmt(w / Om), fmt(T)};
            if (which == "chsh") {
                const BellResult b0 = chsh_parameter(m, {0, 2}), b1 = chsh_parameter(m, {1, 2});
                for (double v : {b0.value, b1.value, b0.c_basis_value, b1.c_basis_value}) cells.push_back(fmt(v));
            } else {
                const Tensor3 t = three_mode_correlators(m);
                const std::uint64_t seed = row_seed(g.seed, index);
                const BellResult b = which == "mermin" ? mermin_parameter(t, gs, seed) : svetlichny_parameter(t, gs, seed);
                cells.push_back(fmt(b.value));
                for (double a : b.frame->angles) cells.push_back(fmt(a));
                cells.push_back(std::to_string(b.generations));
                cells.push_back(std::to_string(b.restarts));
                cells.push_back(b.converged ? "1" : "0");
                cells.push_back(std::to_string(b.seed));
            }
            out.row(cells);
            ++index;
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Analogue black-hole scattering, entanglement and Bell-parameter toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "key = value run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "random seed");
    app.add_option("--out", g.out, "output file (or directory for figure)");
    app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--guard", g.guard, "relative threshold guard band")->check(CLI::PositiveNumber);

    PointFlags f;
    std::string region = "d", pairs = "02,12,01", bell_kind, figure_id, quantities, mu_list;
    int n_max = 0, restarts = 0, omega_points = 30;
    bool resume = false;

    auto* spectrum = app.add_subcommand("spectrum", "dispersion roots and group velocities");
    add_point_flags(spectrum, f, true, false);
    spectrum->add_option("--region", region, "u or d")->check(CLI::IsMember({"u", "d"}));

    auto* smat = app.add_subcommand("smatrix", "scattering matrix, squeezing and skew-unitarity residual");
    add_point_flags(smat, f, true, false);

    auto* ent = app.add_subcommand("entanglement", "PPT measure, CHSH parameter and purity");
    add_point_flags(ent, f);
    ent->add_option("--pairs", pairs, "comma separated mode pairs");

    auto* corr = app.add_subcommand("correlators", "two- and three-mode pseudo-spin correlators");
    add_point_flags(corr, f);

    auto* orc = app.add_subcommand("oracle", "number-basis cross-check of the correlators at T = 0");
    add_point_flags(orc, f, true, false);
    orc->add_option("--n-max", n_max, "truncation (default: convergence rule)");

    auto* bell = app.add_subcommand("bell", "CHSH, Svetlichny or Mermin parameter");
    bell->add_option("which", bell_kind, "chsh | svetlichny | mermin")->required();
    add_point_flags(bell, f);
    bell->add_option("--restarts", restarts, "GA restarts");

    auto* fig = app.add_subcommand("figure", "reproduce the data behind a figure");
    fig->add_option("id", figure_id, "fig3..fig8, figc1, figi1..figi6")->required();
    fig->add_option("--omega-points", omega_points, "frequency points per curve");
    fig->add_option("--restarts", restarts, "GA restarts");

    auto* sw = app.add_subcommand("sweep", "tabulate quantities over (m_u, T, omega)");
    add_point_flags(sw, f);
    sw->add_option("--m-u-list", mu_list, "comma separated m_u values");
    sw->add_option("--quantities", quantities, "comma separated: lambda02, chsh02, svetlichny, mermin, ...");
    sw->add_flag("--resume", resume, "keep rows already present in the output file");
    sw->add_option("--restarts", restarts, "GA restarts");

    CLI11_PARSE(app, argc, argv);

    try {
        if (spectrum->parsed()) run_spectrum(g, f, region);
        if (smat->parsed()) run_smatrix(g, f);
        if (ent->parsed()) run_entanglement(g, f, pairs);
        if (corr->parsed()) run_correlators(g, f);
        if (orc->parsed()) run_oracle(g, f, n_max);
        if (bell->parsed()) run_bell(g, f, bell_kind, restarts);
        if (fig->parsed()) {
            FigureOptions o;
            o.out_dir = g.out.empty() ? "." : g.out;
            o.seed = g.seed;
            o.threads = g.threads;
            o.guard = g.guard;
            o.omega_points = omega_points;
            if (restarts > 0) o.ga_restarts = restarts;
            const FigureOutput r = reproduce_figure(parse_figure(figure_id), o);
            for (const auto& p : r.csv_files) std::cout << p << '\n';
        }
        if (sw->parsed()) {
            const RunConfig rc = resolve(g, f);
            SweepSpec s;
            s.kind = rc.kind;
            s.m_u = mu_list.empty() ? std::vector<double>{rc.m_u} : parse_list(mu_list, "m_u");
            s.m_d = rc.m_d;
            s.grid = rc.grid;
            s.temperatures = rc.temperatures;
            if (!quantities.empty()) {
                s.quantities.clear();
                for (const auto& q : split(quantities, ',')) s.quantities.push_back(parse_quantity(q));
            }
            s.out = g.out.empty() ? "sweep.csv" : g.out;
            s.seed = g.seed;
            s.threads = g.threads;
            s.guard = g.guard;
            s.resume = resume;
            if (restarts > 0) s.ga.restarts = restarts;
            for (const auto& [k, v] : rc.raw) s.extra_meta.push_back("config " + k + " = " + v);
            const auto rows = run_sweep(s);
            std::size_t failed = 0;
            for (const auto& r : rows) failed += r.status != "ok";
            std::cerr << rows.size() << " rows written to " << s.out << " (" << failed << " with errors)\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

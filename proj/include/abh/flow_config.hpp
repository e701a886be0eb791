#pragma once

// Background flows of a one-dimensional condensate with a sonic horizon at x = 0.
// Units: hbar = m = 1, upstream sound speed c_u = 1, upstream density n_u = 1,
// so that xi_u = 1 and g_u n_u = 1.

#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include "abh/errors.hpp"

namespace abh {

using cplx = std::complex<double>;

enum class FlowKind { Waterfall, DeltaPeak, FlatProfile };
enum class Region { Upstream, Downstream };

inline std::string to_string(FlowKind k) {
    switch (k) {
        case FlowKind::Waterfall: return "waterfall";
        case FlowKind::DeltaPeak: return "delta";
        case FlowKind::FlatProfile: return "flat";
    }
    return "?";
}

inline FlowKind parse_flow_kind(const std::string& s) {
    if (s == "waterfall") return FlowKind::Waterfall;
    if (s == "delta" || s == "delta_peak" || s == "deltapeak") return FlowKind::DeltaPeak;
    if (s == "flat" || s == "flat_profile") return FlowKind::FlatProfile;
    throw ConfigError("unknown flow kind '" + s + "'");
}

// Asymptotic plane-wave background Phi = sqrt(n) exp(i (k x + beta)) in one region.
struct UniformRegion {
    double n;     // density
    double k;     // flow velocity (= wavenumber of the condensate phase)
    double beta;  // phase offset
    double g;     // interaction constant
    double c;     // sound speed sqrt(g n)
    double potential;
};

struct FlowConfig {
    FlowKind kind;
    double m_u, m_d;
    double n_u, n_d;
    double V_u, V_d;
    double c_u, c_d;
    double xi_u, xi_d;
    double g_u, g_d;

    double mu;          // chemical potential, 1 + m_u^2 / 2
    double barrier;     // delta-peak strength lambda in U = lambda delta(x); 0 otherwise
    double soliton_x0;  // centre of the upstream soliton portion (0 for waterfall)

    UniformRegion region(Region r) const {
        if (r == Region::Upstream) {
            return {n_u, V_u, upstream_phase(), g_u, c_u, 0.0};
        }
        return {n_d, V_d, downstream_phase(), g_d, c_d, mu - 0.5 * V_d * V_d - g_d * n_d};
    }

    // Phase of Phi(x -> -infinity) relative to exp(i m_u x).
    double upstream_phase() const {
        if (kind == FlowKind::FlatProfile) return 0.0;
        double a = std::sqrt(1.0 - m_u * m_u);
        return std::arg(cplx(-a, -m_u));
    }

    double downstream_phase() const { return std::arg(field(0.0)); }

    // Condensate wave function for x <= 0 (x = 0 gives the value at the junction).
    cplx field(double x) const {
        if (kind == FlowKind::FlatProfile || x > 0.0) {
            if (x > 0.0 && kind != FlowKind::FlatProfile) {
                return std::sqrt(n_d) * std::exp(cplx(0.0, V_d * x + downstream_phase()));
            }
            return std::exp(cplx(0.0, V_u * x));
        }
        double a = std::sqrt(1.0 - m_u * m_u);
        return std::exp(cplx(0.0, m_u * x)) * cplx(a * std::tanh(a * (x - soliton_x0)), -m_u);
    }

    double interaction(double x) const { return x > 0.0 ? g_d : g_u; }
    double potential(double x) const { return x > 0.0 ? region(Region::Downstream).potential : 0.0; }
};

// Builds one of the three flow families from the upstream Mach number.
// m_d is required for FlatProfile and rejected for the other kinds.
inline FlowConfig build_config(FlowKind kind, double m_u, std::optional<double> m_d = std::nullopt) {
    if (!(m_u > 0.0 && m_u < 1.0)) throw OutOfRangeMach("m_u must lie in (0, 1)");
    if (m_d && kind != FlowKind::FlatProfile) {
        throw KindMismatch("m_d is fixed by m_u for the " + to_string(kind) + " configuration");
    }
    if (kind == FlowKind::FlatProfile) {
        if (!m_d) throw KindMismatch("flat profile requires m_d");
        if (!(*m_d > 1.0)) throw OutOfRangeMach("m_d must exceed 1");
    }

    FlowConfig c{};
    c.kind = kind;
    c.m_u = m_u;
    c.n_u = 1.0;
    c.V_u = m_u;
    c.c_u = 1.0;
    c.xi_u = 1.0;
    c.g_u = 1.0;
    c.mu = 1.0 + 0.5 * m_u * m_u;

    const double a = std::sqrt(1.0 - m_u * m_u);
    switch (kind) {
        case FlowKind::Waterfall:
            c.n_d = m_u * m_u;
            c.V_d = 1.0 / m_u;
            c.g_d = 1.0;
            break;
        case FlowKind::DeltaPeak: {
            c.n_d = 0.25 * m_u * m_u * (1.0 + std::sqrt(1.0 + 8.0 / (m_u * m_u)));
            c.V_d = m_u / c.n_d;
            c.g_d = 1.0;
            // Soliton portion: |Phi(0)|^2 = m_u^2 + a^2 tau^2 = n_d with tau = tanh(a x0).
            double tau = std::sqrt(std::max(0.0, (c.n_d - m_u * m_u) / (1.0 - m_u * m_u)));
            c.soliton_x0 = std::atanh(tau) / a;
            // Derivative jump Phi'(0+) - Phi'(0-) = 2 lambda Phi(0).
            c.barrier = a * a * a * tau * (1.0 - tau * tau) / (2.0 * c.n_d);
            break;
        }
        case FlowKind::FlatProfile:
            c.n_d = 1.0;
            c.V_d = m_u;
            c.g_d = m_u * m_u / (*m_d * *m_d);
            break;
    }
    c.c_d = std::sqrt(c.g_d * c.n_d);
    c.xi_d = 1.0 / c.c_d;
    c.m_d = c.V_d / c.c_d;
    if (kind == FlowKind::FlatProfile) c.m_d = *m_d;
    return c;
}

struct MeanFieldValidity {
    bool valid;
    double lower_margin;  // n_typ a / (a / a_perp)^2
    double upper_margin;  // 1 / (n_typ a)
};

// One-dimensional mean-field regime (a/a_perp)^2 << n a << 1, each inequality
// required to hold by at least `strictness`.
inline MeanFieldValidity check_1d_mean_field(double a_over_aperp, double n_typ_a, double strictness = 10.0) {
    MeanFieldValidity r{};
    r.lower_margin = n_typ_a / (a_over_aperp * a_over_aperp);
    r.upper_margin = 1.0 / n_typ_a;
    r.valid = a_over_aperp > 0.0 && n_typ_a > 0.0 && r.lower_margin >= strictness && r.upper_margin >= strictness;
    return r;
}

struct DensityVelocity {
    double density;
    double velocity;
};

inline DensityVelocity background_profile(const FlowConfig& c, double x) {
    if (c.kind == FlowKind::FlatProfile) return {c.n_u, c.V_u};
    if (x >= 0.0) return {c.n_d, c.V_d};
    double n = std::norm(c.field(x));
    return {n, c.n_u * c.V_u / n};
}

}  // namespace abh

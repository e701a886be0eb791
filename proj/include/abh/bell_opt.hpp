#pragma once

// Bell-type witnesses built on pseudo-spin correlators: analytic CHSH optimum,
// Svetlichny and Mermin expectations, and a seeded genetic algorithm over the six
// measurement directions.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "abh/gaussian_state.hpp"
#include "abh/pseudospin.hpp"

namespace abh {

// a, a', b, b', c, c' as (polar, azimuth) pairs.
struct MeasurementFrame {
    std::array<double, 12> angles{};

    Eigen::Vector3d vec(int k) const {
        const double t = angles[2 * k], p = angles[2 * k + 1];
        return {std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t)};
    }
    Eigen::Vector3d a() const { return vec(0); }
    Eigen::Vector3d ap() const { return vec(1); }
    Eigen::Vector3d b() const { return vec(2); }
    Eigen::Vector3d bp() const { return vec(3); }
    Eigen::Vector3d c() const { return vec(4); }
    Eigen::Vector3d cp() const { return vec(5); }

    static MeasurementFrame from_vectors(const std::array<Eigen::Vector3d, 6>& v) {
        MeasurementFrame f;
        for (int k = 0; k < 6; ++k) {
            const Eigen::Vector3d u = v[k].normalized();
            f.angles[2 * k] = std::acos(std::clamp(u.z(), -1.0, 1.0));
            f.angles[2 * k + 1] = std::atan2(u.y(), u.x());
        }
        return f;
    }
};

enum class BellKind { CHSH, Svetlichny, Mermin };

inline std::string to_string(BellKind k) {
    switch (k) {
        case BellKind::CHSH: return "chsh";
        case BellKind::Svetlichny: return "svetlichny";
        case BellKind::Mermin: return "mermin";
    }
    return "?";
}

struct BellResult {
    BellKind kind = BellKind::CHSH;
    double value = 0.0;
    std::optional<MeasurementFrame> frame;
    double c_basis_value = 0.0;  // CHSH only: the 2 sqrt(l1 + l2) route on the c-basis table
    int generations = 0;
    int restarts = 0;
    bool converged = true;
    std::uint64_t seed = 0;
};

inline double chsh_from_table(const Eigen::Matrix3d& T) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(T.transpose() * T, Eigen::EigenvaluesOnly);
    const auto l = es.eigenvalues();
    return 2.0 * std::sqrt(std::max(0.0, l(1) + l(2)));
}

// StandardForm tables are diagonal, so the eigenvalue route reduces to 2 sqrt(Txx^2 + Tzz^2).
inline BellResult chsh_optimal(const Eigen::Matrix3d& T, CorrelatorBasis basis) {
    BellResult r;
    r.kind = BellKind::CHSH;
    if (basis == CorrelatorBasis::StandardForm) {
        r.value = 2.0 * std::sqrt(T(0, 0) * T(0, 0) + T(2, 2) * T(2, 2));
    } else {
        r.value = chsh_from_table(T);
    }
    r.c_basis_value = chsh_from_table(T);
    return r;
}

// Reported CHSH parameter of the pair (i|2): standard-form value, c-basis value kept alongside.
inline BellResult chsh_parameter(const SecondMoments& m, ModePair p) {
    BellResult r = chsh_optimal(two_mode_correlators(m, p, CorrelatorBasis::StandardForm), CorrelatorBasis::StandardForm);
    r.c_basis_value = chsh_from_table(two_mode_correlators(m, p, CorrelatorBasis::CBasis));
    return r;
}

inline double contract(const Tensor3& T, const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
    double s = 0.0;
    for (int r = 0; r < 3; ++r)
        for (int u = 0; u < 3; ++u) {
            const double ab = a(r) * b(u);
            if (ab == 0.0) continue;
            for (int t = 0; t < 3; ++t) s += ab * c(t) * T[r][u][t];
        }
    return s;
}

inline double svetlichny_expectation(const Tensor3& T, const MeasurementFrame& f) {
    const auto a = f.a(), ap = f.ap(), b = f.b(), bp = f.bp(), c = f.c(), cp = f.cp();
    return 0.5 * (contract(T, a, b, cp) + contract(T, ap, b, cp) + contract(T, a, bp, cp) - contract(T, ap, bp, cp) +
                  contract(T, ap, bp, c) + contract(T, a, bp, c) + contract(T, ap, b, c) - contract(T, a, b, c));
}

inline double mermin_expectation(const Tensor3& T, const MeasurementFrame& f) {
    const auto a = f.a(), ap = f.ap(), b = f.b(), bp = f.bp(), c = f.c(), cp = f.cp();
    return -contract(T, a, b, c) + contract(T, a, bp, cp) + contract(T, ap, b, cp) + contract(T, ap, bp, c);
}

// Mermin operator with primed and unprimed directions exchanged.
inline double mermin_prime_expectation(const Tensor3& T, const MeasurementFrame& f) {
    const auto a = f.a(), ap = f.ap(), b = f.b(), bp = f.bp(), c = f.c(), cp = f.cp();
    return -contract(T, ap, bp, cp) + contract(T, ap, b, c) + contract(T, a, bp, c) + contract(T, a, b, cp);
}

inline MeasurementFrame frame_from(const Eigen::Vector3d& a, const Eigen::Vector3d& ap, const Eigen::Vector3d& b,
                                   const Eigen::Vector3d& bp, const Eigen::Vector3d& c, const Eigen::Vector3d& cp) {
    return MeasurementFrame::from_vectors({a, ap, b, bp, c, cp});
}

// a = (a+ + a-)/sqrt2, a' = (a+ - a-)/sqrt2 with a+ = b = c' = e_z, a- = -b' = -c = e_y.
inline MeasurementFrame svetlichny_reference_frame() {
    const Eigen::Vector3d z = Eigen::Vector3d::UnitZ(), y = Eigen::Vector3d::UnitY();
    return frame_from((z + y) / std::sqrt(2.0), (z - y) / std::sqrt(2.0), z, -y, -y, z);
}

// Same frame with b' reversed; it reaches 2 sqrt2 on the zero-frequency table
// T_zzz = T_yyz = T_yzy = -T_zyy = 1.
inline MeasurementFrame svetlichny_low_frequency_frame() {
    const Eigen::Vector3d z = Eigen::Vector3d::UnitZ(), y = Eigen::Vector3d::UnitY();
    return frame_from((z + y) / std::sqrt(2.0), (z - y) / std::sqrt(2.0), z, y, -y, z);
}

// a = b' = c' = e_z, a' = b = c = e_y.
inline MeasurementFrame mermin_low_frequency_frame() {
    const Eigen::Vector3d z = Eigen::Vector3d::UnitZ(), y = Eigen::Vector3d::UnitY();
    return frame_from(z, y, y, z, y, z);
}

struct ReducedFrame {
    Eigen::Vector3d a_plus, a_minus, b, bp, c, cp;
};

// max over the a-plane angle of the Svetlichny expectation: sqrt((W + Z)^2 + (X - Y)^2).
inline double svetlichny_reduced_max(double W, double X, double Y, double Z) {
    return std::sqrt((W + Z) * (W + Z) + (X - Y) * (X - Y));
}

inline double svetlichny_reduced_max(const Tensor3& T, const ReducedFrame& f) {
    const double W = contract(T, f.a_plus, f.b, f.cp);
    const double X = contract(T, f.a_minus, f.bp, f.cp);
    const double Y = contract(T, f.a_minus, f.b, f.c);
    const double Z = contract(T, f.a_plus, f.bp, f.c);
    return svetlichny_reduced_max(W, X, Y, Z);
}

// Spectrum of the squared Svetlichny operator for in-plane directions with relative
// angles (ta, tb, tc); each Pi_z product takes the values +-1.
inline std::array<double, 8> svetlichny_square_spectrum(double ta, double tb, double tc) {
    std::array<double, 8> ev{};
    for (int k = 0; k < 8; ++k) {
        const int z0 = (k & 1) ? -1 : 1, z1 = (k & 2) ? -1 : 1, z2 = (k & 4) ? -1 : 1;
        ev[k] = 2.0 + 2.0 * std::cos(ta) * std::cos(tb) * std::cos(tc) + 2.0 * std::sin(ta) * std::sin(tb) * z0 * z1 +
                2.0 * std::sin(tb) * std::sin(tc) * z1 * z2 + 2.0 * std::sin(ta) * std::sin(tc) * z0 * z2;
    }
    return ev;
}

struct GaSettings {
    int population = 200;
    double elite_fraction = 0.1;
    int restarts = 20;
    double initial_scale = 0.5;     // standard deviation of angle mutations, radians
    int stagnation_limit = 15;      // generations without improvement before halving the scale
    double tolerance = 1e-8;        // improvement below which a generation counts as stagnant
    double min_scale = 1e-5;      // below this the compass polish takes over
    int max_generations = 4000;
    int threads = 1;
};

namespace detail {

struct RestartOutcome {
    double value = -1e300;
    MeasurementFrame frame;
    int generations = 0;
    bool converged = false;
};

inline MeasurementFrame random_frame(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MeasurementFrame f;
    for (int k = 0; k < 6; ++k) {
        f.angles[2 * k] = std::acos(1.0 - 2.0 * u(rng));
        f.angles[2 * k + 1] = 2.0 * M_PI * u(rng);
    }
    return f;
}

// Compass search on the twelve angles, used to settle the best individual of a restart.
inline void polish(const std::function<double(const MeasurementFrame&)>& objective, MeasurementFrame& f, double& value) {
    for (double h = 1e-2; h > 1e-9; h *= 0.5) {
        bool moved = true;
        for (int sweep = 0; moved && sweep < 50; ++sweep) {
            moved = false;
            for (int k = 0; k < 12; ++k)
                for (double sgn : {1.0, -1.0}) {
                    MeasurementFrame g = f;
                    g.angles[k] += sgn * h;
                    const double v = objective(g);
                    if (v > value + 1e-14) {
                        value = v;
                        f = g;
                        moved = true;
                    }
                }
        }
    }
}

inline RestartOutcome ga_restart(const std::function<double(const MeasurementFrame&)>& objective,
                                 const std::vector<MeasurementFrame>& injected, const GaSettings& s,
                                 std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int n = std::max(4, s.population);
    const int n_elite = std::max(2, static_cast<int>(std::lround(s.elite_fraction * n)));

    std::vector<std::pair<double, MeasurementFrame>> pop;
    pop.reserve(n);
    for (const auto& f : injected)
        if (static_cast<int>(pop.size()) < n) pop.emplace_back(objective(f), f);
    while (static_cast<int>(pop.size()) < n) {
        MeasurementFrame f = random_frame(rng);
        pop.emplace_back(objective(f), f);
    }
    auto by_value = [](const auto& l, const auto& r) { return l.first > r.first; };

    RestartOutcome out;
    double scale = s.initial_scale;
    int stagnant = 0;
    std::stable_sort(pop.begin(), pop.end(), by_value);
    double best = pop.front().first;
    int gen = 0;
    for (; gen < s.max_generations; ++gen) {
        std::uniform_int_distribution<int> pick(0, n_elite - 1);
        std::uniform_int_distribution<int> coin(0, 1);
        std::vector<std::pair<double, MeasurementFrame>> next(pop.begin(), pop.begin() + n_elite);
        while (static_cast<int>(next.size()) < n) {
            const MeasurementFrame& p1 = pop[pick(rng)].second;
            const MeasurementFrame& p2 = pop[pick(rng)].second;
            MeasurementFrame child;
            for (int k = 0; k < 6; ++k) {
                const MeasurementFrame& src = coin(rng) ? p1 : p2;
                child.angles[2 * k] = src.angles[2 * k] + scale * gauss(rng);
                child.angles[2 * k + 1] = src.angles[2 * k + 1] + scale * gauss(rng);
            }
            next.emplace_back(objective(child), child);
        }
        pop.swap(next);
        std::stable_sort(pop.begin(), pop.end(), by_value);
        const double now = pop.front().first;
        if (now - best < s.tolerance) {
            if (++stagnant >= s.stagnation_limit) {
                scale *= 0.5;
                stagnant = 0;
            }
        } else {
            stagnant = 0;
        }
        best = std::max(best, now);
        if (scale < s.min_scale) {
            out.converged = true;
            break;
        }
    }
    out.value = pop.front().first;
    out.frame = pop.front().second;
    out.generations = gen;
    polish(objective, out.frame, out.value);
    return out;
}

}  // namespace detail

// Maximises objective(frame). Restart k uses the k-th draw of mt19937_64(seed) as its own
// seed, so the result does not depend on the thread count. Injected frames join the
// initial population of the first restart only; the others start fully random.
inline BellResult ga_maximize(const std::function<double(const MeasurementFrame&)>& objective,
                              const std::vector<MeasurementFrame>& injected, const GaSettings& s, std::uint64_t seed,
                              BellKind kind = BellKind::Svetlichny) {
    std::mt19937_64 master(seed);
    std::vector<std::uint64_t> seeds(std::max(1, s.restarts));
    for (auto& v : seeds) v = master();
    std::vector<detail::RestartOutcome> outcomes(seeds.size());
    const std::vector<MeasurementFrame> none;
    const int threads = std::max(1, std::min<int>(s.threads, static_cast<int>(seeds.size())));
    if (threads == 1) {
        for (std::size_t k = 0; k < seeds.size(); ++k) outcomes[k] = detail::ga_restart(objective, k == 0 ? injected : none, s, seeds[k]);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t k = t; k < seeds.size(); k += threads)
                    outcomes[k] = detail::ga_restart(objective, k == 0 ? injected : none, s, seeds[k]);
            });
        for (auto& th : pool) th.join();
    }
    BellResult r;
    r.kind = kind;
    r.seed = seed;
    r.restarts = static_cast<int>(seeds.size());
    r.converged = true;
    std::size_t best = 0;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        r.generations += outcomes[k].generations;
        r.converged = r.converged && outcomes[k].converged;
        if (outcomes[k].value > outcomes[best].value) best = k;
    }
    r.value = outcomes[best].value;
    r.frame = outcomes[best].frame;
    return r;
}

inline BellResult svetlichny_parameter(const Tensor3& T, const GaSettings& s = {}, std::uint64_t seed = 1) {
    auto obj = [&T](const MeasurementFrame& f) { return svetlichny_expectation(T, f); };
    return ga_maximize(obj, {svetlichny_reference_frame(), svetlichny_low_frequency_frame()}, s, seed,
                       BellKind::Svetlichny);
}

inline BellResult mermin_parameter(const Tensor3& T, const GaSettings& s = {}, std::uint64_t seed = 1) {
    auto obj = [&T](const MeasurementFrame& f) { return std::abs(mermin_expectation(T, f)); };
    return ga_maximize(obj, {mermin_low_frequency_frame()}, s, seed, BellKind::Mermin);
}

// Random physical three-mode covariance: passive mixing, single-mode squeezing and a
// second passive mixing applied to a thermal state (symplectic eigenvalues >= 1).
inline Mat6 random_physical_covariance(std::mt19937_64& rng, double max_squeeze = 1.5, double max_thermal = 1.0) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto random_unitary = [&] {
        Eigen::Matrix3cd z;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) z(i, j) = cplx(g(rng), g(rng));
        Eigen::HouseholderQR<Eigen::Matrix3cd> qr(z);
        Eigen::Matrix3cd q = qr.householderQ();
        return q;
    };
    Mat6 D = Mat6::Zero();
    for (int k = 0; k < 3; ++k) D(2 * k, 2 * k) = D(2 * k + 1, 2 * k + 1) = 1.0 + max_thermal * u(rng);
    Mat6 Sq = Mat6::Zero();
    for (int k = 0; k < 3; ++k) {
        const double r = max_squeeze * u(rng);
        Sq(2 * k, 2 * k) = std::exp(r);
        Sq(2 * k + 1, 2 * k + 1) = std::exp(-r);
    }
    const Mat6 M = passive_symplectic(random_unitary()) * Sq * passive_symplectic(random_unitary());
    Mat6 s = M * D * M.transpose();
    return 0.5 * (s + s.transpose());
}

}  // namespace abh

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "podrom/matrix.hpp"
#include "podrom/rng.hpp"

namespace podrom {

struct ParamPoint {
    std::vector<double> mu;
    double t = 0.0; // fixed at 0 for time-independent problems
};

struct Box {
    std::vector<double> lo, hi;

    std::size_t dim() const { return lo.size(); }

    double volume() const {
        double v = 1.0;
        for (std::size_t d = 0; d < lo.size(); ++d) v *= hi[d] - lo[d];
        return v;
    }

    bool contains(std::span<const double> x, double slack = 0.0) const {
        if (x.size() != lo.size()) return false;
        for (std::size_t d = 0; d < lo.size(); ++d)
            if (x[d] < lo[d] - slack || x[d] > hi[d] + slack) return false;
        return true;
    }
};

enum class ProblemKind { benchmark, heat1d };

struct ProblemSpec {
    ProblemKind kind = ProblemKind::heat1d;
    Box param_box;
    double t_final = 0.0; // 0 marks a time-independent problem
    std::size_t n_dofs = 0;
    double domain_length = 0.0;
    double beta = 3.0; // benchmark regularity exponent

    static ProblemSpec make_benchmark(double beta_value, std::size_t n_dofs = 1000) {
        ProblemSpec s;
        s.kind = ProblemKind::benchmark;
        s.param_box = {{0.0, 0.0, 1.0}, {1.0, 1.0, 2.0}};
        s.t_final = 0.0;
        s.n_dofs = n_dofs;
        s.domain_length = 1.0;
        s.beta = beta_value;
        return s;
    }

    static ProblemSpec make_heat1d(std::size_t n_dofs = 100) {
        ProblemSpec s;
        s.kind = ProblemKind::heat1d;
        s.param_box = {{0.0}, {1.0}};
        s.t_final = 1.0;
        s.n_dofs = n_dofs;
        s.domain_length = std::numbers::pi;
        return s;
    }

    // Uniform nodes including both endpoints.
    std::vector<double> grid() const {
        std::vector<double> x(n_dofs);
        const double h = domain_length / static_cast<double>(n_dofs - 1);
        for (std::size_t i = 0; i < n_dofs; ++i) x[i] = static_cast<double>(i) * h;
        return x;
    }

    double domain_volume() const {
        return t_final > 0.0 ? param_box.volume() * t_final : param_box.volume();
    }
};

struct SnapshotSet {
    DenseMatrix U; // n_dofs x (N_s * N_t), sample-major columns
    std::vector<ParamPoint> points;
    std::size_t n_samples = 0;
    std::size_t n_times = 0;
    double domain_volume = 1.0;

    std::size_t n_data() const { return n_samples * n_times; }
};

/// u_beta(x, mu) = mu3 |x - mu1|^beta exp(-mu2 x), evaluated on the grid.
inline std::vector<double> eval_benchmark(std::span<const double> mu, double beta,
                                          std::span<const double> grid) {
    if (mu.size() != 3) throw std::invalid_argument("eval_benchmark: mu must have 3 components");
    if (beta <= 0.0) throw std::invalid_argument("eval_benchmark: beta must be positive");
    const bool canonical = std::abs(beta - 1.5) < 1e-9 || std::abs(beta - 7.0 / 3.0) < 1e-9 ||
                           std::abs(beta - 3.0) < 1e-9;
    if (!canonical)
        std::cerr << "warning: benchmark beta=" << beta << " outside the studied set {3/2, 7/3, 3}\n";
    std::vector<double> u(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        u[i] = mu[2] * std::pow(std::abs(grid[i] - mu[0]), beta) * std::exp(-mu[1] * grid[i]);
    return u;
}

/// Crank-Nicolson solver for u_t - u_xx = u + f(x,t) on (0, length) with a
/// strong Dirichlet value at x=0 and a second-order ghost-node Neumann flux
/// at x=length. The march lands exactly on every requested output instant;
/// between consecutive instants it takes uniform substeps no larger than
/// t_final / granularity.
inline std::vector<std::vector<double>> heat_rod_solve(
    std::size_t n_nodes, double length, double t_final,
    const std::function<double(double, double)>& forcing,
    const std::function<double(double)>& dirichlet_left,
    const std::function<double(double)>& neumann_right,
    const std::function<double(double)>& initial, std::span<const double> times,
    std::size_t granularity = 2000) {
    if (n_nodes < 3) throw std::invalid_argument("heat_rod_solve: need at least 3 nodes");
    if (t_final <= 0.0) throw std::invalid_argument("heat_rod_solve: t_final must be positive");
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        if (t <= 0.0 || t > t_final * (1.0 + 1e-12))
            throw std::invalid_argument("heat_rod_solve: requested instant outside (0, T]");
        if (k > 0 && t <= times[k - 1])
            throw std::invalid_argument("heat_rod_solve: requested instants must be increasing");
    }

    const std::size_t m = n_nodes - 1; // free unknowns, nodes 1..n_nodes-1
    const double h = length / static_cast<double>(n_nodes - 1);
    const double ih2 = 1.0 / (h * h);
    const double dt_cap = t_final / static_cast<double>(granularity);

    std::vector<double> u(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) u[i] = initial(static_cast<double>(i) * h);
    u[0] = dirichlet_left(0.0); // strong imposition from the start

    // L acts on the free nodes: diffusion + unit reaction. Boundary data enter
    // through the load vector b(t).
    auto apply_L = [&](const std::vector<double>& w, std::vector<double>& out) {
        for (std::size_t i = 0; i < m; ++i) {
            const double wm = (i == 0) ? 0.0 : w[i - 1];
            if (i + 1 < m) {
                out[i] = ih2 * (wm - 2.0 * w[i] + w[i + 1]) + w[i];
            } else {
                out[i] = ih2 * (2.0 * wm - 2.0 * w[i]) + w[i]; // ghost node, flux in b
            }
        }
    };
    auto load = [&](double t, std::vector<double>& b) {
        for (std::size_t i = 0; i < m; ++i) {
            const double x = static_cast<double>(i + 1) * h;
            b[i] = forcing(x, t);
        }
        b[0] += ih2 * dirichlet_left(t);
        b[m - 1] += 2.0 * neumann_right(t) / h;
    };

    std::vector<double> w(m), rhs(m), lw(m), b0(m), b1(m);
    std::vector<double> diag(m), lower(m), upper(m), cprime(m), dprime(m);
    for (std::size_t i = 0; i < m; ++i) w[i] = u[i + 1];

    std::vector<std::vector<double>> snapshots;
    snapshots.reserve(times.size());

    double t_now = 0.0;
    for (double t_out : times) {
        const double span_t = t_out - t_now;
        const std::size_t n_sub = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span_t / dt_cap - 1e-12)));
        const double dt = span_t / static_cast<double>(n_sub);

        // Assemble I - dt/2 L once per segment (tridiagonal).
        const double a = 0.5 * dt;
        for (std::size_t i = 0; i < m; ++i) {
            const bool last = (i + 1 == m);
            diag[i] = 1.0 - a * (-2.0 * ih2 + 1.0);
            lower[i] = (i == 0) ? 0.0 : -a * (last ? 2.0 * ih2 : ih2);
            upper[i] = last ? 0.0 : -a * ih2;
        }

        for (std::size_t sub = 0; sub < n_sub; ++sub) {
            const double t0 = t_now + static_cast<double>(sub) * dt;
            const double t1 = t0 + dt;
            apply_L(w, lw);
            load(t0, b0);
            load(t1, b1);
            for (std::size_t i = 0; i < m; ++i)
                rhs[i] = w[i] + a * lw[i] + a * (b0[i] + b1[i]);

            // Thomas algorithm
            cprime[0] = upper[0] / diag[0];
            dprime[0] = rhs[0] / diag[0];
            for (std::size_t i = 1; i < m; ++i) {
                const double denom = diag[i] - lower[i] * cprime[i - 1];
                cprime[i] = upper[i] / denom;
                dprime[i] = (rhs[i] - lower[i] * dprime[i - 1]) / denom;
            }
            w[m - 1] = dprime[m - 1];
            for (std::size_t i = m - 1; i > 0; --i) w[i - 1] = dprime[i - 1] - cprime[i - 1] * w[i];
        }
        t_now = t_out;

        u[0] = dirichlet_left(t_out);
        for (std::size_t i = 0; i < m; ++i) u[i + 1] = w[i];
        snapshots.push_back(u);
    }
    return snapshots;
}

inline double heat1d_dirichlet_value(double mu) {
    return 10.0 * (2.0 * mu * mu * mu - 3.0 * mu * mu + mu);
}

inline double heat1d_neumann_value(double mu) { return 2.0 * std::abs(1.0 - 2.0 * mu) - 1.0; }

/// The 1D IBVP: u_t - u_xx = u + 10 cos(x) sin(2 pi t) on (0, pi), with
/// mu-dependent boundary data and initial state.
inline std::vector<std::vector<double>> solve_heat_1d(double mu, const ProblemSpec& spec,
                                                      std::span<const double> times,
                                                      std::size_t granularity = 2000) {
    if (spec.kind != ProblemKind::heat1d) throw std::invalid_argument("solve_heat_1d: wrong problem kind");
    if (mu < 0.0 || mu > 1.0) throw std::invalid_argument("solve_heat_1d: mu outside [0,1]");
    const double gd = heat1d_dirichlet_value(mu);
    const double gn = heat1d_neumann_value(mu);
    return heat_rod_solve(
        spec.n_dofs, spec.domain_length, spec.t_final,
        [](double x, double t) { return 10.0 * std::cos(x) * std::sin(2.0 * std::numbers::pi * t); },
        [gd](double) { return gd; }, [gn](double) { return gn; },
        [gd, gn](double x) { return gd * std::cos(x) + gn * std::sin(x); }, times, granularity);
}

/// N_s iid uniform draws from the box; a pure function of the seed.
inline std::vector<std::vector<double>> sample_parameters(std::size_t n_samples, const Box& box,
                                                          std::uint64_t seed) {
    if (n_samples == 0) throw std::invalid_argument("sample_parameters: need at least one sample");
    if (box.dim() == 0) throw std::invalid_argument("sample_parameters: empty box");
    Rng rng(seed);
    std::vector<std::vector<double>> draws(n_samples);
    for (auto& mu : draws) {
        mu.resize(box.dim());
        for (std::size_t d = 0; d < box.dim(); ++d) mu[d] = rng.uniform(box.lo[d], box.hi[d]);
    }
    return draws;
}

/// Uniform time grid {dt, 2dt, ..., T} with dt = T/N_t; excludes t = 0.
inline std::vector<double> time_grid(std::size_t n_times, double t_final) {
    if (n_times == 0) throw std::invalid_argument("time_grid: N_t must be positive");
    if (t_final <= 0.0) throw std::invalid_argument("time_grid: T must be positive");
    std::vector<double> t(n_times);
    const double dt = t_final / static_cast<double>(n_times);
    for (std::size_t k = 0; k < n_times; ++k) t[k] = static_cast<double>(k + 1) * dt;
    t.back() = t_final;
    return t;
}

/// Assemble a snapshot set, columns ordered sample-major: (mu_1, all t),
/// (mu_2, all t), ... Column order is a pure function of (spec, N_s, N_t, seed).
inline SnapshotSet build_dataset(const ProblemSpec& spec, std::size_t n_samples, std::size_t n_times,
                                 std::uint64_t seed, std::size_t granularity = 2000) {
    const bool timeless = spec.t_final <= 0.0;
    if (timeless && n_times != 1)
        throw std::invalid_argument("build_dataset: time-independent problem requires N_t = 1");

    SnapshotSet set;
    set.n_samples = n_samples;
    set.n_times = n_times;
    set.domain_volume = spec.domain_volume();

    const std::vector<double> times = timeless ? std::vector<double>{0.0} : time_grid(n_times, spec.t_final);
    const auto mus = sample_parameters(n_samples, spec.param_box, seed);
    const auto grid = spec.grid();

    set.U = DenseMatrix(spec.n_dofs, n_samples * n_times);
    set.points.resize(n_samples * n_times);
    for (std::size_t j = 0; j < n_samples; ++j) {
        if (spec.kind == ProblemKind::benchmark) {
            const auto u = eval_benchmark(mus[j], spec.beta, grid);
            set_col(set.U, j, u);
            set.points[j] = {mus[j], 0.0};
        } else {
            const auto snaps = solve_heat_1d(mus[j][0], spec, times, granularity);
            for (std::size_t k = 0; k < n_times; ++k) {
                set_col(set.U, j * n_times + k, snaps[k]);
                set.points[j * n_times + k] = {mus[j], times[k]};
            }
        }
    }
    if (!set.U.all_finite()) throw std::runtime_error("build_dataset: solver produced non-finite data");
    return set;
}

} // namespace podrom

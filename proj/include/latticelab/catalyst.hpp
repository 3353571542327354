// catalyst.hpp -- the two applications: the parabolic Anderson equation with a
// single moving catalyst (lattice ODE solve + Feynman-Kac Monte Carlo) and the
// pinning model (exact transfer-operator partition functions, free energy).
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "latticelab/errors.hpp"
#include "latticelab/mc.hpp"
#include "latticelab/parallel.hpp"
#include "latticelab/rng.hpp"
#include "latticelab/walk.hpp"

namespace latticelab {

// ---------------------------------------------------------------------------
// Parabolic Anderson model: du/dt = kappa Lap u + gamma delta_{Y_t} u, u0 = 1,
// with Lap f(x) = (1/4) sum_{|y-x|=1} (f(y) - f(x)). X in the Feynman-Kac
// picture jumps at total rate kappa with uniform nearest-neighbor steps, which
// matches this Laplacian normalization.
// ---------------------------------------------------------------------------

struct PamConfig {
    double kappa = 1.0;
    double gamma = 1.0;
    double rho = 1.0;
    double t = 1.0;
    std::int64_t rbox = 20;
    double tol = 1e-8;
    double boundary_threshold = 1e-8;
    double min_box_factor = 3.0; // rbox >= ceil(factor * sqrt(t))

    void validate() const {
        if (kappa < 0.0 || rho < 0.0) throw Error("rates must be >= 0");
        if (!(t >= 0.0)) throw Error("horizon must be >= 0");
        if (!(tol > 0.0)) throw Error("solver tolerance must be > 0");
        if (rbox < static_cast<std::int64_t>(std::ceil(min_box_factor * std::sqrt(std::max(t, 0.0)))))
            throw BoxTooSmall("rbox must be >= ceil(" + std::to_string(min_box_factor) + " sqrt(t))");
    }
};

struct PamField {
    std::int64_t rbox = 0;
    std::vector<double> u;
    double boundary_mass_ratio = 0.0; // |u-1| mass in the outer two rings over the interior

    std::int64_t side() const { return 2 * rbox + 1; }
    double at(std::int64_t x, std::int64_t y) const { return u[(y + rbox) * side() + (x + rbox)]; }
};

namespace detail {

// kappa * discrete Laplacian with zero flux across the box boundary, plus the
// delta potential at the catalyst site.
inline void pam_rhs(const std::vector<double>& u, std::vector<double>& out, std::int64_t r, double kappa,
                    double gamma, Vec2 catalyst) {
    const std::int64_t side = 2 * r + 1;
    const double quarter = 0.25 * kappa;
    for (std::int64_t y = -r; y <= r; ++y) {
        for (std::int64_t x = -r; x <= r; ++x) {
            const std::size_t idx = (y + r) * side + (x + r);
            double acc = 0.0;
            if (x > -r) acc += u[idx - 1] - u[idx];
            if (x < r) acc += u[idx + 1] - u[idx];
            if (y > -r) acc += u[idx - side] - u[idx];
            if (y < r) acc += u[idx + side] - u[idx];
            out[idx] = quarter * acc;
        }
    }
    if (catalyst.norm_inf() <= r) {
        const std::size_t c = (catalyst.y + r) * side + (catalyst.x + r);
        out[c] += gamma * u[c];
    }
}

// One embedded Cash-Karp 4(5) step; returns the max-norm error estimate.
inline double pam_rk_step(std::vector<double>& u, double dt, std::int64_t r, double kappa, double gamma,
                          Vec2 catalyst, std::vector<std::vector<double>>& work) {
    static constexpr double b21 = 1.0 / 5.0;
    static constexpr double b31 = 3.0 / 40.0, b32 = 9.0 / 40.0;
    static constexpr double b41 = 3.0 / 10.0, b42 = -9.0 / 10.0, b43 = 6.0 / 5.0;
    static constexpr double b51 = -11.0 / 54.0, b52 = 5.0 / 2.0, b53 = -70.0 / 27.0, b54 = 35.0 / 27.0;
    static constexpr double b61 = 1631.0 / 55296.0, b62 = 175.0 / 512.0, b63 = 575.0 / 13824.0,
                            b64 = 44275.0 / 110592.0, b65 = 253.0 / 4096.0;
    static constexpr double c1 = 37.0 / 378.0, c3 = 250.0 / 621.0, c4 = 125.0 / 594.0, c6 = 512.0 / 1771.0;
    static constexpr double d1 = c1 - 2825.0 / 27648.0, d3 = c3 - 18575.0 / 48384.0,
                            d4 = c4 - 13525.0 / 55296.0, d5 = -277.0 / 14336.0, d6 = c6 - 1.0 / 4.0;

    const std::size_t n = u.size();
    work.resize(7, std::vector<double>(n));
    auto& k1 = work[0];
    auto& k2 = work[1];
    auto& k3 = work[2];
    auto& k4 = work[3];
    auto& k5 = work[4];
    auto& k6 = work[5];
    auto& tmp = work[6];

    pam_rhs(u, k1, r, kappa, gamma, catalyst);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + dt * b21 * k1[i];
    pam_rhs(tmp, k2, r, kappa, gamma, catalyst);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + dt * (b31 * k1[i] + b32 * k2[i]);
    pam_rhs(tmp, k3, r, kappa, gamma, catalyst);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + dt * (b41 * k1[i] + b42 * k2[i] + b43 * k3[i]);
    pam_rhs(tmp, k4, r, kappa, gamma, catalyst);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = u[i] + dt * (b51 * k1[i] + b52 * k2[i] + b53 * k3[i] + b54 * k4[i]);
    pam_rhs(tmp, k5, r, kappa, gamma, catalyst);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = u[i] + dt * (b61 * k1[i] + b62 * k2[i] + b63 * k3[i] + b64 * k4[i] + b65 * k5[i]);
    pam_rhs(tmp, k6, r, kappa, gamma, catalyst);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = dt * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i]);
        err = std::max(err, std::abs(e));
        u[i] += dt * (c1 * k1[i] + c3 * k3[i] + c4 * k4[i] + c6 * k6[i]);
    }
    return err;
}

} // namespace detail

// Integrates the PAM equation piecewise between the catalyst's jumps; the
// coefficient field is constant on each piece. Throws BoundaryMassExceeded
// when the perturbation reaches the box edge beyond the configured threshold.
inline PamField pam_solve(const PamConfig& cfg, const EnvironmentPath& env) {
    cfg.validate();
    if (env.discrete()) throw Error("pam_solve expects a continuous-time catalyst path");
    if (env.horizon + 1e-12 < cfg.t) throw HorizonExceeded();

    PamField field;
    field.rbox = cfg.rbox;
    const std::int64_t side = 2 * cfg.rbox + 1;
    field.u.assign(side * side, 1.0);

    std::vector<std::vector<double>> work;
    const double stiff_cap = 1.0 / std::max(1e-12, cfg.kappa + std::abs(cfg.gamma));
    double clock = 0.0;
    std::size_t ji = 0;
    while (clock < cfg.t) {
        while (ji < env.jump_times.size() && env.jump_times[ji] <= clock + 1e-15) ++ji;
        const double segment_end = std::min(cfg.t, ji < env.jump_times.size() ? env.jump_times[ji] : cfg.t);
        const Vec2 catalyst = env.positions[ji];
        double dt = std::min(stiff_cap, segment_end - clock);
        while (clock < segment_end - 1e-15) {
            dt = std::min(dt, segment_end - clock);
            std::vector<double> saved = field.u;
            const double local_tol = cfg.tol * std::max(dt / std::max(cfg.t, 1e-12), 1e-6);
            const double err = detail::pam_rk_step(field.u, dt, cfg.rbox, cfg.kappa, cfg.gamma, catalyst, work);
            if (err <= local_tol) {
                clock += dt;
                const double grow = err > 0.0 ? 0.9 * std::pow(local_tol / err, 0.2) : 5.0;
                dt = std::min(stiff_cap, dt * std::min(5.0, std::max(1.0, grow)));
            } else {
                field.u = std::move(saved);
                dt *= std::max(0.2, 0.9 * std::pow(local_tol / err, 0.25));
            }
        }
        clock = segment_end;
    }

    // perturbation mass within two cells of the boundary vs the interior
    double edge = 0.0, interior = 0.0;
    for (std::int64_t y = -cfg.rbox; y <= cfg.rbox; ++y)
        for (std::int64_t x = -cfg.rbox; x <= cfg.rbox; ++x) {
            const double dev = std::abs(field.u[(y + cfg.rbox) * side + (x + cfg.rbox)] - 1.0);
            if (std::max(std::llabs(x), std::llabs(y)) >= cfg.rbox - 2) edge += dev;
            else interior += dev;
        }
    field.boundary_mass_ratio = interior > 0.0 ? edge / interior : (edge > 0.0 ? 1.0 : 0.0);
    if (field.boundary_mass_ratio > cfg.boundary_threshold)
        throw BoundaryMassExceeded("boundary mass ratio " + std::to_string(field.boundary_mass_ratio) +
                                   " above threshold; enlarge rbox");
    return field;
}

// Feynman-Kac estimate of u(t, x): average of exp(gamma * collision time of a
// rate-kappa simple walk from x against the time-reversed catalyst). The time
// reversal is the point of the representation; the unreversed variant is kept
// as a diagnostic knob for the guard test.
inline EstimateWithCI pam_feynman_kac(const PamConfig& cfg, const EnvironmentPath& env, Vec2 x, std::uint64_t m,
                                      std::uint64_t master_seed, unsigned workers = 1, bool time_reversal = true) {
    cfg.validate();
    if (env.discrete()) throw Error("pam_feynman_kac expects a continuous-time catalyst path");
    if (env.horizon + 1e-12 < cfg.t) throw HorizonExceeded();

    // catalyst path restricted to [0,t], then optionally reversed
    std::vector<double> times;
    std::vector<Vec2> pos{env.positions[0]};
    for (std::size_t i = 0; i < env.jump_times.size() && env.jump_times[i] < cfg.t; ++i) {
        times.push_back(env.jump_times[i]);
        pos.push_back(env.positions[i + 1]);
    }
    if (time_reversal) {
        std::vector<double> rtimes;
        std::vector<Vec2> rpos;
        rpos.push_back(pos.back());
        for (std::size_t i = times.size(); i-- > 0;) {
            rtimes.push_back(cfg.t - times[i]);
            rpos.push_back(pos[i]);
        }
        times = std::move(rtimes);
        pos = std::move(rpos);
    }

    const StepSampler sampler(preset_step("srw"));
    constexpr std::uint64_t chunk = 256;
    const std::uint64_t chunks = (m + chunk - 1) / chunk;
    std::vector<std::array<double, 2>> partial(chunks, {0.0, 0.0});
    parallel_chunks(m, chunk, workers, [&](std::size_t c, std::uint64_t r0, std::uint64_t r1) {
        for (std::uint64_t r = r0; r < r1; ++r) {
            RngStream rng(master_seed, "pam-fk", r);
            double collision = 0.0, clock = 0.0;
            Vec2 xpos = x;
            std::size_t yi = 0;
            double next_x = cfg.kappa > 0.0 ? rng.next_exponential(cfg.kappa)
                                            : std::numeric_limits<double>::infinity();
            while (clock < cfg.t) {
                const double next_y = yi < times.size() ? times[yi] : std::numeric_limits<double>::infinity();
                const double next = std::min(std::min(next_x, next_y), cfg.t);
                if (xpos == pos[yi]) collision += next - clock;
                clock = next;
                if (clock >= cfg.t) break;
                if (next_x <= next_y) {
                    xpos = xpos + sampler.sample(rng);
                    next_x = clock + rng.next_exponential(cfg.kappa);
                } else {
                    ++yi;
                }
            }
            const double v = std::exp(cfg.gamma * collision);
            partial[c][0] += v;
            partial[c][1] += v * v;
        }
    });
    double sum = 0.0, sum2 = 0.0;
    for (const auto& p : partial) {
        sum += p[0];
        sum2 += p[1];
    }
    EstimateWithCI est;
    est.replicas = m;
    est.master_seed = master_seed;
    const double md = static_cast<double>(m);
    est.estimate = sum / md;
    if (m >= 2) {
        const double var = std::max(0.0, sum2 / md - est.estimate * est.estimate) * md / (md - 1.0);
        est.se = std::sqrt(var / md);
    }
    return est;
}

// ---------------------------------------------------------------------------
// Pinning model: transfer-operator partition functions
// ---------------------------------------------------------------------------

struct PinningConfig {
    double gamma = 1.0;
    WalkSpec x_walk;
    WalkSpec y_walk;
    std::int64_t horizon = 16;
    std::int64_t box_radius = 0; // 0: auto (exact reachable set)
    bool allow_truncation = false;
};

struct PinningResult {
    double log_z = 0.0;
    double truncation_bound = 0.0; // 0 in exact mode
};

// v_j(x) = e^{gamma delta_{Y_j}(x)} sum_{x'} p_X(x - x') v_{j-1}(x'), with the
// time-0 collision entering as the weight e^gamma on v_0 = delta_0. Free mode
// returns log sum_x v_n(x), constrained log v_n(Y_n). Renormalized every step.
inline PinningResult pinning_partition(const PinningConfig& cfg, const EnvironmentPath& env, bool constrained) {
    if (!cfg.x_walk.discrete() || !env.discrete())
        throw Error("pinning_partition runs the exact discrete-time transfer operator");
    const std::int64_t n = cfg.horizon;
    if (static_cast<double>(n) > env.horizon + 1e-12) throw HorizonExceeded();
    const std::int64_t reach = cfg.x_walk.step.max_reach();
    const std::int64_t need = reach * n;
    std::int64_t r = cfg.box_radius > 0 ? cfg.box_radius : need;
    double truncation = 0.0;
    if (r < need) {
        if (!cfg.allow_truncation) throw BoxTooSmall("pinning box radius " + std::to_string(r) +
                                                     " below the reachable radius " + std::to_string(need));
        // crude absorbing-boundary bound: escaped weight times the max tilt
        const double p_escape = 4.0 * static_cast<double>(n) *
                                std::exp(-static_cast<double>(r * r) /
                                         (2.0 * static_cast<double>(n) * static_cast<double>(reach * reach)));
        truncation = p_escape * std::exp(std::max(0.0, cfg.gamma) * static_cast<double>(n + 1));
    }

    const std::int64_t side = 2 * r + 1;
    std::vector<double> v(side * side, 0.0), next(side * side, 0.0);
    auto idx = [&](std::int64_t x, std::int64_t y) { return static_cast<std::size_t>((y + r) * side + (x + r)); };
    const double tilt = std::exp(cfg.gamma);
    v[idx(0, 0)] = tilt; // e^{gamma} for the forced collision at time 0
    double log_scale = 0.0;

    for (std::int64_t j = 1; j <= n; ++j) {
        std::fill(next.begin(), next.end(), 0.0);
        for (const auto& atom : cfg.x_walk.step.atoms()) {
            const double w = atom.weight;
            for (std::int64_t y = -r; y <= r; ++y) {
                const std::int64_t ys = y - atom.site.y;
                if (ys < -r || ys > r) continue;
                for (std::int64_t x = -r; x <= r; ++x) {
                    const std::int64_t xs = x - atom.site.x;
                    if (xs < -r || xs > r) continue;
                    next[idx(x, y)] += w * v[idx(xs, ys)];
                }
            }
        }
        const Vec2 yj = env.positions[j];
        if (yj.norm_inf() <= r) next[idx(yj.x, yj.y)] *= tilt;
        double mass = 0.0;
        for (const double val : next) mass += val;
        if (mass <= 0.0) throw Error("transfer operator lost all mass; box too small");
        for (double& val : next) val /= mass;
        log_scale += std::log(mass);
        v.swap(next);
    }

    PinningResult out;
    out.truncation_bound = truncation;
    if (constrained) {
        const Vec2 yn = env.positions[n];
        if (yn.norm_inf() > r) throw BoxTooSmall("constrained endpoint outside the box");
        const double val = v[idx(yn.x, yn.y)];
        out.log_z = val > 0.0 ? log_scale + std::log(val) : -std::numeric_limits<double>::infinity();
    } else {
        out.log_z = log_scale; // rows renormalized to mass 1 each step
    }
    return out;
}

struct FreeEnergyPoint {
    std::int64_t t = 0;
    double mean_rate = 0.0; // (1/t) E^Y[log Z^gamma_{t,Y} constrained]
    double se = 0.0;
    std::vector<double> env_rates;
};

struct FreeEnergyEstimate {
    std::vector<FreeEnergyPoint> points;
    double lambda_lower = -std::numeric_limits<double>::infinity(); // running max over t
    double gamma = 0.0;
};

// (1/t) E^Y[log E^X[e^{gamma L_t} 1{X_t=Y_t}]] along a t-grid; the running max
// is the finite-t lower bound for the free energy sup_t.
inline FreeEnergyEstimate free_energy_estimate(const PinningConfig& cfg, const std::vector<std::int64_t>& t_grid,
                                               std::uint64_t num_env, std::uint64_t master_seed,
                                               unsigned workers = 1) {
    if (num_env < 1) throw Error("need at least one environment");
    FreeEnergyEstimate out;
    out.gamma = cfg.gamma;
    for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
        const std::int64_t t = t_grid[ti];
        if (t < 1) throw Error("t grid entries must be >= 1");
        FreeEnergyPoint point;
        point.t = t;
        point.env_rates.assign(num_env, 0.0);
        parallel_chunks(num_env, 1, workers, [&](std::size_t, std::uint64_t e0, std::uint64_t e1) {
            for (std::uint64_t e = e0; e < e1; ++e) {
                const auto env = sample_environment(cfg.y_walk, static_cast<double>(t), master_seed,
                                                    (2ull << 40) + ti * num_env + e);
                PinningConfig local = cfg;
                local.horizon = t;
                const auto z = pinning_partition(local, env, true);
                point.env_rates[e] = z.log_z / static_cast<double>(t);
            }
        });
        const auto ms = mean_se(point.env_rates);
        point.mean_rate = ms.mean;
        point.se = ms.se;
        out.lambda_lower = std::max(out.lambda_lower, point.mean_rate);
        out.points.push_back(std::move(point));
    }
    return out;
}

} // namespace latticelab

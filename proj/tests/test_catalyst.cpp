#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "latticelab/catalyst.hpp"

using namespace latticelab;

namespace {

WalkSpec srw_cont(double rate) { return WalkSpec::make_continuous(preset_step("srw"), rate); }

// occupation time of site x by the stored continuous path on [0, t]
double occupation_time(const EnvironmentPath& env, Vec2 x, double t) {
    double occ = 0.0, prev = 0.0;
    for (std::size_t i = 0; i <= env.jump_times.size(); ++i) {
        const double next = i < env.jump_times.size() ? std::min(env.jump_times[i], t) : t;
        if (env.positions[i] == x) occ += std::max(0.0, next - prev);
        prev = next;
        if (prev >= t) break;
    }
    return occ;
}

// brute-force pinned partition function by path enumeration
double enumerate_pinning(const PinningConfig& cfg, const EnvironmentPath& env, bool constrained) {
    double z = 0.0;
    struct Frame {
        Vec2 pos;
        std::int64_t depth;
        double weight;
        double tilt; // exp(gamma * collisions so far)
    };
    const double bump = std::exp(cfg.gamma);
    std::vector<Frame> stack{{{0, 0}, 0, 1.0, bump}}; // collision at time 0
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.depth == cfg.horizon) {
            if (!constrained || f.pos == env.positions[cfg.horizon]) z += f.weight * f.tilt;
            continue;
        }
        for (const auto& atom : cfg.x_walk.step.atoms()) {
            const Vec2 next = f.pos + atom.site;
            const bool hit = next == env.positions[f.depth + 1];
            stack.push_back({next, f.depth + 1, f.weight * atom.weight, f.tilt * (hit ? bump : 1.0)});
        }
    }
    return z;
}

} // namespace

TEST_CASE("pam: gamma = 0 keeps the field identically 1") {
    PamConfig cfg;
    cfg.gamma = 0.0;
    cfg.kappa = 1.0;
    cfg.t = 2.0;
    cfg.rbox = 8;
    cfg.tol = 1e-10;
    const auto env = sample_environment(srw_cont(1.0), cfg.t, 3, 0);
    const auto field = pam_solve(cfg, env);
    for (const double v : field.u) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(field.boundary_mass_ratio == 0.0);
}

TEST_CASE("pam: kappa = 0 reduces to the catalyst occupation closed form") {
    PamConfig cfg;
    cfg.gamma = 1.5;
    cfg.kappa = 0.0;
    cfg.rho = 1.0;
    cfg.t = 3.0;
    cfg.rbox = 10;
    cfg.tol = 1e-10;
    cfg.boundary_threshold = 1.0; // the catalyst path itself may touch outer rings
    const auto env = sample_environment(srw_cont(cfg.rho), cfg.t, 17, 2);
    const auto field = pam_solve(cfg, env);
    for (std::int64_t x = -3; x <= 3; ++x)
        for (std::int64_t y = -3; y <= 3; ++y) {
            const double expected = std::exp(cfg.gamma * occupation_time(env, {x, y}, cfg.t));
            CHECK(field.at(x, y) == doctest::Approx(expected).epsilon(1e-8));
        }
}

TEST_CASE("pam feynman-kac: gamma = 0 gives exactly 1 with zero variance") {
    PamConfig cfg;
    cfg.gamma = 0.0;
    cfg.t = 2.0;
    cfg.rbox = 8;
    const auto env = sample_environment(srw_cont(1.0), cfg.t, 5, 1);
    const auto est = pam_feynman_kac(cfg, env, {0, 0}, 500, 11);
    CHECK(est.estimate == 1.0);
    CHECK(est.se == 0.0);
}

TEST_CASE("pam feynman-kac: kappa = 0 equals the frozen-walker closed form") {
    PamConfig cfg;
    cfg.gamma = 2.0;
    cfg.kappa = 0.0;
    cfg.t = 3.0;
    cfg.rbox = 10;
    const auto env = sample_environment(srw_cont(1.0), cfg.t, 23, 4);
    // X frozen at x: collision time = occupation of x by the reversed path,
    // which equals the occupation of x by the path itself on [0,t]
    for (const Vec2 x : {Vec2{0, 0}, Vec2{1, 0}, Vec2{0, -1}}) {
        const auto est = pam_feynman_kac(cfg, env, x, 50, 31);
        const double expected = std::exp(cfg.gamma * occupation_time(env, x, cfg.t));
        CHECK(est.estimate == doctest::Approx(expected).epsilon(1e-10));
        CHECK(est.se == doctest::Approx(0.0));
    }
}

TEST_CASE("pam feynman-kac samplewise bounds keep the estimate inside e^{+-|gamma| t}") {
    PamConfig cfg;
    cfg.gamma = -1.2;
    cfg.t = 2.0;
    cfg.rbox = 8;
    const auto env = sample_environment(srw_cont(1.0), cfg.t, 7, 0);
    const auto est = pam_feynman_kac(cfg, env, {0, 0}, 2000, 13);
    CHECK(est.estimate <= std::exp(std::abs(cfg.gamma) * cfg.t));
    CHECK(est.estimate >= std::exp(-std::abs(cfg.gamma) * cfg.t));
}

TEST_CASE("pam: solver and feynman-kac agree at desk scale") {
    PamConfig cfg;
    cfg.kappa = 1.0;
    cfg.gamma = 1.0;
    cfg.rho = 1.0;
    cfg.t = 2.0;
    cfg.rbox = 12;
    cfg.tol = 1e-9;
    const auto env = sample_environment(srw_cont(cfg.rho), cfg.t, 41, 3);
    const auto field = pam_solve(cfg, env);
    const auto est = pam_feynman_kac(cfg, env, {0, 0}, 40000, 97, 2);
    CHECK(std::abs(est.estimate - field.at(0, 0)) <= 3.0 * est.se);
}

TEST_CASE("pam: only the time-reversed feynman-kac matches the solver on an asymmetric path") {
    // catalyst sits at the origin for most of [0,t], then leaves: reversing
    // the path changes the answer measurably
    PamConfig cfg;
    cfg.kappa = 1.0;
    cfg.gamma = 3.0;
    cfg.rho = 1.0;
    cfg.t = 1.0;
    cfg.rbox = 14;
    cfg.tol = 1e-9;
    EnvironmentPath env;
    env.spec = srw_cont(cfg.rho);
    env.horizon = cfg.t;
    env.positions = {{0, 0}, {5, 5}};
    env.jump_times = {0.95};
    const auto field = pam_solve(cfg, env);
    const auto reversed = pam_feynman_kac(cfg, env, {0, 0}, 60000, 71, 2, true);
    const auto forward = pam_feynman_kac(cfg, env, {0, 0}, 60000, 71, 2, false);
    CHECK(std::abs(reversed.estimate - field.at(0, 0)) <= 3.0 * reversed.se);
    CHECK(std::abs(forward.estimate - field.at(0, 0)) > 6.0 * forward.se);
}

TEST_CASE("pam config validation") {
    PamConfig cfg;
    cfg.t = 25.0;
    cfg.rbox = 10; // below 3 sqrt(25)
    const auto env = sample_environment(srw_cont(1.0), cfg.t, 1, 0);
    CHECK_THROWS_AS(pam_solve(cfg, env), BoxTooSmall);
    PamConfig bad;
    bad.tol = 0.0;
    CHECK_THROWS_AS(pam_solve(bad, env), Error);
}

TEST_CASE("pam boundary-mass diagnostic trips on an undersized box") {
    PamConfig cfg;
    cfg.gamma = 2.0;
    cfg.kappa = 1.0;
    cfg.t = 4.0;
    cfg.rbox = 6; // just above the hard floor, but the perturbation reaches the rim
    const auto env = EnvironmentPath::zero(srw_cont(1.0), cfg.t);
    CHECK_THROWS_AS(pam_solve(cfg, env), BoundaryMassExceeded);
}

TEST_CASE("pinning: gamma = 0 makes the free partition function exactly 1") {
    PinningConfig cfg;
    cfg.gamma = 0.0;
    cfg.x_walk = WalkSpec::make_discrete(preset_step("srw"));
    cfg.y_walk = WalkSpec::make_discrete(preset_step("srw"));
    cfg.horizon = 12;
    const auto env = sample_environment(cfg.y_walk, cfg.horizon, 9, 0);
    const auto z = pinning_partition(cfg, env, false);
    CHECK(std::abs(z.log_z) < 1e-12);
}

TEST_CASE("pinning DP equals brute-force enumeration, free and constrained") {
    PinningConfig cfg;
    cfg.x_walk = WalkSpec::make_discrete(preset_step("srw"));
    cfg.y_walk = WalkSpec::make_discrete(preset_step("srw"));
    for (const double gamma : {0.7, -0.9}) {
        cfg.gamma = gamma;
        for (std::uint64_t e = 0; e < 6; ++e) {
            cfg.horizon = 4 + static_cast<std::int64_t>(e % 3);
            const auto env = sample_environment(cfg.y_walk, cfg.horizon, 1234, e);
            for (const bool constrained : {false, true}) {
                const double oracle = enumerate_pinning(cfg, env, constrained);
                const auto z = pinning_partition(cfg, env, constrained);
                CHECK(z.log_z == doctest::Approx(std::log(oracle)).epsilon(1e-12));
                CHECK(z.truncation_bound == 0.0);
            }
        }
    }
}

TEST_CASE("pinning log-partition is strictly increasing in gamma") {
    PinningConfig cfg;
    cfg.x_walk = WalkSpec::make_discrete(preset_step("srw"));
    cfg.y_walk = WalkSpec::make_discrete(preset_step("srw"));
    cfg.horizon = 10;
    const auto env = sample_environment(cfg.y_walk, cfg.horizon, 77, 1);
    double prev = -1e300;
    for (const double gamma : {-1.0, 0.0, 1.0, 2.0}) {
        cfg.gamma = gamma;
        const double lz = pinning_partition(cfg, env, false).log_z;
        CHECK(lz > prev);
        prev = lz;
    }
}

TEST_CASE("pinning box guard") {
    PinningConfig cfg;
    cfg.x_walk = WalkSpec::make_discrete(preset_step("srw"));
    cfg.y_walk = WalkSpec::make_discrete(preset_step("srw"));
    cfg.horizon = 16;
    cfg.box_radius = 4;
    const auto env = sample_environment(cfg.y_walk, cfg.horizon, 5, 0);
    CHECK_THROWS_AS(pinning_partition(cfg, env, false), BoxTooSmall);
    cfg.allow_truncation = true;
    const auto z = pinning_partition(cfg, env, false);
    CHECK(z.truncation_bound > 0.0);
}

TEST_CASE("free energy: gamma = 0 rates are nonpositive, large gamma turns positive") {
    PinningConfig cfg;
    cfg.x_walk = WalkSpec::make_discrete(preset_step("srw"));
    cfg.y_walk = WalkSpec::make_discrete(preset_step("srw"));

    cfg.gamma = 0.0;
    const auto zero = free_energy_estimate(cfg, {4, 8, 16}, 8, 2024, 2);
    for (const auto& point : zero.points) {
        CHECK(point.mean_rate <= 0.0);
        for (const double r : point.env_rates) CHECK(r <= 1e-15);
    }

    cfg.gamma = 4.0;
    const auto hot = free_energy_estimate(cfg, {16}, 10, 2024, 2);
    CHECK(hot.points[0].mean_rate > 3.0 * hot.points[0].se);
    CHECK(hot.lambda_lower > 0.0);
}

TEST_CASE("free energy rates increase with gamma at fixed environments") {
    PinningConfig cfg;
    cfg.x_walk = WalkSpec::make_discrete(preset_step("srw"));
    cfg.y_walk = WalkSpec::make_discrete(preset_step("srw"));
    double prev = -1e300;
    for (const double gamma : {0.0, 1.0, 2.5}) {
        cfg.gamma = gamma;
        const auto est = free_energy_estimate(cfg, {12}, 6, 515, 2);
        CHECK(est.points[0].mean_rate > prev);
        prev = est.points[0].mean_rate;
    }
}

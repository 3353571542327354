#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "latticelab/kernels.hpp"
#include "latticelab/mc.hpp"

using namespace latticelab;

namespace {

WalkSpec srw_pair_z() {
    return difference_walk(WalkSpec::make_discrete(preset_step("srw")),
                           WalkSpec::make_discrete(preset_step("srw")));
}

} // namespace

TEST_CASE("environments are deterministic in (seed, index)") {
    const WalkSpec y = WalkSpec::make_discrete(preset_step("srw"));
    const auto a = sample_environment(y, 64, 7, 3);
    const auto b = sample_environment(y, 64, 7, 3);
    CHECK(a.positions == b.positions);
    const auto c = sample_environment(y, 64, 7, 4);
    CHECK(a.positions != c.positions);
    CHECK(a.positions.front() == Vec2{0, 0});
    for (std::size_t i = 1; i < a.positions.size(); ++i)
        CHECK(y.step.weight_at(a.positions[i] - a.positions[i - 1]) > 0.0);
}

TEST_CASE("point-mass environment stays at the origin") {
    const WalkSpec still = WalkSpec::make_discrete(StepDistribution::make({{{0, 0}, 0.0, Rational(1)}}, true));
    const auto env = sample_environment(still, 32, 1, 0);
    for (const Vec2 p : env.positions) CHECK(p == Vec2{0, 0});
}

TEST_CASE("continuous environments have increasing jump times within the horizon") {
    const WalkSpec y = WalkSpec::make_continuous(preset_step("srw"), 2.0);
    const auto env = sample_environment(y, 50.0, 11, 5);
    REQUIRE(env.positions.size() == env.jump_times.size() + 1);
    double last = 0.0;
    for (const double s : env.jump_times) {
        CHECK(s > last);
        CHECK(s <= 50.0);
        last = s;
    }
    // jump count is Poisson(100); generous 5 sigma window
    CHECK(env.jump_times.size() > 50);
    CHECK(env.jump_times.size() < 150);
}

TEST_CASE("empirical step frequencies match the kernel within 4 sigma") {
    const StepDistribution step = preset_step("lazy-srw");
    const StepSampler sampler(step);
    RngStream rng(2024, "freq-test", 0);
    const std::uint64_t draws = 1000000;
    std::map<Vec2, std::uint64_t> counts;
    for (std::uint64_t i = 0; i < draws; ++i) counts[sampler.sample(rng)] += 1;
    for (const auto& atom : step.atoms()) {
        const double expect = atom.weight * static_cast<double>(draws);
        const double sigma = std::sqrt(static_cast<double>(draws) * atom.weight * (1.0 - atom.weight));
        CHECK(std::abs(static_cast<double>(counts[atom.site]) - expect) <= 4.0 * sigma);
    }
}

TEST_CASE("uniform doubles look uniform") {
    RngStream rng(99, "unit", 1);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.next_unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("discrete collision local time: t=0 gives 1 and values stay in range") {
    const WalkSpec x = WalkSpec::make_discrete(preset_step("srw"));
    const auto env = sample_environment(WalkSpec::make_discrete(preset_step("srw")), 32, 5, 0);
    RngStream rng(5, "lt", 0);
    CHECK(local_time_two_walks(x, env, 0, rng) == 1.0);
    for (int r = 0; r < 200; ++r) {
        RngStream s(5, "lt", static_cast<std::uint64_t>(r));
        const double l = local_time_two_walks(x, env, 32, s);
        CHECK(l >= 1.0);
        CHECK(l <= 33.0);
    }
}

TEST_CASE("local time is monotone in t along a fixed sample path") {
    const WalkSpec x = WalkSpec::make_discrete(preset_step("srw"));
    const auto env = sample_environment(WalkSpec::make_discrete(preset_step("srw")), 64, 9, 2);
    double prev = 0.0;
    for (int t = 0; t <= 64; t += 8) {
        RngStream s(9, "mono", 7); // same stream key => same X path prefix
        const double l = local_time_two_walks(x, env, t, s);
        CHECK(l >= prev);
        prev = l;
    }
}

TEST_CASE("continuous collision local time includes the initial interval") {
    const WalkSpec x = WalkSpec::make_continuous(preset_step("srw"), 1.0);
    const auto env = sample_environment(WalkSpec::make_continuous(preset_step("srw"), 1.0), 16.0, 21, 0);
    const double first_y = env.jump_times.empty() ? 16.0 : env.jump_times.front();
    for (int r = 0; r < 100; ++r) {
        RngStream s(21, "cont-lt", static_cast<std::uint64_t>(r));
        RngStream probe(21, "cont-lt", static_cast<std::uint64_t>(r));
        const double first_x = probe.next_exponential(1.0);
        const double l = local_time_two_walks(x, env, 16.0, s);
        CHECK(l >= std::min(std::min(first_x, first_y), 16.0) - 1e-12);
        CHECK(l > 0.0);
    }
}

TEST_CASE("frozen environment reduces the two-walk local time to the single-walk one") {
    const WalkSpec x = WalkSpec::make_discrete(preset_step("srw"));
    const auto env = EnvironmentPath::zero(WalkSpec::make_discrete(preset_step("srw")), 512);
    const std::uint64_t m = 20000;
    std::vector<double> vals;
    vals.reserve(m);
    for (std::uint64_t r = 0; r < m; ++r) {
        RngStream s(31, "reduction", r);
        vals.push_back(local_time_two_walks(x, env, 512, s));
    }
    const auto ms = mean_se(vals);
    const auto g = p0_series(preset_step("srw"), 512);
    double exact = 0.0;
    for (const double v : g) exact += v;
    CHECK(std::abs(ms.mean - exact) <= 3.0 * ms.se);
}

TEST_CASE("annealed k=1 matches the exact origin-column sum at n=1024") {
    const WalkSpec z = srw_pair_z();
    const auto est = annealed_moments(z, 1024, 1, 50000, 4242, 2);
    const auto g = p0_series(z.step, 1024);
    double exact = 0.0;
    for (const double v : g) exact += v;
    CHECK(std::abs(est.raw[0].estimate - exact) <= 3.0 * est.raw[0].se);
    CHECK(est.raw[0].se < 0.05);
}

TEST_CASE("annealed estimates are reproducible and independent of the worker count") {
    const WalkSpec z = srw_pair_z();
    const auto a = annealed_moments(z, 256, 2, 5000, 7, 1);
    const auto b = annealed_moments(z, 256, 2, 5000, 7, 4);
    for (int k = 0; k < 2; ++k) {
        CHECK(a.raw[k].estimate == b.raw[k].estimate);
        CHECK(a.raw[k].se == b.raw[k].se);
    }
    const auto c = annealed_moments(z, 256, 2, 5000, 8, 2);
    CHECK(a.raw[0].estimate != c.raw[0].estimate);
}

TEST_CASE("M=1 leaves the standard error infinite") {
    const auto est = annealed_moments(srw_pair_z(), 16, 1, 1, 3, 1);
    CHECK(std::isinf(est.raw[0].se));
}

TEST_CASE("normalized first moment approaches 1 along the exact route") {
    // exact-kernel check, no sampling: et * E[L_n] / log n closer to 1 at 2^20
    const WalkSpec z = srw_pair_z();
    const double et = erdos_taylor_constant(z);
    const auto g = p0_series(z.step, 1 << 20);
    auto partial = [&](std::int64_t n) {
        double s = 0.0;
        for (std::int64_t j = 0; j <= n; ++j) s += g[j];
        return s;
    };
    const double m10 = et * partial(1 << 10) / std::log(static_cast<double>(1 << 10));
    const double m20 = et * partial(1 << 20) / std::log(static_cast<double>(1 << 20));
    CHECK(std::abs(m20 - 1.0) < 0.35);
    CHECK(std::abs(m20 - 1.0) < std::abs(m10 - 1.0));
}

TEST_CASE("quenched moments are deterministic and reduce to single-walk moments on the zero path") {
    const WalkSpec x = WalkSpec::make_discrete(preset_step("srw"));
    const auto env = EnvironmentPath::zero(WalkSpec::make_discrete(preset_step("srw")), 256);
    const auto a = quenched_moments(x, env, 256, 2, 4000, 77, 2);
    const auto b = quenched_moments(x, env, 256, 2, 4000, 77, 1);
    CHECK(a.raw[0].estimate == b.raw[0].estimate);
    CHECK(a.raw[1].estimate == b.raw[1].estimate);

    const auto pmf = local_time_pmf(WalkSpec::make_discrete(preset_step("srw")), 256);
    CHECK(std::abs(a.raw[0].estimate - pmf.mean()) <= 3.0 * a.raw[0].se);
    CHECK(std::abs(a.raw[1].estimate - pmf.moment(2)) <= 3.0 * a.raw[1].se);
}

TEST_CASE("tower property: environment average of quenched estimates matches the annealed value") {
    const WalkSpec x = WalkSpec::make_discrete(preset_step("srw"));
    const WalkSpec y = WalkSpec::make_discrete(preset_step("srw"));
    const std::int64_t n = 256;
    const std::uint64_t num_env = 60, m = 600;
    std::vector<double> means;
    for (std::uint64_t e = 0; e < num_env; ++e) {
        const auto env = sample_environment(y, static_cast<double>(n), 505, e);
        const auto est = quenched_moments(x, env, static_cast<double>(n), 1, m, 505, 2);
        means.push_back(est.raw[0].estimate);
    }
    const auto g = p0_series(srw_pair_z().step, n);
    double exact = 0.0;
    for (const double v : g) exact += v;
    // the spread of conditional means across environments already carries the
    // replica noise, so its se is the right yardstick for the grand mean
    const auto ms = mean_se(means);
    CHECK(std::abs(ms.mean - exact) <= 3.0 * ms.se);
}

TEST_CASE("variance scan: degenerate environment distribution has ~zero variance") {
    const WalkSpec x = WalkSpec::make_discrete(preset_step("srw"));
    const WalkSpec still = WalkSpec::make_discrete(StepDistribution::make({{{0, 0}, 0.0, Rational(1)}}, true));
    const auto scan = quenched_variance_scan(x, still, {64.0}, 1, 24, 400, 0.5, 99, 2);
    REQUIRE(scan.rows.size() == 1);
    // all environments identical: the debiased variance is MC noise around 0
    CHECK(std::abs(scan.rows[0].variance_debiased) < 5.0 * scan.rows[0].mc_noise + 1e-9);
}

TEST_CASE("variance scan rejects a single environment") {
    const WalkSpec x = WalkSpec::make_discrete(preset_step("srw"));
    CHECK_THROWS_AS(quenched_variance_scan(x, x, {16.0}, 1, 1, 10, 0.5, 1, 1), InsufficientEnvironments);
}

TEST_CASE("variance scan rows carry consistent fields") {
    const WalkSpec x = WalkSpec::make_discrete(preset_step("srw"));
    const WalkSpec y = WalkSpec::make_discrete(preset_step("srw"));
    const auto scan = quenched_variance_scan(x, y, {32.0, 128.0}, 1, 30, 200, 0.5, 12, 2);
    REQUIRE(scan.rows.size() == 2);
    for (const auto& row : scan.rows) {
        CHECK(row.env_estimates.size() == 30);
        CHECK(row.variance_raw >= 0.0);
        CHECK(row.normalizer == doctest::Approx(std::pow(std::log(row.horizon), 1.5)));
        CHECK(std::isfinite(row.ratio_bootstrap_se));
    }
    // scan output is worker-count independent
    const auto scan4 = quenched_variance_scan(x, y, {32.0, 128.0}, 1, 30, 200, 0.5, 12, 4);
    for (std::size_t i = 0; i < scan.rows.size(); ++i)
        CHECK(scan.rows[i].variance_debiased == scan4.rows[i].variance_debiased);
}

TEST_CASE("horizon above the environment horizon is rejected") {
    const WalkSpec x = WalkSpec::make_discrete(preset_step("srw"));
    const auto env = sample_environment(x, 16, 1, 0);
    RngStream rng(1, "h", 0);
    CHECK_THROWS_AS(local_time_two_walks(x, env, 32, rng), HorizonExceeded);
    CHECK_THROWS_AS(quenched_moments(x, env, 32, 1, 10, 1, 1), HorizonExceeded);
}

TEST_CASE("joint moments: constants, predictions and determinism") {
    const WalkSpec x = WalkSpec::make_discrete(preset_step("srw"));
    const WalkSpec y = WalkSpec::make_discrete(preset_step("srw"));
    const auto env = sample_environment(y, 128, 404, 0);
    const auto report = joint_conditional_moments(x, {env}, 128, 4000, 404, 2);
    REQUIRE(report.constants.size() == 2);
    CHECK(report.constants[0] == doctest::Approx(2.0 * M_PI * 0.5)); // srw alone, sqrt(det I/2) = 1/2
    CHECK(report.constants[1] == doctest::Approx(M_PI));             // srw pair via image covariance

    for (const auto& row : report.rows) {
        int total = 0;
        bool squared = false;
        for (const int a : row.index) {
            total += a;
            squared = squared || a == 2;
        }
        CHECK(total >= 1);
        CHECK(total <= 2);
        CHECK(std::isfinite(row.estimate));
        CHECK(row.prediction == (squared ? 2.0 : 1.0));
    }

    const auto again = joint_conditional_moments(x, {env}, 128, 4000, 404, 1);
    for (std::size_t i = 0; i < report.rows.size(); ++i)
        CHECK(report.rows[i].estimate == again.rows[i].estimate);
}

TEST_CASE("continuous k=2 exact moment quadrature matches a Monte Carlo oracle at t=64") {
    const WalkSpec lazy = WalkSpec::make_continuous(preset_step("lazy-srw"), 1.0);
    const auto quad = exact_moments_continuous(lazy, 64.0, 2, 0.5);

    const StepSampler sampler(lazy.step);
    const std::uint64_t m = 1000000;
    constexpr std::uint64_t chunk = 4096;
    const std::uint64_t chunks = (m + chunk - 1) / chunk;
    std::vector<double> partial(chunks, 0.0);
    parallel_chunks(m, chunk, 2, [&](std::size_t c, std::uint64_t r0, std::uint64_t r1) {
        for (std::uint64_t r = r0; r < r1; ++r) {
            RngStream rng(909, "cont-moment", r);
            const double l = sample_local_time_single(lazy, sampler, 64.0, rng);
            partial[c] += l * l;
        }
    });
    double sum = 0.0;
    for (const double p : partial) sum += p;
    const double mc = sum / static_cast<double>(m);
    CHECK(std::abs(quad.value - mc) / mc < 0.01);
}

TEST_CASE("joint marginal along the stored environment reproduces quenched moments") {
    const WalkSpec x = WalkSpec::make_discrete(preset_step("srw"));
    const WalkSpec y = WalkSpec::make_discrete(preset_step("srw"));
    const auto env = sample_environment(y, 200, 606, 3);
    const std::uint64_t m = 3000;
    const auto joint = joint_conditional_moments(x, {env}, 200, m, 606, 2);
    const auto quenched = quenched_moments(x, env, 200, 2, m, 606, 2);
    // same replica streams: the a=(0,1) and a=(0,2) rows equal the normalized
    // quenched moments up to summation-order rounding
    double got1 = 0.0, got2 = 0.0;
    for (const auto& row : joint.rows) {
        if (row.index == std::vector<int>{0, 1}) got1 = row.estimate;
        if (row.index == std::vector<int>{0, 2}) got2 = row.estimate;
    }
    CHECK(got1 == doctest::Approx(quenched.normalized[0].estimate).epsilon(1e-12));
    CHECK(got2 == doctest::Approx(quenched.normalized[1].estimate).epsilon(1e-12));
}

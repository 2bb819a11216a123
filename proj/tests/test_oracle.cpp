#include <doctest.h>

#include <cmath>
#include <vector>

#include "coldspray/oracle.hpp"
#include "oracles.hpp"

using namespace coldspray;

TEST_CASE("sample_inputs stays inside the default envelopes") {
    OracleConfig config;
    config.n_samples = 100;
    config.seed = 42;
    auto points = sample_inputs(config);
    REQUIRE(points.size() == 100);
    for (const auto& p : points) {
        CHECK(p.velocity >= 400.0);
        CHECK(p.velocity <= 900.0);
        CHECK(p.particle_temp >= 300.0);
        CHECK(p.particle_temp <= 600.0);
        CHECK(p.friction >= 0.10);
        CHECK(p.friction <= 0.50);
    }
}

TEST_CASE("sample_inputs n=1 lands on the bin centers") {
    OracleConfig config;
    config.n_samples = 1;
    config.seed = 3;
    auto points = sample_inputs(config);
    REQUIRE(points.size() == 1);
    CHECK(points[0].velocity == doctest::Approx(650.0).epsilon(1e-12));
    CHECK(points[0].particle_temp == doctest::Approx(450.0).epsilon(1e-12));
    CHECK(points[0].friction == doctest::Approx(0.30).epsilon(1e-12));
}

TEST_CASE("sample_inputs marginals are stratified") {
    OracleConfig config;
    config.n_samples = 100;
    config.seed = 8;
    auto points = sample_inputs(config);

    auto bin_counts = [&](auto&& get, double lo, double hi, std::size_t bins) {
        std::vector<int> counts(bins, 0);
        for (const auto& p : points) {
            auto b = static_cast<std::size_t>((get(p) - lo) / (hi - lo) * static_cast<double>(bins));
            b = std::min(b, bins - 1);
            ++counts[b];
        }
        return counts;
    };

    // one point per 1/n bin, hence exactly 10 per decile
    for (int count : bin_counts([](const InputPoint& p) { return p.velocity; }, 400.0, 900.0, 100)) {
        CHECK(count == 1);
    }
    for (int count : bin_counts([](const InputPoint& p) { return p.particle_temp; }, 300.0, 600.0, 10)) {
        CHECK(count == 10);
    }
    for (int count : bin_counts([](const InputPoint& p) { return p.friction; }, 0.10, 0.50, 10)) {
        CHECK(count == 10);
    }
}

TEST_CASE("sample_inputs is deterministic per seed") {
    OracleConfig config;
    config.n_samples = 50;
    config.seed = 17;
    auto a = sample_inputs(config);
    auto b = sample_inputs(config);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].velocity == b[i].velocity);
        CHECK(a[i].particle_temp == b[i].particle_temp);
        CHECK(a[i].friction == b[i].friction);
    }
    config.seed = 18;
    auto c = sample_inputs(config);
    bool any_different = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        any_different = any_different || a[i].velocity != c[i].velocity;
    }
    CHECK(any_different);
}

TEST_CASE("max_peeq increases strictly with velocity") {
    for (double temp : {300.0, 442.0, 600.0}) {
        for (double friction : {0.1, 0.3, 0.5}) {
            double previous = -1.0;
            for (int i = 0; i < 50; ++i) {
                const double v = 400.0 + 500.0 * static_cast<double>(i) / 49.0;
                const double value = respond(v, temp, friction)[0];
                CHECK(value > previous);
                previous = value;
            }
        }
    }
}

TEST_CASE("max_temp_K bounded by the particle temperature and the melt point") {
    CHECK(respond(400.0, 300.0, 0.3)[2] >= 300.0);
    for (int a = 0; a < 10; ++a) {
        for (int b = 0; b < 10; ++b) {
            for (int c = 0; c < 10; ++c) {
                const double v = 400.0 + 500.0 * a / 9.0;
                const double temp = 300.0 + 300.0 * b / 9.0;
                const double mu = 0.10 + 0.40 * c / 9.0;
                const double max_temp = respond(v, temp, mu)[2];
                CHECK(max_temp >= temp);
                CHECK(max_temp < 916.0);
            }
        }
    }
}

TEST_CASE("von Mises peak sits at mid velocity and low friction") {
    double best_v = 0.0, best_stress = -1.0;
    for (int i = 0; i < 200; ++i) {
        const double v = 400.0 + 500.0 * static_cast<double>(i) / 199.0;
        const double stress = respond(v, 442.0, 0.15)[3];
        if (stress > best_stress) {
            best_stress = stress;
            best_v = v;
        }
    }
    CHECK(best_v > 500.0);
    CHECK(best_v < 700.0);
    CHECK(best_stress >= 400.0);
    CHECK(best_stress <= 550.0);

    // friction softens: higher mu never raises the stress
    for (int i = 0; i < 20; ++i) {
        const double v = 420.0 + 460.0 * i / 19.0;
        CHECK(respond(v, 442.0, 0.15)[3] >= respond(v, 442.0, 0.45)[3]);
    }
}

TEST_CASE("avg contact strain has an interior temperature minimum") {
    for (double v : {500.0, 650.0, 800.0}) {
        double best_t = 0.0, best = 1e18;
        for (int i = 0; i < 301; ++i) {
            const double temp = 300.0 + 300.0 * static_cast<double>(i) / 300.0;
            const double value = respond(v, temp, 0.3)[1];
            if (value < best) {
                best = value;
                best_t = temp;
            }
        }
        CHECK(best_t >= 400.0);
        CHECK(best_t <= 450.0);
        // non-monotone: both ends sit above the interior minimum
        CHECK(respond(v, 300.0, 0.3)[1] > best);
        CHECK(respond(v, 600.0, 0.3)[1] > best);
    }
}

TEST_CASE("deformation ratio is near-linear in velocity and within range") {
    for (double temp : {300.0, 450.0, 600.0}) {
        double previous = -1.0;
        for (int i = 0; i < 50; ++i) {
            const double v = 400.0 + 500.0 * static_cast<double>(i) / 49.0;
            const double value = respond(v, temp, 0.3)[4];
            CHECK(value >= 0.0);
            CHECK(value <= 1.3);
            CHECK(value > previous);
            previous = value;
        }
    }
}

TEST_CASE("respond is smooth: central second differences stay bounded") {
    const double h = 1e-3; // in normalized units of each axis
    const double spans[3] = {500.0, 300.0, 0.40};
    double worst = 0.0;
    for (int a = 1; a < 9; ++a) {
        for (int b = 1; b < 9; ++b) {
            for (int c = 1; c < 9; ++c) {
                const double base[3] = {400.0 + 500.0 * a / 9.0, 300.0 + 300.0 * b / 9.0,
                                        0.10 + 0.40 * c / 9.0};
                for (int axis = 0; axis < 3; ++axis) {
                    double lo[3] = {base[0], base[1], base[2]};
                    double hi[3] = {base[0], base[1], base[2]};
                    lo[axis] -= h * spans[axis];
                    hi[axis] += h * spans[axis];
                    auto f0 = respond(lo[0], lo[1], lo[2]);
                    auto f1 = respond(base[0], base[1], base[2]);
                    auto f2 = respond(hi[0], hi[1], hi[2]);
                    for (std::size_t t = 0; t < kNumTargets; ++t) {
                        const double scale = t == 2 ? 916.0 : (t == 3 ? 500.0 : 4.0);
                        const double second = (f2[t] - 2.0 * f1[t] + f0[t]) / (h * h) / scale;
                        CHECK(std::isfinite(second));
                        worst = std::max(worst, std::abs(second));
                    }
                }
            }
        }
    }
    CHECK(worst < 1e3); // normalized curvature stays moderate on the box
}

TEST_CASE("generate with zero noise reproduces respond exactly") {
    OracleConfig config;
    config.n_samples = 25;
    config.seed = 6;
    config.noise_std = 0.0;
    auto records = generate(config);
    for (const auto& rec : records) {
        auto clean = respond(rec.velocity, rec.particle_temp, rec.friction);
        for (std::size_t t = 0; t < kNumTargets; ++t) {
            CHECK(*rec.targets[t] == clean[t]);
        }
    }
}

TEST_CASE("generate is byte-deterministic") {
    OracleConfig config;
    config.n_samples = 60;
    config.seed = 77;
    config.noise_std = 0.02;
    CHECK(to_csv(generate(config)) == to_csv(generate(config)));
}

TEST_CASE("generate noise has the configured relative scale") {
    OracleConfig config;
    config.n_samples = 2000;
    config.seed = 123;
    config.noise_std = 0.05;
    auto records = generate(config);
    for (std::size_t t = 0; t < kNumTargets; ++t) {
        std::vector<double> rel;
        rel.reserve(records.size());
        for (const auto& rec : records) {
            const double clean = respond(rec.velocity, rec.particle_temp, rec.friction)[t];
            rel.push_back((*rec.targets[t] - clean) / clean);
        }
        auto mv = testoracle::streaming_mean_var(rel);
        const double sd = std::sqrt(mv.population_var);
        CHECK(sd > 0.05 * 0.8);
        CHECK(sd < 0.05 * 1.2);
    }
}

TEST_CASE("oracle config validation and JSON round-trip") {
    OracleConfig config;
    config.n_samples = 0;
    CHECK_THROWS_AS(config.validate(), Error);
    config.n_samples = 10;
    config.velocity = {500.0, 500.0};
    CHECK_THROWS_AS(config.validate(), Error);
    config.velocity = {500.0, 700.0};
    config.noise_std = 0.04;
    config.seed = 9;
    auto round = oracle_config_from_json(oracle_config_to_json(config));
    CHECK(round.n_samples == 10);
    CHECK(round.seed == 9);
    CHECK(round.noise_std == 0.04);
    CHECK(round.velocity.lo == 500.0);
    CHECK(round.velocity.hi == 700.0);
}

#include "coldspray/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "coldspray/numeric.hpp"

namespace coldspray {

namespace {

// Response-surface coefficients. These are fixed calibration constants, not
// fit parameters: they were tuned once so that the noise-free surfaces have
// the qualitative shape of single-particle impact responses (kinetically
// dominated, secondary thermal amplification, weak friction sensitivity)
// and span realistic magnitudes (plastic strain up to ~4, impact
// temperatures below the 916 K melt point, flow stress in the
// 200-550 MPa band, flattening ratio up to ~1.25).

// Johnson-Cook flow-stress constants for aluminum.
constexpr double kJcYieldMPa = 148.4;
constexpr double kJcHardeningMPa = 345.5;
constexpr double kJcHardeningExp = 0.183;
constexpr double kJcSofteningExp = 0.895;
constexpr double kReferenceTempK = 298.0;
constexpr double kMeltTempK = 916.0;

// max_peeq: saturating ramp in velocity with a soft knee at 650 m/s,
// amplified by temperature at high velocity, nearly friction-blind.
constexpr double kPeeqBase = 0.35;
constexpr double kPeeqLinear = 1.1;
constexpr double kPeeqRamp = 4.0;
constexpr double kPeeqKnee = 0.5;       // normalized velocity of the knee (650 m/s)
constexpr double kPeeqKneeWidth = 0.12; // ramp sharpness
constexpr double kPeeqThermalGain = 0.22;
constexpr double kPeeqFrictionGain = 0.03;

// avg_peeq_contact: rises with velocity, parabolic in temperature with an
// interior minimum at 425 K.
constexpr double kAvgBase = 0.06;
constexpr double kAvgLinear = 0.30;
constexpr double kAvgQuad = 0.12;
constexpr double kAvgTempValley = 0.4166666666666667; // normalized 425 K
constexpr double kAvgTempGain = 0.10;
constexpr double kAvgTempVelGain = 0.05;
constexpr double kAvgFrictionGain = 0.01;

// max_temp_K: the particle consumes a velocity/friction dependent fraction
// of the headroom to the melt point, so the output stays in (T, 916 K).
constexpr double kHeatBase = 0.22;
constexpr double kHeatQuad = 1.55;
constexpr double kHeatLinear = 0.28;
constexpr double kHeatThermal = 0.14;
constexpr double kHeatFriction = 0.30;

// max_von_mises_MPa: Johnson-Cook hardening against thermal softening from
// an effective homologous temperature that grows with impact energy and
// friction; the competition puts the stress peak at mid velocity and low
// friction.
constexpr double kVmStrainBase = 0.5;
constexpr double kVmStrainGain = 3.0;
constexpr double kVmThetaInput = 0.25;
constexpr double kVmThetaKinetic = 0.5;
constexpr double kVmThetaFriction = 0.6;

// deformation_ratio: near-linear flattening with velocity.
constexpr double kDefBase = 0.08;
constexpr double kDefLinear = 1.02;
constexpr double kDefQuad = 0.10;
constexpr double kDefThermal = 0.04;
constexpr double kDefFriction = 0.01;

double softplus(double x) {
    if (x > 30.0) {
        return x;
    }
    return std::log1p(std::exp(x));
}

} // namespace

void OracleConfig::validate() const {
    if (n_samples < 1) {
        raise(ErrorKind::InvalidArgument, "n_samples must be >= 1");
    }
    if (noise_std < 0.0 || !std::isfinite(noise_std)) {
        raise(ErrorKind::InvalidArgument, "noise_std must be >= 0");
    }
    for (const auto& [name, r] : {std::pair{"velocity", velocity}, {"particle_temp", particle_temp},
                                  {"friction", friction}}) {
        if (!(r.lo < r.hi)) {
            raise(ErrorKind::InvalidArgument, std::string(name) + " range is degenerate: [" +
                                                  format_double(r.lo) + ", " + format_double(r.hi) + "]");
        }
    }
}

std::vector<InputPoint> sample_inputs(const OracleConfig& config) {
    config.validate();
    const std::size_t n = config.n_samples;
    const std::array<Range, kNumInputs> ranges = {config.velocity, config.particle_temp, config.friction};

    Rng rng(config.seed);
    std::array<std::vector<std::size_t>, kNumInputs> bin_order;
    for (auto& order : bin_order) {
        order.resize(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
    }

    std::vector<InputPoint> points(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::array<double, kNumInputs> coords;
        for (std::size_t d = 0; d < kNumInputs; ++d) {
            const double width = (ranges[d].hi - ranges[d].lo) / static_cast<double>(n);
            coords[d] = ranges[d].lo + (static_cast<double>(bin_order[d][i]) + 0.5) * width;
        }
        points[i] = {coords[0], coords[1], coords[2]};
    }
    return points;
}

std::array<double, kNumTargets> respond(double velocity, double particle_temp, double friction) {
    const double vn = (velocity - 400.0) / 500.0;
    const double tn = (particle_temp - 300.0) / 300.0;

    // (a) maximum equivalent plastic strain
    const double ramp = kPeeqKneeWidth * softplus((vn - kPeeqKnee) / kPeeqKneeWidth);
    const double max_peeq = (kPeeqBase + kPeeqLinear * vn + kPeeqRamp * ramp) *
                            (1.0 + kPeeqThermalGain * tn * vn) *
                            (1.0 + kPeeqFrictionGain * (friction - 0.3));

    // (b) average contact plastic strain
    const double dt = tn - kAvgTempValley;
    const double avg_peeq = kAvgBase + kAvgLinear * vn + kAvgQuad * vn * vn +
                            (kAvgTempGain + kAvgTempVelGain * vn) * dt * dt +
                            kAvgFrictionGain * (friction - 0.3) * vn;

    // (c) maximum temperature
    const double heat = kHeatBase + kHeatQuad * vn * vn + kHeatLinear * vn + kHeatThermal * tn * vn +
                        kHeatFriction * friction * vn * vn;
    const double headroom = std::max(kMeltTempK - particle_temp, 0.0);
    const double max_temp = particle_temp + headroom * (1.0 - std::exp(-heat));

    // (d) maximum von Mises stress
    const double strain = kVmStrainBase + kVmStrainGain * std::pow(std::max(vn, 0.0), 1.5);
    double theta = kVmThetaInput * (particle_temp - kReferenceTempK) / (kMeltTempK - kReferenceTempK) +
                   kVmThetaKinetic * vn * vn * vn * vn * (1.0 + kVmThetaFriction * friction);
    theta = std::clamp(theta, 0.0, 0.999);
    const double hardening = kJcYieldMPa + kJcHardeningMPa * std::pow(strain, kJcHardeningExp);
    const double von_mises = hardening * (1.0 - std::pow(theta, kJcSofteningExp));

    // (e) deformation ratio
    const double deformation = kDefBase + kDefLinear * vn + kDefQuad * vn * vn + kDefThermal * tn * vn +
                               kDefFriction * (friction - 0.3) * vn;

    return {max_peeq, avg_peeq, max_temp, von_mises, deformation};
}

std::vector<SampleRecord> generate(const OracleConfig& config) {
    auto points = sample_inputs(config);

    // Separate noise stream so ranges/noise level do not shift the design.
    Rng noise_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

    std::vector<SampleRecord> records(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        records[i].velocity = p.velocity;
        records[i].particle_temp = p.particle_temp;
        records[i].friction = p.friction;
        const auto clean = respond(p.velocity, p.particle_temp, p.friction);
        for (std::size_t t = 0; t < kNumTargets; ++t) {
            const double z = noise_rng.normal();
            records[i].targets[t] = clean[t] * (1.0 + config.noise_std * z);
        }
    }
    validate_records(records);
    return records;
}

std::string oracle_config_to_json(const OracleConfig& config) {
    nlohmann::ordered_json j;
    j["n_samples"] = config.n_samples;
    j["seed"] = config.seed;
    j["noise_std"] = config.noise_std;
    j["ranges"] = {
        {"velocity", {config.velocity.lo, config.velocity.hi}},
        {"particle_temp", {config.particle_temp.lo, config.particle_temp.hi}},
        {"friction", {config.friction.lo, config.friction.hi}},
    };
    return j.dump(2) + "\n";
}

OracleConfig oracle_config_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    OracleConfig config;
    config.n_samples = j.at("n_samples").get<std::size_t>();
    config.seed = j.at("seed").get<std::uint64_t>();
    config.noise_std = j.at("noise_std").get<double>();
    auto read_range = [&](const char* name) {
        auto arr = j.at("ranges").at(name).get<std::vector<double>>();
        return Range{arr.at(0), arr.at(1)};
    };
    config.velocity = read_range("velocity");
    config.particle_temp = read_range("particle_temp");
    config.friction = read_range("friction");
    config.validate();
    return config;
}

} // namespace coldspray

#include <cmath>
#include <complex>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "bbmsd/compressor.hpp"
#include "bbmsd/config.hpp"
#include "bbmsd/resources.hpp"
#include "bbmsd/simulator.hpp"

using namespace bbmsd;

namespace {

std::string data(const std::string& rel) { return std::string(BBMSD_DATA_DIR) + "/" + rel; }

CompiledSchedule bare_schedule(const std::string& name, bool recycle = false) {
    auto g = load_protocol(data("protocols/" + name + ".txt"));
    return protocol_schedule(g, make_slot_plan(g, recycle));
}

DensityMatrix random_state(int q, uint32_t seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss;
    const std::size_t d = std::size_t{1} << q;
    // rho = A A^dagger / tr
    std::vector<cplx> a(d * d);
    for (auto& v : a) v = {gauss(rng), gauss(rng)};
    DensityMatrix rho(q);
    double tr = 0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            cplx s = 0;
            for (std::size_t l = 0; l < d; ++l) s += a[i * d + l] * std::conj(a[j * d + l]);
            rho.at(i, j) = s;
            if (i == j) tr += s.real();
        }
    rho.scale(1 / tr);
    return rho;
}

double bloch_x(const DensityMatrix& rho) { return 2 * rho.at(0, 1).real(); }

// Exact enumeration over input Z faults: (accept, p_out).
std::pair<double, double> polynomial_oracle(const TriorthogonalMatrix& t, double p) {
    auto poly = enumerate_faults(t);
    return {poly.accept_probability(p), poly.output_error(p)};
}

NoiseModel dephasing(double p) {
    NoiseModel nm;
    nm.p_in = p;
    nm.input_kind = InputNoise::Dephasing;
    return nm;
}

}  // namespace

TEST(DensityMatrix, RotationClosedForm) {
    DensityMatrix rho(1);
    rho.reset_qubit(0, {0.5, 0.5, 0.5, 0.5});
    auto before = rho;
    rho.rotate(SimPauli::Z(0), 0.0);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(std::abs(rho.at(i, j) - before.at(i, j)), 0, 1e-15);
    rho.rotate(SimPauli::Z(0), M_PI / 8);
    EXPECT_NEAR(bloch_x(rho), std::cos(M_PI / 4), 1e-12);
    EXPECT_NEAR(rho.trace(), 1.0, 1e-12);
}

TEST(DensityMatrix, RotationIsUnitaryOnRandomState) {
    auto rho = random_state(3, 5);
    auto start = rho;
    SimPauli p{0b101, 0b110};
    rho.rotate(p, 0.3);
    EXPECT_NEAR(rho.trace(), 1.0, 1e-12);
    EXPECT_LT(rho.hermiticity_error(), 1e-12);
    rho.rotate(p, -0.3);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(std::abs(rho.at(i, j) - start.at(i, j)), 0, 1e-12);
}

TEST(DensityMatrix, DepolarizingLimits) {
    auto rho = random_state(2, 9);
    auto same = rho;
    same.depolarize(0, 0.0);
    EXPECT_NEAR(std::abs(same.at(0, 1) - rho.at(0, 1)), 0, 1e-15);
    // p = 3/4 per qubit is the fully mixing point of X/Y/Z each with p/3
    rho.depolarize(0, 0.75);
    auto red = rho.reduced({0});
    EXPECT_NEAR(red[0].real(), 0.5, 1e-12);
    EXPECT_NEAR(std::abs(red[1]), 0.0, 1e-12);
    EXPECT_NEAR(red[3].real(), 0.5, 1e-12);
}

TEST(DensityMatrix, DepolarizingComposition) {
    // shrink factors multiply: (1 - 4p/3)
    const double p1 = 0.07, p2 = 0.11;
    const double combined = 0.75 * (1 - (1 - 4 * p1 / 3) * (1 - 4 * p2 / 3));
    auto a = random_state(2, 13), b = a;
    a.depolarize(1, p1);
    a.depolarize(1, p2);
    b.depolarize(1, combined);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(std::abs(a.at(i, j) - b.at(i, j)), 0, 1e-12);
}

TEST(DensityMatrix, SupportDepolarizingPreservesTrace) {
    auto rho = random_state(3, 21);
    rho.depolarize_support(0b011, 0.2);
    EXPECT_NEAR(rho.trace(), 1.0, 1e-12);
    EXPECT_LT(rho.hermiticity_error(), 1e-12);
}

TEST(DensityMatrix, MeasureEigenstateWithoutFlipIsUnchanged) {
    DensityMatrix rho(1);
    rho.reset_qubit(0, {0.5, 0.5, 0.5, 0.5});
    auto before = rho;
    rho.measure_with_feedback(SimPauli::X(0), 0.0, [](DensityMatrix& r) { r.apply_pauli(SimPauli::Z(0)); });
    EXPECT_NEAR(std::abs(rho.at(0, 1) - before.at(0, 1)), 0, 1e-15);
}

TEST(DensityMatrix, TeleportedRotationMatchesStateVector) {
    // data |+>, ancilla |T>; measure Z_d Z_a, S-dagger-type fix on -1, then X_a with Z_d fix
    DensityMatrix rho(2);
    rho.reset_qubit(0, {0.5, 0.5, 0.5, 0.5});
    rho.reset_qubit(1, {0.5, 0.5 * std::polar(1.0, -M_PI / 4), 0.5 * std::polar(1.0, M_PI / 4), 0.5});
    rho.measure_with_feedback(SimPauli{0, 0b11}, 0.0, [](DensityMatrix& r) { r.rotate(SimPauli::Z(1), M_PI / 4); });
    rho.measure_with_feedback(SimPauli::X(1), 0.0, [](DensityMatrix& r) { r.apply_pauli(SimPauli::Z(0)); });
    auto red = rho.reduced({0});
    // state vector: (|0> + e^{i pi/4}|1>)/sqrt2
    std::complex<double> psi[2] = {1 / std::sqrt(2.0), std::polar(1 / std::sqrt(2.0), M_PI / 4)};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) EXPECT_NEAR(std::abs(red[i * 2 + j] - psi[i] * std::conj(psi[j])), 0, 1e-12);
    EXPECT_NEAR(rho.trace(), 1.0, 1e-12);
}

TEST(DensityMatrix, OrthogonalProjectionRejectsEverything) {
    DensityMatrix rho(1);
    rho.reset_qubit(0, {0.5, -0.5, -0.5, 0.5});
    EXPECT_NEAR(rho.postselect(SimPauli::X(0), 0.0), 0.0, 1e-15);
}

TEST(Simulator, FlippedReadoutIsDetected) {
    // f = 1 reports -1 on a +1 eigenstate; the postselected check rejects it
    DensityMatrix rho(1);
    rho.reset_qubit(0, {0.5, 0.5, 0.5, 0.5});
    EXPECT_NEAR(rho.postselect(SimPauli::X(0), 1.0), 0.0, 1e-15);
}

TEST(Simulator, ZeroNoiseIsIdeal) {
    for (const char* name : {"15-to-1", "20-to-4", "8-to-ccz"}) {
        auto s = bare_schedule(name, true);
        auto rep = simulate(s, NoiseModel{});
        EXPECT_NEAR(rep.accept_prob, 1.0, 1e-10) << name;
        EXPECT_LE(rep.p_out, 1e-10) << name;
        EXPECT_LE(rep.max_trace_error, 1e-10) << name;
    }
    auto rep = simulate(bare_schedule("15-to-1"), NoiseModel{});
    EXPECT_FALSE(rep.target_from_ideal);
    EXPECT_NEAR(rep.ideal_fidelity, 1.0, 1e-10);
}

TEST(Simulator, InputDephasingMatchesEnumeration) {
    for (const char* name : {"15-to-1", "20-to-4"}) {
        auto t = load_protocol(data(std::string("protocols/") + name + ".txt"));
        auto s = bare_schedule(name, true);
        for (double p : {1e-1, 1e-2, 1e-3}) {
            auto rep = simulate(s, dephasing(p));
            auto [accept, p_out] = polynomial_oracle(t, p);
            EXPECT_NEAR(rep.accept_prob / accept, 1.0, 1e-6) << name << " p=" << p;
            EXPECT_NEAR(rep.p_out / p_out, 1.0, 1e-6) << name << " p=" << p;
        }
    }
}

TEST(Simulator, FifteenToOneLeadingTerm) {
    auto s = bare_schedule("15-to-1");
    const double p = 1e-3;
    auto rep = simulate(s, dephasing(p));
    EXPECT_NEAR(rep.p_out / (35 * p * p * p * std::pow(1 - p, 12) / rep.accept_prob), 1.0, 1e-3);
}

TEST(Simulator, SuppressionExponent) {
    auto s = bare_schedule("15-to-1");
    auto t = load_protocol(data("protocols/15-to-1.txt"));
    std::vector<double> xs, ys, oracle;
    for (double p : {1e-1, 1e-2, 1e-3}) {
        xs.push_back(std::log10(p));
        ys.push_back(std::log10(simulate(s, dephasing(p)).p_out));
        oracle.push_back(std::log10(polynomial_oracle(t, p).second));
    }
    auto slope = [&](const std::vector<double>& y) {
        double mx = (xs[0] + xs[1] + xs[2]) / 3, my = (y[0] + y[1] + y[2]) / 3, num = 0, den = 0;
        for (int i = 0; i < 3; ++i) {
            num += (xs[i] - mx) * (y[i] - my);
            den += (xs[i] - mx) * (xs[i] - mx);
        }
        return num / den;
    };
    EXPECT_NEAR(slope(ys), slope(oracle), 1e-6);
    // finite-p corrections steepen the least-squares fit; the low-p slope is the distance
    EXPECT_NEAR(slope(ys), 3.067, 1e-3);
    EXPECT_NEAR((ys[1] - ys[2]) / (xs[1] - xs[2]), 3.0, 0.02);
}

TEST(Simulator, RecycledAndPlainSchedulesAgree) {
    auto plain = simulate(bare_schedule("15-to-1"), dephasing(1e-2));
    auto recycled = simulate(bare_schedule("15-to-1", true), dephasing(1e-2));
    EXPECT_NEAR(plain.p_out, recycled.p_out, 1e-12);
    EXPECT_NEAR(plain.accept_prob, recycled.accept_prob, 1e-12);
}

TEST(Simulator, MonotoneInEachRate) {
    auto code = build_code(gross_spec());
    auto natives = native_set(code, step_costs(code));
    auto g = load_protocol(data("protocols/15-to-1.txt"));
    auto s = compile(g, code, natives, CompileOptions{}).schedule;
    NoiseModel base;
    base.p_in = 1e-3;
    base.p_auto = 1e-6;
    base.p_intra = 1e-5;
    base.p_inter = 1e-4;
    base.lambda = 0.9;
    double NoiseModel::*rates[] = {&NoiseModel::p_in, &NoiseModel::p_auto, &NoiseModel::p_intra, &NoiseModel::p_inter};
    for (auto rate : rates) {
        double prev = -1;
        for (double scale : {0.5, 1.0, 2.0}) {
            NoiseModel nm = base;
            nm.*rate *= scale;
            auto rep = simulate(s, nm);
            EXPECT_LE(rep.max_trace_error, 1e-10);
            EXPECT_GE(rep.p_out, prev);
            prev = rep.p_out;
        }
    }
}

TEST(Simulator, UnionBoundDominatesOnShippedConfigs) {
    for (const auto& entry : std::filesystem::directory_iterator(data("configs"))) {
        if (entry.path().extension() != ".cfg") continue;
        const auto cfg = entry.path().filename().string();
        auto kv = load_key_values(entry.path().string());
        auto report = run_factory(factory_config(kv));
        EXPECT_GE(report.bound.total(), report.sim.p_out) << cfg;
        EXPECT_LE(report.sim.max_trace_error, 1e-10) << cfg;
    }
}

TEST(Simulator, UnionBoundToySum) {
    CompiledSchedule s;
    s.slots = 1;
    Step init;
    init.kind = StepKind::InitPlus;
    init.slots = {0};
    Step lpu;
    lpu.kind = StepKind::LpuMeasure;
    lpu.probability = 1.0;
    Step out;
    out.kind = StepKind::FinalReadout;
    out.slots = {0};
    s.steps = {init, lpu, out};
    NoiseModel nm;
    nm.p_intra = 1e-4;
    nm.lambda = 0.5;
    FaultPolynomial poly;
    auto ub = union_bound(s, nm, poly);
    EXPECT_DOUBLE_EQ(ub.total(), 1e-4 + 0.5e-4);
    EXPECT_DOUBLE_EQ(union_bound(s, NoiseModel{}, poly).total(), 0.0);
}

TEST(Simulator, Errors) {
    auto s = bare_schedule("15-to-1");
    SimulationOptions small;
    small.qubit_cap = 3;
    EXPECT_THROW(simulate(s, NoiseModel{}, small), std::runtime_error);
    auto bad = s;
    bad.steps[1].noise = "cosmic-rays";
    EXPECT_THROW(simulate(bad, NoiseModel{}), std::runtime_error);
    NoiseModel neg;
    neg.p_in = -0.1;
    EXPECT_THROW(simulate(s, neg), std::runtime_error);
}

TEST(Simulator, BreakdownSumsToLeaveOneOutDifferences) {
    auto s = bare_schedule("15-to-1");
    NoiseModel nm = dephasing(1e-2);
    SimulationOptions opt;
    opt.breakdown = true;
    auto rep = simulate(s, nm, opt);
    EXPECT_NEAR(rep.source_breakdown["input"], rep.p_out, 1e-15);
    EXPECT_NEAR(rep.source_breakdown["intra"], 0.0, 1e-15);
}

TEST(Simulator, PerOutputMarginals) {
    auto s = bare_schedule("20-to-4", true);
    SimulationOptions opt;
    opt.per_output = true;
    auto rep = simulate(s, dephasing(1e-2), opt);
    ASSERT_EQ(rep.per_output_p_out.size(), 4u);
    for (double e : rep.per_output_p_out) {
        EXPECT_GE(e, 0.0);
        EXPECT_LE(e, rep.p_out + 1e-12);
    }
}

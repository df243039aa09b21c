// Copyright 2026 The qchip Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <sstream>

#include "qchip/readout.hpp"

using namespace qchip;

namespace {

EvolutionRecord const_record(cplx c, double T, std::size_t n) {
    EvolutionRecord r;
    r.times = linspace(0, T, n);
    r.labels = {"a"};
    r.series = {std::vector<cplx>(n, c)};
    return r;
}

IQRecord unit_iq() {
    IQRecord iq;
    iq.mu0 = {0, 0};
    iq.mu1 = {1, 0};
    iq.T_int = 1;
    return iq;
}

ShotCloud transform(const ShotCloud& c, double th, double dx, double dy) {
    auto f = [&](IQPoint p) {
        return IQPoint{std::cos(th) * p.I - std::sin(th) * p.Q + dx, std::sin(th) * p.I + std::cos(th) * p.Q + dy};
    };
    ShotCloud o = c;
    o.means.mu0 = f(c.means.mu0);
    o.means.mu1 = f(c.means.mu1);
    for (auto& s : o.shots0) s = f(s);
    for (auto& s : o.shots1) s = f(s);
    return o;
}

}  // namespace

TEST(IntegrateIQ, ZeroAndConstant) {
    auto z = integrate_iq(const_record(0.0, 1e-6, 11), 1e-6);
    EXPECT_EQ(z.I, 0.0);
    EXPECT_EQ(z.Q, 0.0);
    auto c = integrate_iq(const_record(cplx(0.3, -0.7), 2e-6, 101), 2e-6);
    EXPECT_NEAR(c.I, 0.6e-6, 1e-18);
    EXPECT_NEAR(c.Q, -1.4e-6, 1e-18);
}

TEST(IntegrateIQ, FullPeriodVanishes) {
    double w = 2 * kPi * 10e6, T = 2 * kPi / w;
    EvolutionRecord r;
    r.times = linspace(0, T, 2001);
    r.labels = {"a"};
    r.series.resize(1);
    for (double t : r.times) r.series[0].push_back(std::exp(cplx(0, w * t)));
    auto p = integrate_iq(r, T);
    EXPECT_NEAR(p.I, 0, 1e-6 * T);
    EXPECT_NEAR(p.Q, 0, 1e-6 * T);
}

TEST(IntegrateIQ, Errors) {
    auto r = const_record(1.0, 1e-6, 11);
    EXPECT_THROW(integrate_iq(r, 1e-6, "b"), Error);
    EXPECT_THROW(integrate_iq(r, 2e-6), Error);
    auto half = integrate_iq(r, 0.55e-6);
    EXPECT_NEAR(half.I, 0.55e-6, 1e-18);
}

TEST(SampleShots, DeterministicAndCentred) {
    auto iq = unit_iq();
    auto a = sample_shots(iq, 0.3, 100000, 7);
    auto b = sample_shots(iq, 0.3, 100000, 7);
    EXPECT_EQ(a.shots1[123].I, b.shots1[123].I);
    double mI = 0, mQ = 0;
    for (auto& s : a.shots1) mI += s.I, mQ += s.Q;
    mI /= 1e5, mQ /= 1e5;
    EXPECT_LT(std::abs(mI - 1.0), 4 * 0.3 / std::sqrt(1e5));
    EXPECT_LT(std::abs(mQ), 4 * 0.3 / std::sqrt(1e5));
    EXPECT_THROW(sample_shots(iq, 0.0, 10, 1), Error);
    EXPECT_THROW(sample_shots(iq, 0.1, 0, 1), Error);
    auto tight = sample_shots(iq, 1e-12, 10, 3);
    for (auto& s : tight.shots0) EXPECT_NEAR(s.I, 0.0, 1e-9);
}

TEST(Classify, DegenerateAndEmpty) {
    IQRecord iq;
    iq.mu1 = iq.mu0 = {0.4, 0.2};
    auto f = classify_and_score(sample_shots(iq, 0.2, 50, 1, 1.0));
    EXPECT_EQ(f.analytic, 0.5);
    EXPECT_EQ(f.empirical, 0.5);
    ShotCloud empty;
    EXPECT_THROW(classify_and_score(empty), Error);
}

TEST(Classify, ConvergesToAnalytic) {
    for (double k : {0.1, 0.2, 0.25, 0.4}) {
        auto f = classify_and_score(sample_shots(unit_iq(), k, 100000, 11));
        EXPECT_NEAR(f.analytic, 0.5 * std::erfc(-1.0 / (2 * k) / std::sqrt(2.0)), 1e-15);
        EXPECT_NEAR(f.empirical, f.analytic, 0.005) << k;
        EXPECT_GE(f.analytic, f.empirical - 3 * f.stderr - 1e-12);
    }
    EXPECT_NEAR(analytic_fidelity(1, 0.2), 0.99379, 1e-5);
    EXPECT_NEAR(analytic_fidelity(1, 0.25), 0.97725, 1e-5);
    EXPECT_NEAR(analytic_fidelity(1, 0.1), 0.9999997, 1e-7);
}

TEST(Classify, RotationTranslationAndSwapInvariance) {
    auto c = sample_shots(unit_iq(), 0.35, 4000, 5);
    auto f = classify_and_score(c);
    auto g = classify_and_score(transform(c, 1.1, -3.0, 2.5));
    EXPECT_DOUBLE_EQ(f.empirical, g.empirical);
    EXPECT_NEAR(f.analytic, g.analytic, 1e-12);
    ShotCloud s = c;
    std::swap(s.shots0, s.shots1);
    std::swap(s.means.mu0, s.means.mu1);
    EXPECT_DOUBLE_EQ(classify_and_score(s).empirical, f.empirical);
}

TEST(FidelityCurve, MonotoneWithinError) {
    std::vector<double> ks;
    for (int i = 0; i <= 7; ++i) ks.push_back(0.05 + 0.05 * i);
    auto curve = fidelity_vs_snr(unit_iq(), 1.0, ks, 100000, 3);
    for (std::size_t i = 0; i < curve.size(); ++i) {
        EXPECT_NEAR(curve[i].empirical, curve[i].analytic, 0.005);
        if (i) EXPECT_LT(curve[i].empirical, curve[i - 1].empirical + 3 * curve[i].stderr + 1e-9);
    }
    EXPECT_THROW(fidelity_vs_snr(unit_iq(), 1.0, {0.2, 0.1}, 10, 1), Error);
    std::ostringstream os;
    write_fidelity_csv(os, curve);
    EXPECT_EQ(os.str().substr(0, 31), "kappa,analytic,empirical,stderr");
}

TEST(ReadoutModel, DressedClusterIsNormalised) {
    auto p = preset("baseline");
    p.flux = 0.82;
    auto d = dress_cluster(p, 0);
    double w = 0;
    for (auto c : d.weight) w += std::norm(c);
    EXPECT_NEAR(w, 1.0, 1e-12);
    for (double z : d.z) EXPECT_LE(std::abs(z), 1.0 + 1e-12);
}

TEST(ReadoutModel, SeparationIsPositiveAndDeterministic) {
    auto p = preset("baseline");
    NoiseParams n;
    ReadoutSettings s;
    p.flux = 0.70;
    auto a = simulate_iq(p, n, s);
    auto b = simulate_iq(p, n, s);
    EXPECT_GT(a.separation(), 0);
    EXPECT_EQ(a.mu1.I, b.mu1.I);
    EXPECT_NEAR(reference_separation(n, s), a.separation(), 1e-12 * a.separation());
    // analytic fidelity at the calibration bias is exactly Phi(1/(2 kappa))
    EXPECT_NEAR(readout_fidelity(p, n, s, 0.2, a.separation()), 0.99379, 1e-5);
}

TEST(ReadoutModel, ZeroChiGivesNoContrast) {
    auto p = preset("baseline");
    p.chi_k = {0, 0, 0, 0};
    auto iq = simulate_iq(p, NoiseParams{}, ReadoutSettings{});
    EXPECT_LT(iq.separation(), 1e-9 * std::hypot(iq.mu0.I, iq.mu0.Q));
}

TEST(ReadoutModel, TrajectoryPathMatchesMeans) {
    auto p = preset("baseline");
    p.flux = 0.70;
    NoiseParams n;
    ReadoutSettings s;
    s.n_grid = 201;
    auto iq = simulate_iq(p, n, s);
    auto c = sample_shots_trajectories(p, n, s, 0.2, 300, 9, iq.separation());
    double scale = iq.separation();
    EXPECT_NEAR(c.means.mu0.I, iq.mu0.I, 1e-6 * scale);  // no jumps from the ground state except photon loss
    EXPECT_NEAR(c.means.mu1.I, iq.mu1.I, 0.05 * scale);
    EXPECT_NEAR(c.means.mu1.Q, iq.mu1.Q, 0.05 * scale);
    auto f = classify_and_score(c);
    EXPECT_GT(f.empirical, 0.95);
}

TEST(ReadoutModel, BlockSolverMatchesFullMasterEquation) {
    NoiseParams n;
    ReadoutSettings s;
    s.n_grid = 301;
    for (double phi : {0.70, 0.82}) {
        auto p = preset("optimized");
        p.flux = phi;
        auto a = simulate_iq(p, n, s), b = simulate_iq_full(p, n, s);
        double scale = std::hypot(b.mu1.I, b.mu1.Q);
        EXPECT_NEAR(a.mu0.I, b.mu0.I, 1e-8 * scale);
        EXPECT_NEAR(a.mu0.Q, b.mu0.Q, 1e-8 * scale);
        EXPECT_NEAR(a.mu1.I, b.mu1.I, 1e-8 * scale);
        EXPECT_NEAR(a.mu1.Q, b.mu1.Q, 1e-8 * scale);
    }
}

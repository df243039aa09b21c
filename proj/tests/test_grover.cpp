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

#include "qchip/grover.hpp"

using namespace qchip;

namespace {

GroverConfig noiseless(const std::string& target) {
    GroverConfig c;
    c.target = target;
    c.pair = {5.6 * GHz, 5.75 * GHz, 0.0, 0.7 * MHz};
    c.noise_scale = 0;
    return c;
}

// textbook statevector: uniform superposition, phase oracle, inversion about the mean
DenseVector brute_force(int target) {
    DenseVector s = DenseVector::Constant(4, 0.5);
    DenseVector psi = s;
    psi(target) = -psi(target);
    psi = 2.0 * s * s.dot(psi) - psi;
    return psi;
}

}  // namespace

TEST(GroverCircuit, Structure) {
    auto c = build_grover_circuit("11");
    EXPECT_EQ(c.size(), 13u);
    EXPECT_EQ(c.gates[2].kind, GateKind::CZ);
    EXPECT_EQ(c.gates.back().kind, GateKind::Measure);
    EXPECT_EQ(build_grover_circuit("00").size(), 17u);
    EXPECT_EQ(build_grover_circuit("01").size(), 15u);
    EXPECT_THROW(build_grover_circuit("2"), Error);
    // the logical unitary maps |00> onto the target up to phase
    for (int t = 0; t < 4; ++t) {
        DenseMatrix U = circuit_unitary(build_grover_circuit(basis_label(t)));
        EXPECT_NEAR(std::abs(U(t, 0)), 1.0, 1e-12);
    }
}

TEST(Grover, NoiselessMatchesBruteForce) {
    for (int t = 0; t < 4; ++t) {
        auto cfg = noiseless(basis_label(t));
        auto r = run_noisy(cfg);
        EXPECT_EQ(r.accuracy, 1.0);
        DenseVector psi = brute_force(t);
        DenseMatrix ref = psi * psi.adjoint();
        EXPECT_LT((r.rho - ref).cwiseAbs().maxCoeff(), 1e-12) << t;
        EXPECT_EQ(r.counts.at(basis_label(t)), cfg.n_shots);
    }
}

TEST(Grover, TransverseCouplingLeaksPopulation) {
    auto cfg = noiseless("11");
    cfg.pair.J12 = 3 * MHz;
    auto r = run_noisy(cfg);
    EXPECT_LT(r.expected_accuracy, 1.0 - 1e-5);
    EXPECT_GT(r.expected_accuracy, 0.99);
}

TEST(Grover, DensityInvariantsAndDeterminism) {
    auto cfg = noiseless("10");
    cfg.noise_scale = 5;
    cfg.readout_error = 0.05;
    cfg.seed = 42;
    cfg.sampling = Sampling::iid;
    auto a = run_noisy(cfg), b = run_noisy(cfg);
    EXPECT_NEAR(a.rho.trace().real(), 1.0, 1e-9);
    for (int k = 0; k < 4; ++k) EXPECT_GE(a.rho(k, k).real(), -1e-9);
    EXPECT_EQ(a.counts, b.counts);
    std::size_t total = 0;
    for (auto& [k, v] : a.counts) total += v;
    EXPECT_EQ(total, cfg.n_shots);
    EXPECT_LT(a.accuracy, 1.0);
}

TEST(Grover, ShotsConvergeToPopulation) {
    auto cfg = noiseless("11");
    cfg.noise_scale = 3;
    cfg.readout_error = 0.08;
    cfg.n_shots = 100000;
    cfg.sampling = Sampling::iid;
    auto r = run_noisy(cfg);
    EXPECT_NEAR(r.accuracy, r.expected_accuracy, 0.005);
    cfg.sampling = Sampling::systematic;
    EXPECT_NEAR(run_noisy(cfg).accuracy, r.expected_accuracy, 1.0 / cfg.n_shots);
}

TEST(Grover, ReadoutErrorOnly) {
    auto cfg = noiseless("01");
    cfg.readout_error = 0.1;
    EXPECT_NEAR(run_noisy(cfg).expected_accuracy, 0.81, 1e-12);
}

TEST(Grover, IdleChannelMatchesLindblad) {
    const double g1 = 2e5, gphi = 3e5, t = 700 * ns;
    DenseMatrix rho(4, 4);
    DenseVector v(4);
    v << 0.3, cplx(0.4, 0.2), cplx(-0.5, 0.1), 0.6;
    v.normalize();
    rho = v * v.adjoint();
    DenseMatrix closed = rho;
    detail::idle_channel(closed, 1, g1, gphi, t);
    std::vector<ComplexMatrix> c = {ComplexMatrix(DenseMatrix(std::sqrt(g1) * kron(pauli::I(), pauli::minus()))),
                                    ComplexMatrix(DenseMatrix(std::sqrt(2 * gphi) * kron(pauli::I(), DenseMatrix(0.5 * (pauli::I() - pauli::Z())))))};
    auto rec = evolve_master(ComplexMatrix(DenseMatrix::Zero(4, 4)), c, QuantumState::density(rho), linspace(0, t, 11), {});
    EXPECT_LT((rec.final_state.data - closed).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Grover, ImpracticalGateFlag) {
    auto cfg = noiseless("11");
    cfg.pair.zeta = 1 * kHz;
    auto r = run_noisy(cfg);
    EXPECT_TRUE(r.impractical_gate);
    EXPECT_NEAR(r.t_cz, kPi / (4 * kHz), 1e-15);
    cfg.pair.zeta = 0;
    EXPECT_THROW(run_noisy(cfg), Error);
    cfg.pair.zeta = 1 * MHz;
    cfg.readout_error = 0.5;
    EXPECT_THROW(run_noisy(cfg), Error);
}

TEST(GroverCalibration, AnchorAndRows) {
    NoiseParams n;
    auto cal = calibrate_noise(n);
    EXPECT_NEAR(cal.anchor_expected, kAnchorAccuracy, 1e-9);
    EXPECT_GT(cal.noise_scale, 1.0);
    auto rows = reproduce_reference_pairs(n, cal, 2048, 5);
    ASSERT_EQ(rows.size(), 4u);
    for (auto& r : rows) EXPECT_NEAR(r.predicted, r.row.accuracy, 0.03) << r.row.pair;
    // accuracy ordering follows zeta ordering
    for (auto& a : rows)
        for (auto& b : rows)
            if (a.row.zeta < b.row.zeta) EXPECT_LT(a.predicted, b.predicted);
    auto shots = shot_sweep(n, cal, {512, 1024, 2048, 4096}, 9);
    double lo = 1, hi = 0;
    for (auto& s : shots) lo = std::min(lo, s.accuracy), hi = std::max(hi, s.accuracy);
    EXPECT_LT(hi - lo, 0.01);
}

TEST(GroverSweep, ZetaDominatesJ12) {
    NoiseParams n;
    auto cal = calibrate_noise(n);
    GroverConfig base;
    base.noise_scale = cal.noise_scale;
    base.readout_error = cal.readout_error;
    base.pair = pair_params(effective_two_qubit(preset("optimized"), kAnchorPair, calibrate_zeta_scale()));
    std::vector<double> zs, js;
    for (int i = 0; i < 8; ++i) zs.push_back((0.1 + 0.2 * i) * MHz);
    for (int j = 0; j < 5; ++j) js.push_back(2.0 * j * MHz);
    auto s = sweep_zeta_j12(base, zs, js);
    for (std::size_t j = 0; j < js.size(); ++j)
        for (std::size_t i = 1; i < zs.size(); ++i) {
            double sigma = std::sqrt(0.25 / base.n_shots);
            EXPECT_GE(s.accuracy(i, j), s.accuracy(i - 1, j) - 2 * sigma) << i << " " << j;
        }
    double zeta_range = (s.accuracy.col(0).maxCoeff() - s.accuracy.col(0).minCoeff());
    for (std::size_t i = 2; i < zs.size(); ++i) {
        double jr = s.accuracy.row(i).maxCoeff() - s.accuracy.row(i).minCoeff();
        EXPECT_LT(jr, zeta_range) << i;
    }
}

TEST(GroverSweep, FluxPeakNear08) {
    NoiseParams n;
    auto cal = calibrate_noise(n);
    GroverConfig base;
    base.noise_scale = cal.noise_scale;
    base.readout_error = cal.readout_error;
    auto fl = linspace(0.6, 1.1, 51);
    auto s = sweep_zeta_flux(base, preset("optimized"), kAnchorPair, {0.3 * MHz, 0.7097 * MHz, 1.2 * MHz}, fl, true);
    for (Eigen::Index i = 0; i < s.accuracy.rows(); ++i) {
        Eigen::Index best = -1;
        for (Eigen::Index j = 0; j < s.accuracy.cols(); ++j)
            if (std::isfinite(s.accuracy(i, j)) && (best < 0 || s.accuracy(i, j) > s.accuracy(i, best))) best = j;
        EXPECT_NEAR(fl[best], 0.8, 0.05);
    }
    bool any_invalid = false;
    for (Eigen::Index k = 0; k < s.accuracy.size(); ++k) any_invalid = any_invalid || std::isnan(s.accuracy.data()[k]);
    EXPECT_TRUE(any_invalid);
}

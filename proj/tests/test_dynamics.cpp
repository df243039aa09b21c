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

#include "qchip/device.hpp"
#include "qchip/dynamics.hpp"

using namespace qchip;

namespace {

struct Damped {
    ComplexMatrix H;
    std::vector<ComplexMatrix> c;
    QuantumState psi0;
    std::vector<Observable> obs;
};

Damped damped_resonator(double kappa, int dim = 3) {
    ComplexMatrix a = destroy(dim);
    Damped d;
    d.H = ComplexMatrix(DenseMatrix::Zero(dim, dim));
    d.c = {std::sqrt(kappa) * a};
    d.psi0 = QuantumState::basis(dim, 1);
    d.obs = {{"n", a.adjoint() * a}};
    return d;
}

}  // namespace

TEST(dynamics, DampedResonatorMatchesExponential) {
    const double kappa = 1e6;
    Damped d = damped_resonator(kappa);
    auto grid = linspace(0, 3.0 / kappa, 301);
    auto rec = evolve_master(d.H, d.c, d.psi0, grid, d.obs);
    const auto& n = rec.expectation("n");
    double worst = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) worst = std::max(worst, std::abs(n[k].real() - std::exp(-kappa * grid[k])));
    EXPECT_LT(worst, 1e-4);
    EXPECT_NEAR(n[100].real(), 0.3679, 1e-4);
    EXPECT_LT(rec.max_trace_drift, 1e-8);
}

TEST(dynamics, UnitaryKeepsPurity) {
    DeviceParams p = preset("baseline");
    SubsystemSelector sel{{"int1", "tun", "res1"}};
    p.flux = kCrossingFlux;
    ComplexMatrix H = build_hamiltonian(p, sel, Frame::rotating);
    QuantumState psi = QuantumState::basis(H.rows(), 1);
    auto grid = linspace(0, 20e-9, 41);
    auto rec = evolve_master(H, {}, psi, grid, {});
    DenseMatrix r = rec.final_state.data;
    EXPECT_NEAR((r * r).trace().real(), 1.0, 1e-8);
    EXPECT_LT(rec.max_trace_drift, 1e-8);
    EXPECT_LT(max_abs(r - r.adjoint()), 1e-9);
}

TEST(dynamics, VacuumRabiSwap) {
    const double g = 2 * kPi * 5e6;
    DeviceParams p = preset("baseline");
    p.coupler_res_freqs[0] = p.interior_freqs[0];
    p.g_lambda_b[0] = g;
    SubsystemSelector sel{{"int1", "res1"}};
    ComplexMatrix H = build_hamiltonian(p, sel, Frame::lab);
    SpaceLayout L = sel.layout();
    ComplexMatrix nq = embed(ComplexMatrix(DenseMatrix(pauli::minus().adjoint() * pauli::minus())), "int1", L);
    // |1>_int1 |0>_res1 is index 2
    auto grid = linspace(0, kPi / (2 * g), 201);
    auto rec = evolve_master(H, {}, QuantumState::basis(4, 2), grid, {{"nq", nq}});
    EXPECT_NEAR(rec.expectation("nq").back().real(), 0.0, 1e-6);
}

TEST(dynamics, StepHalvingConverges) {
    Damped d = damped_resonator(2e6);
    auto rec = evolve_master(d.H, d.c, d.psi0, linspace(0, 1e-6, 11), d.obs, {Engine::rk4, true});
    EXPECT_LT(rec.self_check_delta, 1e-6);
}

TEST(dynamics, PropagatorAgreesWithRk4) {
    Damped d = damped_resonator(1e6);
    d.H = ComplexMatrix(DenseMatrix(2e6 * (destroy(3).to_dense() + destroy(3).to_dense().adjoint())));
    auto grid = linspace(0, 2e-6, 21);
    auto a = evolve_master(d.H, d.c, d.psi0, grid, d.obs);
    auto b = evolve_master(d.H, d.c, d.psi0, grid, d.obs, {Engine::propagator});
    for (std::size_t k = 0; k < grid.size(); ++k) EXPECT_NEAR(a.series[0][k].real(), b.series[0][k].real(), 1e-7);
}

TEST(dynamics, StiffnessError) {
    Damped d = damped_resonator(1e6);
    MasterOptions o;
    o.max_steps = 10;
    try {
        evolve_master(d.H, d.c, d.psi0, linspace(0, 1e-6, 3), d.obs, o);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::stiffness);
    }
}

TEST(dynamics, DimensionMismatch) {
    Damped d = damped_resonator(1e6);
    EXPECT_THROW(evolve_master(d.H, d.c, QuantumState::basis(4, 1), linspace(0, 1e-6, 3), d.obs), Error);
}

TEST(dynamics, CsvExport) {
    Damped d = damped_resonator(1e6);
    auto rec = evolve_master(d.H, d.c, d.psi0, linspace(0, 1e-6, 3), d.obs);
    std::ostringstream os;
    rec.write_csv(os);
    EXPECT_EQ(os.str().substr(0, 13), "t,n_re,n_im\n0");
    EXPECT_THROW(rec.expectation("a"), Error);
}

TEST(dynamics, SingleTrajectoryNoCollapseIsSchrodinger) {
    DeviceParams p = preset("baseline");
    p.coupler_res_freqs[0] = p.interior_freqs[0] + 3 * MHz;
    SubsystemSelector sel{{"int1", "res1"}};
    ComplexMatrix H = build_hamiltonian(p, sel, Frame::rotating);
    auto grid = linspace(0, 100e-9, 51);
    ComplexMatrix nq = embed(ComplexMatrix(DenseMatrix(pauli::minus().adjoint() * pauli::minus())), "int1", sel.layout());
    auto tr = evolve_trajectories(H, {}, QuantumState::basis(4, 2), grid, {{"nq", nq}}, 1, 9);
    auto me = evolve_master(H, {}, QuantumState::basis(4, 2), grid, {{"nq", nq}});
    for (std::size_t k = 0; k < grid.size(); ++k) EXPECT_NEAR(tr.mean.series[0][k].real(), me.series[0][k].real(), 1e-8);
}

TEST(dynamics, TrajectoriesMatchMasterEquation) {
    const double kappa = 1e6;
    Damped d = damped_resonator(kappa);
    auto grid = linspace(0, 3.0 / kappa, 31);
    auto me = evolve_master(d.H, d.c, d.psi0, grid, d.obs);
    for (std::size_t n : {200u, 2000u}) {
        auto tr = evolve_trajectories(d.H, d.c, d.psi0, grid, d.obs, n, 42, false);
        for (std::size_t k : {5u, 10u, 20u}) {
            double diff = std::abs(tr.mean.series[0][k].real() - me.series[0][k].real());
            EXPECT_LE(diff, 3.0 * tr.stderr_series[0][k].real() + 1e-3) << "n=" << n << " k=" << k;
        }
    }
}

TEST(dynamics, TrajectoriesDeterministic) {
    Damped d = damped_resonator(1e6);
    auto grid = linspace(0, 2e-6, 11);
    auto a = evolve_trajectories(d.H, d.c, d.psi0, grid, d.obs, 50, 7);
    auto b = evolve_trajectories(d.H, d.c, d.psi0, grid, d.obs, 50, 7);
    EXPECT_EQ(a.mean.series, b.mean.series);
    EXPECT_EQ(a.jumps, b.jumps);
    EXPECT_THROW(evolve_trajectories(d.H, d.c, d.psi0, grid, d.obs, 0, 7), Error);
}

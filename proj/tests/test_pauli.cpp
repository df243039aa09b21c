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

#include "qchip/pauli.hpp"

using namespace qchip;

namespace {

DeviceParams zero_couplings() {
    DeviceParams p = preset("baseline");
    p.chi_i.fill(0);
    p.chi_j.fill(0);
    p.chi_k.fill(0);
    p.g_i_bare.fill(0);
    p.g_j_bare.fill(0);
    p.g_c_bare = 0;
    return p;
}

}  // namespace

TEST(pauli, ZeroCouplingsGiveNineZTerms) {
    PauliHamiltonian h = map_to_pauli(zero_couplings());
    EXPECT_EQ(h.n_qubits(), 9u);
    ASSERT_EQ(h.terms().size(), 9u);
    for (auto& t : h.terms()) {
        int z = 0;
        for (char c : t.ops) z += c == 'Z';
        EXPECT_EQ(z, 1);
    }
}

TEST(pauli, ChiSubstitution) {
    // chi Z (a^dag a) with a^dag a -> (I - Z)/2 on the partner spin
    DeviceParams p = zero_couplings();
    p.chi_j[0] = 10 * MHz;
    PauliHamiltonian h = map_to_pauli(p);
    std::string zi(9, 'I'), zz(9, 'I');
    zi[0] = 'Z';
    zz[0] = 'Z';
    zz[4] = 'Z';
    double czi = 0, czz = 0;
    for (auto& t : h.terms()) {
        if (t.ops == zi) czi = t.coeff;
        if (t.ops == zz) czz = t.coeff;
    }
    EXPECT_NEAR(czi, -0.5 * p.interior_freqs[0] + 5 * MHz, 1e-3);
    EXPECT_NEAR(czz, -5 * MHz, 1e-6);
}

TEST(pauli, ExchangeToXXYY) {
    DeviceParams p = zero_couplings();
    p.g_i_bare[1] = 50 * MHz;
    p.g_j_bare[1] = 40 * MHz;
    PauliHamiltonian h = map_to_pauli(p);
    double d_i = p.exterior_freqs[1] - p.coupler_res_freqs[1], d_j = p.interior_freqs[1] - p.coupler_res_freqs[1];
    double J = 50 * MHz * 40 * MHz * (1 / d_i + 1 / d_j);
    int found = 0;
    for (auto& t : h.terms())
        if ((t.ops == "IXIIIXIII" || t.ops == "IYIIIYIII")) {
            EXPECT_NEAR(t.coeff, J / 2, 1e-6);
            ++found;
        }
    EXPECT_EQ(found, 2);
    // ladder identity on two qubits: J(s-s+ + s+s-) == (J/2)(XX + YY)
    DenseMatrix sm = pauli::minus();
    DenseMatrix lhs = kron(sm, DenseMatrix(sm.adjoint())) + kron(DenseMatrix(sm.adjoint()), sm);
    DenseMatrix rhs = 0.5 * (kron(pauli::X(), pauli::X()) + kron(pauli::Y(), pauli::Y()));
    EXPECT_LT(max_abs(lhs - rhs), 1e-15);
}

TEST(pauli, ResonantMediatorRejected) {
    DeviceParams p = preset("optimized");
    p.coupler_res_freqs[2] = p.interior_freqs[2];
    try {
        map_to_pauli(p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::resonant_regime);
    }
}

TEST(pauli, MatrixHermitianAndMatchesTermSum) {
    PauliHamiltonian h = map_to_pauli(preset("optimized"));
    ComplexMatrix m(h.to_matrix());
    EXPECT_TRUE(m.is_hermitian(1e-12));
    // spot-check diagonal element against the Z-term sum
    double e = h.offset();
    for (auto& t : h.terms()) {
        bool diag = t.ops.find_first_of("XY") == std::string::npos;
        if (diag) e += t.coeff;  // |00...0>: every Z is +1
    }
    EXPECT_NEAR(m(0, 0).real(), e, 1e-12 * std::abs(e) + 1e-3);
    // random dense reconstruction on a 3-qubit restriction
    PauliHamiltonian r = h.restrict_to({0, 4, 8});
    DenseMatrix sum = r.offset() * DenseMatrix::Identity(8, 8);
    for (auto& t : r.terms()) {
        DenseMatrix k = DenseMatrix::Identity(1, 1);
        for (char c : t.ops) k = kron(k, c == 'X' ? pauli::X() : c == 'Y' ? pauli::Y() : c == 'Z' ? pauli::Z() : pauli::I());
        sum += t.coeff * k;
    }
    EXPECT_LT(max_abs(sum - DenseMatrix(r.to_matrix())), 1e-12 * max_abs(sum));
}

TEST(pauli, SerializationRoundTrip) {
    PauliHamiltonian h = map_to_pauli(preset("optimized"));
    PauliHamiltonian g = PauliHamiltonian::parse(h.serialize());
    EXPECT_EQ(g.serialize(), h.serialize());
    ASSERT_EQ(g.terms().size(), h.terms().size());
    EXPECT_EQ(g.terms()[3].coeff, h.terms()[3].coeff);
}

TEST(pauli, ReadoutSpinOption) {
    PauliHamiltonian h = map_to_pauli(zero_couplings(), {true});
    EXPECT_EQ(h.n_qubits(), 10u);
    EXPECT_EQ(h.terms().size(), 10u);
}

namespace {

PauliHamiltonian exchange_only(double J) {
    PauliHamiltonian h(2);
    h.add(J / 2, "XX");
    h.add(J / 2, "YY");
    return h;
}

PauliHamiltonian detuned_exchange(double J, double d) {
    PauliHamiltonian h(2);
    h.add(d / 2, "ZI");
    h.add(-d / 2, "IZ");
    h.add(0.3 * d, "ZZ");
    h.add(J / 2, "XX");
    h.add(J / 2, "YY");
    return h;
}

double trotter_error(const PauliHamiltonian& h, double t, int n) {
    DenseMatrix U = circuit_unitary(trotterize(h, t, n));
    DenseMatrix V = expm_unitary(ComplexMatrix(DenseMatrix(h.to_matrix())), t).to_dense();
    return op_norm(U - V);
}

}  // namespace

TEST(pauli, SingleTermExact) {
    PauliHamiltonian h(2);
    h.add(3 * MHz, "ZZ");
    EXPECT_LT(trotter_error(h, 40e-9, 1), 1e-12);
}

TEST(pauli, ExchangeTrotterMatchesExpm) {
    EXPECT_LT(trotter_error(exchange_only(10 * MHz), 50e-9, 64), 1e-6);
}

TEST(pauli, FirstOrderErrorHalving) {
    PauliHamiltonian h = detuned_exchange(10 * MHz, 30 * MHz);
    double e1 = trotter_error(h, 50e-9, 64), e2 = trotter_error(h, 50e-9, 128);
    EXPECT_GT(e1 / e2, 1.8);
    EXPECT_LT(e1 / e2, 2.2);
}

TEST(pauli, TrotterReversible) {
    PauliHamiltonian h = detuned_exchange(10 * MHz, 30 * MHz);
    DenseMatrix a = circuit_unitary(trotterize(h, 50e-9, 16)) * circuit_unitary(trotterize(h, -50e-9, 16));
    EXPECT_LT(max_abs(a - DenseMatrix::Identity(4, 4)), 1e-9);
}

TEST(pauli, TrotterGateAngles) {
    PauliHamiltonian h(2);
    h.add(2.0, "ZI");
    h.add(3.0, "ZZ");
    h.add(0.5, "XX");
    h.add(0.5, "YY");
    GateCircuit c = trotterize(h, 1.0, 2);
    ASSERT_EQ(c.size(), 8u);
    EXPECT_EQ(c.gates[0].kind, GateKind::Rz);
    EXPECT_DOUBLE_EQ(c.gates[0].angle, 2.0);    // 2 c dt
    EXPECT_DOUBLE_EQ(c.gates[1].angle, 3.0);
    EXPECT_DOUBLE_EQ(c.gates[2].angle, 0.5);    // J dt with c = J/2
    EXPECT_EQ(c.gates[3].kind, GateKind::Ryy);
    EXPECT_THROW(trotterize(h, 1.0, 0), Error);
    PauliHamiltonian bad(1);
    bad.add(1.0, "X");
    EXPECT_THROW(trotterize(bad, 1.0, 1), Error);
}

TEST(pauli, CircuitTextRoundTrip) {
    GateCircuit c = trotterize(detuned_exchange(10 * MHz, 30 * MHz), 50e-9, 3);
    c.add(GateKind::Measure, {0, 1});
    GateCircuit d = GateCircuit::parse(c.serialize());
    EXPECT_EQ(d.serialize(), c.serialize());
    EXPECT_EQ(d.n_qubits, 2);
}

TEST(pauli, EffectivePairDecoupledLimit) {
    DeviceParams p = preset("optimized");
    p.g_j_bare[0] = 0;
    p.g_c_bare = 0;
    EffectivePair e = effective_two_qubit(p, "int1-res-tun");
    EXPECT_DOUBLE_EQ(e.w1, p.interior_freqs[0]);
    EXPECT_DOUBLE_EQ(e.w2, tunable_freq(p, p.flux));
    EXPECT_EQ(e.J12, 0.0);
    EXPECT_NEAR(e.zeta_raw, 0.0, 1e-3);
}

TEST(pauli, EffectivePairSymmetric) {
    DeviceParams p = preset("baseline");
    p.exterior_freqs[0] = p.exterior_freqs[1] = 5.3 * GHz;
    p.g_i_bare[0] = p.g_i_bare[1] = 40 * MHz;
    p.chi_k[0] = p.chi_k[1];
    EffectivePair e = effective_two_qubit(p, "ext1-bus-ext2");
    EXPECT_NEAR(e.w1, e.w2, 1e-6);
    EXPECT_TRUE(e.spec.bus);
}

TEST(pauli, AnchorZetaCalibration) {
    double s = calibrate_zeta_scale();
    EffectivePair e = effective_two_qubit(preset("optimized"), kAnchorPair, s);
    EXPECT_NEAR(std::abs(e.zeta) / MHz, 0.7097, 1e-9);
    EXPECT_GT(s, 1.0);
}

TEST(pauli, ResonantPairRejected) {
    DeviceParams p = preset("optimized");
    p.coupler_res_freqs[0] = p.interior_freqs[0];
    try {
        effective_two_qubit(p, "int1-res-tun");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::resonant_regime);
    }
    EXPECT_THROW(parse_pair("int1-foo-tun"), Error);
    EXPECT_THROW(parse_pair("int1-res"), Error);
}

TEST(pauli, ReductionMatchesBosonicSpectrum) {
    // two exterior qubits on the readout bus: eliminate the bus and compare the
    // qubit-like single-excitation levels against the bosonic model
    DeviceParams p = preset("baseline");
    const double g = 60 * MHz;
    p.g_jr = {g, g, 0, 0};
    p.g_i_bare[0] = p.g_i_bare[1] = g;
    p.readout_freq = 6.4 * GHz;
    p.exterior_freqs[0] = 5.4 * GHz;
    p.exterior_freqs[1] = 5.55 * GHz;
    p.drive_amp = 0;
    SubsystemSelector sel{{"ext1", "ext2", "ro"}};
    DenseMatrix H = build_hamiltonian(p, sel, Frame::lab).to_dense();
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(H);
    // zero/one-excitation sector: 4 lowest levels
    EffectivePair e = effective_two_qubit(p, "ext1-bus-ext2");
    DenseMatrix h2(2, 2);
    h2 << e.w1, e.J12, e.J12, e.w2;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> ee(h2);
    double d = std::min(std::abs(e.delta1), std::abs(e.delta2));
    double bound = (g / d) * (g / d) * g;  // dispersive error scale g^3/Delta^2
    EXPECT_NEAR(es.eigenvalues()(0), 0.0, 1e-6);
    EXPECT_NEAR(es.eigenvalues()(1), ee.eigenvalues()(0), bound);
    EXPECT_NEAR(es.eigenvalues()(2), ee.eigenvalues()(1), bound);
}

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

#include <random>

#include "qchip/linalg.hpp"
#include "qchip/util.hpp"

using namespace qchip;

namespace {

DenseMatrix random_matrix(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = cplx(nd(rng), nd(rng));
    return m;
}

DenseMatrix random_hermitian(int n, std::mt19937_64& rng) {
    DenseMatrix m = random_matrix(n, rng);
    return 0.5 * (m + m.adjoint());
}

}  // namespace

TEST(linalg, DestroyShapes) {
    DenseMatrix a2 = destroy(2).to_dense();
    EXPECT_EQ(a2(0, 1), cplx(1));
    EXPECT_EQ(a2(0, 0), cplx(0));
    EXPECT_EQ(a2(1, 0), cplx(0));
    DenseMatrix a3 = destroy(3).to_dense();
    EXPECT_NEAR(a3(0, 1).real(), 1.0, 1e-15);
    EXPECT_NEAR(a3(1, 2).real(), std::sqrt(2.0), 1e-15);
    DenseMatrix a4 = destroy(4).to_dense();
    DenseMatrix n = a4.adjoint() * a4;
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(n(k, k).real(), k, 1e-14);
    EXPECT_NEAR(max_abs(n - DenseMatrix(n.diagonal().asDiagonal())), 0.0, 1e-15);
}

TEST(linalg, DestroyRejectsSmallDim) {
    EXPECT_THROW(destroy(1), Error);
    try {
        destroy(0);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::invalid_dimension);
    }
}

TEST(linalg, LayoutInvariants) {
    EXPECT_THROW(SpaceLayout({{"q", 1, false}}), Error);
    EXPECT_THROW(SpaceLayout({{"q", 3, true}}), Error);
    EXPECT_THROW(SpaceLayout({{"a", 2, true}, {"a", 2, true}}), Error);
    SpaceLayout L({{"q0", 2, true}, {"r", 3, false}});
    EXPECT_EQ(L.total_dim(), 6);
    EXPECT_EQ(L.index_of("r"), 1u);
    EXPECT_THROW(L.index_of("zz"), Error);
}

TEST(linalg, EmbedExamples) {
    SpaceLayout L({{"q0", 2, true}, {"q1", 2, true}});
    ComplexMatrix z(pauli::Z());
    DenseMatrix e = embed(z, "q0", L).to_dense();
    EXPECT_NEAR(max_abs(e - kron(pauli::Z(), pauli::I())), 0.0, 1e-15);
    DenseMatrix id = embed(ComplexMatrix(pauli::I()), "q1", L).to_dense();
    EXPECT_NEAR(max_abs(id - DenseMatrix::Identity(4, 4)), 0.0, 1e-15);

    SpaceLayout L2({{"q0", 2, true}, {"r", 3, false}});
    EXPECT_NEAR(std::abs(embed(z, "q0", L2).trace()), 0.0, 1e-15);
    EXPECT_THROW(embed(z, "r", L2), Error);
    EXPECT_THROW(embed(z, "nope", L2), Error);
}

TEST(linalg, EmbedPreservesSpectrum) {
    std::mt19937_64 rng(3);
    SpaceLayout L({{"a", 2, false}, {"b", 3, false}, {"c", 2, false}});
    DenseMatrix h = random_hermitian(3, rng);
    DenseMatrix big = embed(ComplexMatrix(h), "b", L).to_dense();
    Eigen::SelfAdjointEigenSolver<DenseMatrix> small(h), large(big);
    for (int k = 0; k < 3; ++k) {
        int mult = 0;
        for (int j = 0; j < 12; ++j)
            if (std::abs(large.eigenvalues()(j) - small.eigenvalues()(k)) < 1e-10) ++mult;
        EXPECT_EQ(mult, 4);
    }
}

TEST(linalg, KronMixedProduct) {
    std::mt19937_64 rng(7);
    DenseMatrix A = random_matrix(2, rng), B = random_matrix(3, rng), C = random_matrix(2, rng), D = random_matrix(3, rng);
    DenseMatrix lhs = kron(A, B) * kron(C, D);
    DenseMatrix rhs = kron(DenseMatrix(A * C), DenseMatrix(B * D));
    EXPECT_LT(max_abs(lhs - rhs), 1e-12);
}

TEST(linalg, SparseDenseAgree) {
    std::mt19937_64 rng(11);
    DenseMatrix m = random_matrix(6, rng);
    ComplexMatrix d(m);
    ComplexMatrix s(d.to_sparse());
    EXPECT_TRUE(s.is_sparse());
    EXPECT_LT(max_abs(s.to_dense() - d.to_dense()), 1e-12);
    EXPECT_LT(max_abs((s * d).to_dense() - m * m), 1e-12);
    EXPECT_LT(max_abs((s + d).to_dense() - 2.0 * m), 1e-12);
}

TEST(linalg, AutomaticLayoutThreshold) {
    EXPECT_FALSE(identity(1023).is_sparse());
    EXPECT_TRUE(identity(1024).is_sparse());
}

TEST(linalg, HermitianFlag) {
    std::mt19937_64 rng(5);
    EXPECT_TRUE(ComplexMatrix(random_hermitian(5, rng)).is_hermitian());
    EXPECT_FALSE(ComplexMatrix(random_matrix(5, rng)).is_hermitian());
}

TEST(linalg, ExpmZeroIsIdentity) {
    DenseMatrix U = expm_unitary(ComplexMatrix(DenseMatrix::Zero(3, 3)), 1.7).to_dense();
    EXPECT_LT(max_abs(U - DenseMatrix::Identity(3, 3)), 1e-15);
}

TEST(linalg, ExpmPauliX) {
    DenseMatrix U = expm_unitary(ComplexMatrix(pauli::X()), kPi / 2).to_dense();
    EXPECT_LT(max_abs(U - cplx(0, -1) * pauli::X()), 1e-14);
}

TEST(linalg, ExpmUnitaryRandom64) {
    std::mt19937_64 rng(13);
    DenseMatrix h = random_hermitian(64, rng);
    DenseMatrix U = expm_unitary(ComplexMatrix(h), 0.9).to_dense();
    EXPECT_LT(max_abs(U.adjoint() * U - DenseMatrix::Identity(64, 64)), 1e-10);
}

TEST(linalg, ExpmGroupProperty) {
    std::mt19937_64 rng(17);
    ComplexMatrix h(random_hermitian(16, rng));
    DenseMatrix a = expm_unitary(h, 0.3).to_dense() * expm_unitary(h, 0.45).to_dense();
    DenseMatrix b = expm_unitary(h, 0.75).to_dense();
    EXPECT_LT(max_abs(a - b), 1e-9);
}

TEST(linalg, ExpmLargeUsesPadeAndAgrees) {
    std::mt19937_64 rng(19);
    DenseMatrix h = random_hermitian(520, rng) / 30.0;
    DenseMatrix U = expm_unitary(ComplexMatrix(h), 1.0).to_dense();
    EXPECT_LT(max_abs(U.adjoint() * U - DenseMatrix::Identity(520, 520)), 1e-10);
    // compare with eigendecomposition of the same matrix
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (h + h.adjoint()));
    Eigen::VectorXcd ph(520);
    for (int k = 0; k < 520; ++k) ph(k) = std::exp(cplx(0, -es.eigenvalues()(k)));
    DenseMatrix ref = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    EXPECT_LT(max_abs(U - ref), 1e-9);
}

TEST(linalg, ExpmRejectsNonHermitian) {
    std::mt19937_64 rng(23);
    try {
        expm_unitary(ComplexMatrix(random_matrix(4, rng)), 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::contract_violation);
    }
}

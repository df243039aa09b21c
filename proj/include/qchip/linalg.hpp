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

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <string>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>
#include <variant>
#include <vector>

#include "qchip/error.hpp"

namespace qchip {

using cplx = std::complex<double>;
typedef Eigen::MatrixXcd DenseMatrix;
typedef Eigen::SparseMatrix<cplx, Eigen::RowMajor> SparseMatrix;
typedef Eigen::VectorXcd DenseVector;

inline constexpr Eigen::Index kDenseLimit = 1024;
inline constexpr Eigen::Index kEigExpmLimit = 512;

// Dense below kDenseLimit, compressed-sparse above, unless built explicitly.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    explicit ComplexMatrix(DenseMatrix m) : data_(std::move(m)) {}
    explicit ComplexMatrix(SparseMatrix m) : data_(std::move(m)) { std::get<SparseMatrix>(data_).makeCompressed(); }

    static ComplexMatrix automatic(const SparseMatrix& m) {
        if (m.rows() < kDenseLimit) return ComplexMatrix(DenseMatrix(m));
        return ComplexMatrix(m);
    }
    static ComplexMatrix automatic(const DenseMatrix& m) {
        if (m.rows() < kDenseLimit) return ComplexMatrix(m);
        return ComplexMatrix(SparseMatrix(m.sparseView()));
    }

    Eigen::Index rows() const { return std::visit([](auto& m) { return m.rows(); }, data_); }
    Eigen::Index cols() const { return std::visit([](auto& m) { return m.cols(); }, data_); }
    bool is_sparse() const { return std::holds_alternative<SparseMatrix>(data_); }
    bool empty() const { return rows() == 0; }

    DenseMatrix to_dense() const {
        if (is_sparse()) return DenseMatrix(std::get<SparseMatrix>(data_));
        return std::get<DenseMatrix>(data_);
    }
    SparseMatrix to_sparse() const {
        if (is_sparse()) return std::get<SparseMatrix>(data_);
        SparseMatrix s = std::get<DenseMatrix>(data_).sparseView(0.0, 0.0);
        s.makeCompressed();
        return s;
    }
    const DenseMatrix* dense_ptr() const { return std::get_if<DenseMatrix>(&data_); }
    const SparseMatrix* sparse_ptr() const { return std::get_if<SparseMatrix>(&data_); }

    cplx operator()(Eigen::Index r, Eigen::Index c) const {
        if (auto* d = dense_ptr()) return (*d)(r, c);
        return sparse_ptr()->coeff(r, c);
    }

    ComplexMatrix adjoint() const {
        if (auto* d = dense_ptr()) return ComplexMatrix(DenseMatrix(d->adjoint()));
        return ComplexMatrix(SparseMatrix(sparse_ptr()->adjoint()));
    }

    cplx trace() const {
        if (auto* d = dense_ptr()) return d->trace();
        cplx t = 0;
        const SparseMatrix& s = *sparse_ptr();
        for (Eigen::Index k = 0; k < s.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(s, k); it; ++it)
                if (it.row() == it.col()) t += it.value();
        return t;
    }

    double max_abs() const {
        if (auto* d = dense_ptr()) return d->size() ? d->cwiseAbs().maxCoeff() : 0.0;
        double m = 0;
        const SparseMatrix& s = *sparse_ptr();
        for (Eigen::Index k = 0; k < s.nonZeros(); ++k) m = std::max(m, std::abs(s.valuePtr()[k]));
        return m;
    }

    // Relative to the largest entry so rad/s-scaled matrices are judged fairly.
    bool is_hermitian(double tol = 1e-12) const {
        if (rows() != cols()) return false;
        double scale = std::max(1.0, max_abs());
        if (auto* d = dense_ptr()) return (*d - d->adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
        SparseMatrix diff = *sparse_ptr() - SparseMatrix(sparse_ptr()->adjoint());
        double m = 0;
        for (Eigen::Index k = 0; k < diff.nonZeros(); ++k) m = std::max(m, std::abs(diff.valuePtr()[k]));
        return m <= tol * scale;
    }

    DenseMatrix apply(const DenseMatrix& x) const {
        if (auto* d = dense_ptr()) return (*d) * x;
        return (*sparse_ptr()) * x;
    }

    friend ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
        check_same(a, b);
        if (a.is_sparse() || b.is_sparse()) return ComplexMatrix(SparseMatrix(a.to_sparse() + b.to_sparse()));
        return ComplexMatrix(DenseMatrix(*a.dense_ptr() + *b.dense_ptr()));
    }
    friend ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) { return a + (-1.0) * b; }
    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols() != b.rows()) throw Error(Errc::dimension_mismatch, "matrix product shape mismatch");
        if (a.is_sparse() || b.is_sparse()) return ComplexMatrix(SparseMatrix(a.to_sparse() * b.to_sparse()));
        return ComplexMatrix(DenseMatrix(*a.dense_ptr() * *b.dense_ptr()));
    }
    friend ComplexMatrix operator*(cplx s, const ComplexMatrix& a) {
        if (auto* d = a.dense_ptr()) return ComplexMatrix(DenseMatrix(s * *d));
        return ComplexMatrix(SparseMatrix(s * *a.sparse_ptr()));
    }

private:
    static void check_same(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.rows() != b.rows() || a.cols() != b.cols())
            throw Error(Errc::dimension_mismatch, "matrix sum shape mismatch");
    }
    std::variant<DenseMatrix, SparseMatrix> data_;
};

struct Mode {
    std::string label;
    int dim = 2;
    bool qubit = false;
};

class SpaceLayout {
public:
    SpaceLayout() = default;
    explicit SpaceLayout(std::vector<Mode> modes) : modes_(std::move(modes)) {
        for (std::size_t i = 0; i < modes_.size(); ++i) {
            const Mode& m = modes_[i];
            if (m.dim < 2) throw Error(Errc::invalid_dimension, "mode " + m.label + " has dimension < 2");
            if (m.qubit && m.dim != 2) throw Error(Errc::invalid_dimension, "qubit mode " + m.label + " must have dimension 2");
            for (std::size_t j = 0; j < i; ++j)
                if (modes_[j].label == m.label) throw Error(Errc::invalid_argument, "duplicate mode label " + m.label);
        }
    }

    const std::vector<Mode>& modes() const { return modes_; }
    std::size_t size() const { return modes_.size(); }
    Eigen::Index total_dim() const {
        Eigen::Index d = 1;
        for (auto& m : modes_) d *= m.dim;
        return d;
    }
    bool contains(const std::string& label) const {
        for (auto& m : modes_)
            if (m.label == label) return true;
        return false;
    }
    std::size_t index_of(const std::string& label) const {
        for (std::size_t i = 0; i < modes_.size(); ++i)
            if (modes_[i].label == label) return i;
        throw Error(Errc::unknown_label, "unknown mode label " + label);
    }
    int dim_of(const std::string& label) const { return modes_[index_of(label)].dim; }

private:
    std::vector<Mode> modes_;
};

inline SparseMatrix sparse_identity(Eigen::Index n) {
    SparseMatrix I(n, n);
    I.setIdentity();
    return I;
}

inline SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
    SparseMatrix out = Eigen::kroneckerProduct(a, b);
    out.makeCompressed();
    return out;
}

inline DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) { return Eigen::kroneckerProduct(a, b); }

inline ComplexMatrix destroy(int dim) {
    if (dim < 2) throw Error(Errc::invalid_dimension, "destroy needs dim >= 2");
    DenseMatrix a = DenseMatrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return ComplexMatrix(a);
}

inline ComplexMatrix identity(Eigen::Index n) { return ComplexMatrix::automatic(sparse_identity(n)); }

namespace pauli {
inline DenseMatrix I() { return DenseMatrix::Identity(2, 2); }
inline DenseMatrix X() {
    DenseMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}
inline DenseMatrix Y() {
    DenseMatrix m(2, 2);
    m << 0, cplx(0, -1), cplx(0, 1), 0;
    return m;
}
inline DenseMatrix Z() {
    DenseMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}
// |0> is the ground state, so sigma-minus = |0><1|.
inline DenseMatrix minus() {
    DenseMatrix m = DenseMatrix::Zero(2, 2);
    m(0, 1) = 1;
    return m;
}
}  // namespace pauli

inline SparseMatrix embed_sparse(const SparseMatrix& op, const std::string& label, const SpaceLayout& layout) {
    std::size_t idx = layout.index_of(label);
    const auto& modes = layout.modes();
    if (op.rows() != modes[idx].dim || op.cols() != modes[idx].dim)
        throw Error(Errc::dimension_mismatch, "operator dimension does not match mode " + label);
    Eigen::Index left = 1, right = 1;
    for (std::size_t i = 0; i < idx; ++i) left *= modes[i].dim;
    for (std::size_t i = idx + 1; i < modes.size(); ++i) right *= modes[i].dim;
    SparseMatrix out = op;
    if (left > 1) out = kron(sparse_identity(left), out);
    if (right > 1) out = kron(out, sparse_identity(right));
    out.makeCompressed();
    return out;
}

inline ComplexMatrix embed(const ComplexMatrix& op, const std::string& label, const SpaceLayout& layout) {
    return ComplexMatrix::automatic(embed_sparse(op.to_sparse(), label, layout));
}

// exp(-i H t); eigendecomposition up to kEigExpmLimit, Pade scaling-and-squaring above.
inline ComplexMatrix expm_unitary(const ComplexMatrix& H, double t) {
    if (H.rows() != H.cols()) throw Error(Errc::dimension_mismatch, "expm_unitary needs a square matrix");
    if (!H.is_hermitian(1e-12)) throw Error(Errc::contract_violation, "expm_unitary needs a Hermitian matrix");
    DenseMatrix h = H.to_dense();
    h = 0.5 * (h + h.adjoint()).eval();
    if (h.rows() <= kEigExpmLimit) {
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h);
        const DenseMatrix& V = es.eigenvectors();
        Eigen::VectorXcd ph(h.rows());
        for (Eigen::Index k = 0; k < h.rows(); ++k) ph(k) = std::exp(cplx(0, -es.eigenvalues()(k) * t));
        DenseMatrix U = V * ph.asDiagonal() * V.adjoint();
        return ComplexMatrix(U);
    }
    DenseMatrix A = (cplx(0, -t) * h).eval();
    DenseMatrix U = A.exp();
    return ComplexMatrix(U);
}

inline double max_abs(const DenseMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Induced 2-norm: sqrt of the top eigenvalue of M^dagger M.
inline double op_norm(const DenseMatrix& m) {
    DenseMatrix g = m.adjoint() * m;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(g, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

}  // namespace qchip

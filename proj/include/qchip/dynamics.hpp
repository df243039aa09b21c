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

#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "qchip/linalg.hpp"
#include "qchip/util.hpp"

namespace qchip {

struct QuantumState {
    enum class Kind { ket, density };
    Kind kind = Kind::density;
    DenseMatrix data;  // column vector for kets

    static QuantumState ket(const DenseVector& v) {
        QuantumState s;
        s.kind = Kind::ket;
        s.data = v;
        s.validate();
        return s;
    }
    static QuantumState density(const DenseMatrix& r) {
        QuantumState s;
        s.kind = Kind::density;
        s.data = r;
        s.validate();
        return s;
    }
    static QuantumState basis(Eigen::Index dim, Eigen::Index k) {
        DenseVector v = DenseVector::Zero(dim);
        v(k) = 1;
        return ket(v);
    }

    Eigen::Index dim() const { return data.rows(); }

    DenseMatrix as_density() const {
        if (kind == Kind::density) return data;
        return data * data.adjoint();
    }

    void validate() const {
        if (kind == Kind::ket) {
            if (data.cols() != 1) throw Error(Errc::dimension_mismatch, "ket must be a column vector");
            if (std::abs(data.norm() - 1.0) > 1e-9) throw Error(Errc::contract_violation, "ket not normalized");
            return;
        }
        if (data.rows() != data.cols()) throw Error(Errc::dimension_mismatch, "density matrix must be square");
        if (max_abs(data - data.adjoint()) > 1e-9) throw Error(Errc::contract_violation, "density matrix not Hermitian");
        if (std::abs(data.trace() - cplx(1.0)) > 1e-9) throw Error(Errc::contract_violation, "density matrix trace != 1");
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es(data, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-8) throw Error(Errc::contract_violation, "density matrix not positive");
    }
};

struct Observable {
    std::string label;
    ComplexMatrix op;
};

struct EvolutionRecord {
    std::vector<double> times;
    std::vector<std::string> labels;
    std::vector<std::vector<cplx>> series;  // series[observable][time]
    QuantumState final_state;
    double max_trace_drift = 0.0;
    double step = 0.0;
    std::size_t steps = 0;
    double self_check_delta = std::numeric_limits<double>::quiet_NaN();

    const std::vector<cplx>& expectation(const std::string& label) const {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == label) return series[i];
        throw Error(Errc::missing_observable, "record has no observable '" + label + "'");
    }

    void write_csv(std::ostream& os) const {
        os << "t";
        for (auto& l : labels) os << "," << l << "_re," << l << "_im";
        os << "\n";
        for (std::size_t k = 0; k < times.size(); ++k) {
            os << fmt_double(times[k]);
            for (auto& s : series) os << "," << fmt_double(s[k].real()) << "," << fmt_double(s[k].imag());
            os << "\n";
        }
    }
};

enum class Engine {
    rk4,         // fixed-step classic RK4
    propagator,  // exact exp(L dt) on the Liouville space; small systems only
};

struct MasterOptions {
    Engine engine = Engine::rk4;
    bool self_check = false;
    std::size_t max_steps = 50'000'000;
    double max_step = 0.0;  // > 0 caps the step further
};

namespace detail {

inline void check_grid(const std::vector<double>& grid) {
    if (grid.size() < 2) throw Error(Errc::invalid_argument, "time grid needs at least two points");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] > grid[k - 1])) throw Error(Errc::invalid_argument, "time grid must be strictly increasing");
}

inline double row_sum_norm(const SparseMatrix& m) {
    double best = 0;
    for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
        double s = 0;
        for (SparseMatrix::InnerIterator it(m, r); it; ++it) s += std::abs(it.value());
        best = std::max(best, s);
    }
    return best;
}

// Tr(rho O) for sparse O
inline cplx expect(const SparseMatrix& O, const DenseMatrix& rho) {
    cplx s = 0;
    for (Eigen::Index r = 0; r < O.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(O, r); it; ++it) s += it.value() * rho(it.col(), it.row());
    return s;
}

inline cplx expect_ket(const SparseMatrix& O, const DenseVector& psi) { return psi.dot(O * psi); }

struct Lindblad {
    SparseMatrix Heff;  // H - i/2 sum L^dag L
    std::vector<SparseMatrix> L;
    Eigen::Index dim = 0;
    double fmax = 0;

    Lindblad(const ComplexMatrix& H, const std::vector<ComplexMatrix>& collapse) {
        dim = H.rows();
        if (H.cols() != dim) throw Error(Errc::dimension_mismatch, "Hamiltonian must be square");
        if (!H.is_hermitian(1e-10)) throw Error(Errc::contract_violation, "Hamiltonian must be Hermitian");
        Heff = H.to_sparse();
        SparseMatrix sumLL(dim, dim);
        for (auto& c : collapse) {
            if (c.rows() != dim || c.cols() != dim) throw Error(Errc::dimension_mismatch, "collapse operator dimension mismatch");
            SparseMatrix s = c.to_sparse();
            SparseMatrix ll = SparseMatrix(s.adjoint()) * s;
            sumLL += ll;
            L.push_back(std::move(s));
        }
        Heff -= cplx(0, 0.5) * sumLL;
        Heff.makeCompressed();
        fmax = row_sum_norm(Heff);
    }

    // drho = -i(Heff rho - rho Heff^dag) + sum L rho L^dag, using rho = rho^dag.
    void rhs(const DenseMatrix& rho, DenseMatrix& out, DenseMatrix& tmp) const {
        tmp.noalias() = Heff * rho;
        out = cplx(0, -1) * tmp + cplx(0, 1) * tmp.adjoint();
        for (auto& l : L) {
            tmp.noalias() = l * rho;
            DenseMatrix t2 = tmp.adjoint();  // rho L^dag
            out.noalias() += l * t2;
        }
    }

    DenseMatrix liouvillian() const {
        // column-stacking vec: vec(A X B) = (B^T kron A) vec(X)
        DenseMatrix I = DenseMatrix::Identity(dim, dim);
        DenseMatrix He(Heff);
        DenseMatrix Lv = cplx(0, -1) * (kron(I, He) - kron(DenseMatrix(He.conjugate()), I));
        for (auto& l : L) {
            DenseMatrix ld(l);
            Lv += kron(DenseMatrix(ld.conjugate()), ld);
        }
        return Lv;
    }
};

inline std::size_t substeps(double dt, double hmax) { return static_cast<std::size_t>(std::ceil(dt / hmax - 1e-12)); }

}  // namespace detail

inline EvolutionRecord evolve_master(const ComplexMatrix& H, const std::vector<ComplexMatrix>& collapse, const QuantumState& rho0,
                                     const std::vector<double>& grid, const std::vector<Observable>& observables,
                                     const MasterOptions& opt = {}) {
    detail::check_grid(grid);
    detail::Lindblad lb(H, collapse);
    if (rho0.dim() != lb.dim) throw Error(Errc::dimension_mismatch, "initial state dimension mismatch");
    std::vector<SparseMatrix> obs;
    EvolutionRecord rec;
    for (auto& o : observables) {
        if (o.op.rows() != lb.dim) throw Error(Errc::dimension_mismatch, "observable '" + o.label + "' dimension mismatch");
        obs.push_back(o.op.to_sparse());
        rec.labels.push_back(o.label);
    }
    rec.series.assign(obs.size(), std::vector<cplx>(grid.size()));
    rec.times = grid;

    DenseMatrix rho = rho0.as_density();
    auto record = [&](std::size_t k) {
        for (std::size_t i = 0; i < obs.size(); ++i) rec.series[i][k] = detail::expect(obs[i], rho);
        rec.max_trace_drift = std::max(rec.max_trace_drift, std::abs(rho.trace() - cplx(1.0)));
    };
    record(0);

    const double T = grid.back() - grid.front();
    if (opt.engine == Engine::propagator) {
        if (lb.dim > 24) throw Error(Errc::invalid_argument, "propagator engine limited to dimension 24");
        DenseMatrix Lv = lb.liouvillian();
        DenseMatrix P;
        double last_dt = -1;
        for (std::size_t k = 1; k < grid.size(); ++k) {
            double dt = grid[k] - grid[k - 1];
            if (std::abs(dt - last_dt) > 1e-12 * dt) {  // linspace steps differ in the last bits
                P = (Lv * dt).exp();
                last_dt = dt;
            }
            Eigen::Map<DenseVector> v(rho.data(), rho.size());
            DenseVector nv = P * v;
            v = nv;
            rho = 0.5 * (rho + rho.adjoint()).eval();
            record(k);
        }
        rec.final_state.kind = QuantumState::Kind::density;
        rec.final_state.data = rho;
        return rec;
    }

    double hmax = T / 2000.0;
    if (lb.fmax > 0) hmax = std::min(hmax, 1.0 / (50.0 * lb.fmax));
    if (opt.max_step > 0) hmax = std::min(hmax, opt.max_step);

    std::size_t total = 0;
    for (std::size_t k = 1; k < grid.size(); ++k) total += detail::substeps(grid[k] - grid[k - 1], hmax);
    if (total > opt.max_steps)
        throw Error(Errc::stiffness, "step size underflow: " + std::to_string(total) + " RK4 steps needed");

    auto integrate = [&](DenseMatrix r, double hcap, std::vector<DenseMatrix>* snapshots) {
        DenseMatrix k1, k2, k3, k4, tmp, y;
        for (std::size_t k = 1; k < grid.size(); ++k) {
            double dt = grid[k] - grid[k - 1];
            std::size_t n = detail::substeps(dt, hcap);
            double h = dt / static_cast<double>(n);
            for (std::size_t s = 0; s < n; ++s) {
                lb.rhs(r, k1, tmp);
                y = r + (0.5 * h) * k1;
                lb.rhs(y, k2, tmp);
                y = r + (0.5 * h) * k2;
                lb.rhs(y, k3, tmp);
                y = r + h * k3;
                lb.rhs(y, k4, tmp);
                r += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            if (snapshots) snapshots->push_back(r);
        }
        return r;
    };

    std::vector<DenseMatrix> snaps;
    snaps.reserve(grid.size() - 1);
    rho = integrate(rho, hmax, &snaps);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        DenseMatrix& r = snaps[k - 1];
        for (std::size_t i = 0; i < obs.size(); ++i) rec.series[i][k] = detail::expect(obs[i], r);
        rec.max_trace_drift = std::max(rec.max_trace_drift, std::abs(r.trace() - cplx(1.0)));
    }
    rec.step = hmax;
    rec.steps = total;
    if (opt.self_check) {
        DenseMatrix half = integrate(rho0.as_density(), 0.5 * hmax, nullptr);
        double d = 0;
        for (auto& o : obs) d = std::max(d, std::abs(detail::expect(o, half) - detail::expect(o, rho)));
        rec.self_check_delta = d;
    }
    rec.final_state.kind = QuantumState::Kind::density;
    rec.final_state.data = rho;
    return rec;
}

struct TrajectoryResult {
    EvolutionRecord mean;
    // standard error of the trajectory mean, per observable per time (real and imaginary parts)
    std::vector<std::vector<cplx>> stderr_series;
    std::vector<std::vector<std::vector<cplx>>> per_trajectory;  // [traj][observable][time]
    std::vector<std::size_t> jumps;                              // jump count per trajectory
};

// Quantum-jump unraveling with waiting-time sampling; jump times resolved to one RK4 step.
inline TrajectoryResult evolve_trajectories(const ComplexMatrix& H, const std::vector<ComplexMatrix>& collapse,
                                            const QuantumState& psi0, const std::vector<double>& grid,
                                            const std::vector<Observable>& observables, std::size_t n_traj,
                                            std::uint64_t seed, bool keep_trajectories = true) {
    if (n_traj == 0) throw Error(Errc::invalid_argument, "n_traj must be positive");
    if (psi0.kind != QuantumState::Kind::ket) throw Error(Errc::invalid_argument, "trajectories need a ket initial state");
    detail::check_grid(grid);
    detail::Lindblad lb(H, collapse);
    if (psi0.dim() != lb.dim) throw Error(Errc::dimension_mismatch, "initial state dimension mismatch");
    std::vector<SparseMatrix> obs;
    for (auto& o : observables) {
        if (o.op.rows() != lb.dim) throw Error(Errc::dimension_mismatch, "observable '" + o.label + "' dimension mismatch");
        obs.push_back(o.op.to_sparse());
    }
    const double T = grid.back() - grid.front();
    double hmax = T / 2000.0;
    if (lb.fmax > 0) hmax = std::min(hmax, 1.0 / (50.0 * lb.fmax));
    const SparseMatrix A = cplx(0, -1) * lb.Heff;

    TrajectoryResult res;
    res.per_trajectory.assign(n_traj, std::vector<std::vector<cplx>>(obs.size(), std::vector<cplx>(grid.size())));
    res.jumps.assign(n_traj, 0);

    parallel_for(n_traj, [&](std::size_t tr) {
        Rng rng(derive_seed(seed, tr));
        DenseVector psi = psi0.data.col(0);
        double r = uniform01(rng);
        auto rec = [&](std::size_t k) {
            DenseVector u = psi / psi.norm();
            for (std::size_t i = 0; i < obs.size(); ++i) res.per_trajectory[tr][i][k] = detail::expect_ket(obs[i], u);
        };
        rec(0);
        DenseVector k1, k2, k3, k4;
        for (std::size_t k = 1; k < grid.size(); ++k) {
            double dt = grid[k] - grid[k - 1];
            std::size_t n = detail::substeps(dt, hmax);
            double h = dt / static_cast<double>(n);
            for (std::size_t s = 0; s < n; ++s) {
                k1 = A * psi;
                k2 = A * (psi + 0.5 * h * k1);
                k3 = A * (psi + 0.5 * h * k2);
                k4 = A * (psi + h * k3);
                psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                if (!lb.L.empty() && psi.squaredNorm() <= r) {
                    std::vector<double> w(lb.L.size());
                    double tot = 0;
                    for (std::size_t j = 0; j < lb.L.size(); ++j) tot += (w[j] = (lb.L[j] * psi).squaredNorm());
                    double pick = uniform01(rng) * tot;
                    std::size_t j = 0;
                    while (j + 1 < w.size() && pick >= w[j]) pick -= w[j++];
                    DenseVector nv = lb.L[j] * psi;
                    psi = nv / nv.norm();
                    r = uniform01(rng);
                    ++res.jumps[tr];
                }
            }
            rec(k);
        }
    });

    EvolutionRecord& m = res.mean;
    m.times = grid;
    for (auto& o : observables) m.labels.push_back(o.label);
    m.series.assign(obs.size(), std::vector<cplx>(grid.size()));
    res.stderr_series.assign(obs.size(), std::vector<cplx>(grid.size()));
    const double N = static_cast<double>(n_traj);
    for (std::size_t i = 0; i < obs.size(); ++i)
        for (std::size_t k = 0; k < grid.size(); ++k) {
            cplx s = 0;
            double sr = 0, si = 0;
            for (std::size_t tr = 0; tr < n_traj; ++tr) s += res.per_trajectory[tr][i][k];
            cplx mu = s / N;
            for (std::size_t tr = 0; tr < n_traj; ++tr) {
                cplx d = res.per_trajectory[tr][i][k] - mu;
                sr += d.real() * d.real();
                si += d.imag() * d.imag();
            }
            m.series[i][k] = mu;
            double den = n_traj > 1 ? N * (N - 1) : 1.0;
            res.stderr_series[i][k] = cplx(std::sqrt(sr / den), std::sqrt(si / den));
        }
    m.step = hmax;
    if (!keep_trajectories) res.per_trajectory.clear();
    return res;
}

}  // namespace qchip

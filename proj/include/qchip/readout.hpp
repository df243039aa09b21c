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

#include <array>
#include <cmath>
#include <ostream>
#include <vector>

#include "qchip/device.hpp"
#include "qchip/dynamics.hpp"
#include "qchip/pauli.hpp"
#include "qchip/util.hpp"

namespace qchip {

struct IQPoint {
    double I = 0, Q = 0;
};

struct IQRecord {
    IQPoint mu0, mu1;
    double T_int = 0;

    double separation() const { return std::hypot(mu1.I - mu0.I, mu1.Q - mu0.Q); }
};

struct ShotCloud {
    IQRecord means;
    std::vector<IQPoint> shots0, shots1;
    double kappa_snr = 0;
    double sigma = 0;
    std::uint64_t seed = 0;

    void write_csv(std::ostream& os) const {
        os << "state,I,Q\n";
        for (auto& s : shots0) os << "0," << fmt_double(s.I) << "," << fmt_double(s.Q) << "\n";
        for (auto& s : shots1) os << "1," << fmt_double(s.I) << "," << fmt_double(s.Q) << "\n";
    }
};

struct FidelityEstimate {
    double analytic = 0.5;
    double empirical = 0.5;
    double stderr = 0;
    IQPoint axis;      // u*
    IQPoint midpoint;  // m
    std::size_t shots = 0;
};

inline IQPoint integrate_iq(const EvolutionRecord& rec, double T_int, const std::string& label = "a") {
    const auto& a = rec.expectation(label);
    const auto& t = rec.times;
    if (!(T_int > 0)) throw Error(Errc::invalid_argument, "T_int must be positive");
    if (T_int > t.back() - t.front() + 1e-15 * std::abs(t.back())) throw Error(Errc::invalid_argument, "T_int exceeds the record");
    IQPoint p;
    const double tend = t.front() + T_int;
    for (std::size_t k = 1; k < t.size() && t[k - 1] < tend; ++k) {
        double t1 = std::min(t[k], tend);
        cplx a1 = a[k];
        if (t1 < t[k]) a1 = a[k - 1] + (a[k] - a[k - 1]) * ((t1 - t[k - 1]) / (t[k] - t[k - 1]));
        double h = t1 - t[k - 1];
        p.I += 0.5 * h * (a[k - 1].real() + a1.real());
        p.Q += 0.5 * h * (a[k - 1].imag() + a1.imag());
    }
    return p;
}

// sigma = kappa_snr * reference_separation; the reference defaults to this record's own separation.
inline ShotCloud sample_shots(const IQRecord& iq, double kappa_snr, std::size_t n_shots, std::uint64_t seed,
                              double reference_separation = -1.0) {
    if (!(kappa_snr > 0)) throw Error(Errc::invalid_argument, "kappa_snr must be positive");
    if (n_shots < 1) throw Error(Errc::invalid_argument, "n_shots must be >= 1");
    ShotCloud c;
    c.means = iq;
    c.kappa_snr = kappa_snr;
    c.seed = seed;
    double ref = reference_separation > 0 ? reference_separation : iq.separation();
    c.sigma = kappa_snr * ref;
    Rng rng(seed);
    Gaussian g(rng);
    c.shots0.resize(n_shots);
    c.shots1.resize(n_shots);
    for (std::size_t i = 0; i < n_shots; ++i) c.shots0[i] = {iq.mu0.I + c.sigma * g(), iq.mu0.Q + c.sigma * g()};
    for (std::size_t i = 0; i < n_shots; ++i) c.shots1[i] = {iq.mu1.I + c.sigma * g(), iq.mu1.Q + c.sigma * g()};
    return c;
}

inline double analytic_fidelity(double separation, double sigma) {
    if (separation == 0.0) return 0.5;
    if (sigma == 0.0) return 1.0;
    return normal_cdf(separation / (2.0 * sigma));
}

inline FidelityEstimate classify_and_score(const ShotCloud& c) {
    if (c.shots0.empty() || c.shots1.empty()) throw Error(Errc::empty_cloud, "shot cloud is empty");
    FidelityEstimate f;
    f.shots = c.shots0.size() + c.shots1.size();
    const IQPoint &m0 = c.means.mu0, &m1 = c.means.mu1;
    f.midpoint = {0.5 * (m0.I + m1.I), 0.5 * (m0.Q + m1.Q)};
    double sep = c.means.separation();
    if (sep == 0.0) {
        f.analytic = f.empirical = 0.5;
        f.stderr = 0.5 / std::sqrt(static_cast<double>(f.shots));
        return f;
    }
    f.axis = {(m1.I - m0.I) / sep, (m1.Q - m0.Q) / sep};
    auto proj = [&](const IQPoint& s) { return (s.I - f.midpoint.I) * f.axis.I + (s.Q - f.midpoint.Q) * f.axis.Q; };
    std::size_t ok = 0;
    for (auto& s : c.shots0) ok += proj(s) < 0;
    for (auto& s : c.shots1) ok += proj(s) > 0;
    f.empirical = static_cast<double>(ok) / static_cast<double>(f.shots);
    f.analytic = analytic_fidelity(sep, c.sigma);
    // binomial error of the classifier, from the model probability so it stays nonzero when every shot is right
    f.stderr = std::sqrt(f.analytic * (1 - f.analytic) / static_cast<double>(f.shots));
    return f;
}

// ---------------------------------------------------------------- resonator model

struct ReadoutSettings {
    double T_int = 500 * ns;
    int resonator_dim = 3;
    std::size_t n_grid = 501;
    int channel = 0;  // measured exterior qubit (0-based)
    double calibration_flux = 0.70;
    std::string calibration_preset = "baseline";
};

// Measured exterior qubit M, its interior partner P and the tunable qubit, taken
// from the spin map with every other qubit frozen in |0>. Only the single-excitation
// manifold is needed for |0>/|1> preparation.
struct DressedCluster {
    std::array<double, 3> energy{};  // single-excitation eigenvalues (rad/s, offset dropped)
    std::array<double, 3> z{};       // <d_k| Z_M |d_k>
    std::array<cplx, 3> weight{};    // <d_k|1_M>
};

inline DressedCluster dress_cluster(const DeviceParams& p, int ch) {
    PauliHamiltonian full = map_to_pauli(p);
    PauliHamiltonian h = full.restrict_to({kExtQ + ch, kIntQ + ch, kTunQ});
    DenseMatrix H(h.to_matrix(false));
    const int idx[3] = {4, 2, 1};  // |100>, |010>, |001>; M is qubit 0
    DenseMatrix block(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) block(i, j) = H(idx[i], idx[j]);
    // subtract the mean diagonal before diagonalizing to keep precision at rad/s scale
    double shift = block.diagonal().real().mean();
    block -= shift * DenseMatrix::Identity(3, 3);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(block);
    DressedCluster d;
    for (int k = 0; k < 3; ++k) {
        d.energy[k] = es.eigenvalues()(k) + shift;
        double z = 0;
        for (int q = 0; q < 3; ++q) z += std::norm(es.eigenvectors()(q, k)) * (q == 0 ? -1.0 : 1.0);
        d.z[k] = z;
        d.weight[k] = std::conj(es.eigenvectors()(0, k));
    }
    return d;
}

struct ReadoutModel {
    ComplexMatrix H;
    std::vector<ComplexMatrix> collapse;
    QuantumState psi0, psi1;
    ComplexMatrix a;
    DressedCluster cluster;
};

// Dispersive readout in the dressed basis {g, d1, d2, d3} x resonator; each spin
// state rotates in its own frame, the resonator in the drive frame.
inline ReadoutModel build_readout_model(const DeviceParams& p, const NoiseParams& noise, const ReadoutSettings& s) {
    p.validate();
    noise.validate();
    if (s.channel < 0 || s.channel > 3) throw Error(Errc::invalid_argument, "readout channel must be 0..3");
    const int N = s.resonator_dim;
    if (N < 2 || N > 6) throw Error(Errc::invalid_dimension, "readout resonator truncation must be 2..6");
    ReadoutModel m;
    m.cluster = dress_cluster(p, s.channel);
    const int D = 4 * N;
    const double delta = p.readout_freq - p.drive_freq;
    const double chi = p.chi_k[s.channel];
    std::array<double, 4> z = {1.0, m.cluster.z[0], m.cluster.z[1], m.cluster.z[2]};
    SparseMatrix a1 = destroy(N).to_sparse();
    SparseMatrix n1 = number_op(N);
    SparseMatrix H(D, D);
    for (int sidx = 0; sidx < 4; ++sidx) {
        SparseMatrix proj(4, 4);
        proj.insert(sidx, sidx) = 1.0;
        H += kron(proj, SparseMatrix((delta + chi * z[sidx]) * n1));
    }
    SparseMatrix drive = kron(sparse_identity(4), SparseMatrix(a1 + SparseMatrix(a1.adjoint())));
    H += p.drive_amp * drive;
    H.makeCompressed();
    m.H = ComplexMatrix(H);
    SparseMatrix A = kron(sparse_identity(4), a1);
    m.a = ComplexMatrix(A);
    if (noise.kappa_readout > 0) m.collapse.push_back(ComplexMatrix(SparseMatrix(std::sqrt(noise.kappa_readout) * A)));
    for (int k = 1; k <= 3; ++k) {
        SparseMatrix jump(4, 4);
        jump.insert(0, k) = std::sqrt(1.0 / noise.T1);
        m.collapse.push_back(ComplexMatrix(kron(jump, sparse_identity(N))));
    }
    DenseVector v0 = DenseVector::Zero(D), v1 = DenseVector::Zero(D);
    v0(0) = 1.0;
    for (int k = 0; k < 3; ++k) v1((k + 1) * N) = m.cluster.weight[k];
    v1 /= v1.norm();
    m.psi0 = QuantumState::ket(v0);
    m.psi1 = QuantumState::ket(v1);
    return m;
}

// Full master-equation evaluation of the readout model.
inline IQRecord simulate_iq_full(const DeviceParams& p, const NoiseParams& noise, const ReadoutSettings& s) {
    ReadoutModel m = build_readout_model(p, noise, s);
    auto grid = linspace(0.0, s.T_int, s.n_grid);
    std::vector<Observable> obs = {{"a", m.a}};
    IQRecord r;
    r.T_int = s.T_int;
    r.mu0 = integrate_iq(evolve_master(m.H, m.collapse, m.psi0, grid, obs), s.T_int);
    r.mu1 = integrate_iq(evolve_master(m.H, m.collapse, m.psi1, grid, obs), s.T_int);
    return r;
}

// Same dynamics restricted to the spin-diagonal blocks rho_ss (N x N each): the jumps
// |g><d_k| only move diagonal blocks, and <a> only reads them, so this is exact.
inline IQRecord simulate_iq(const DeviceParams& p, const NoiseParams& noise, const ReadoutSettings& s) {
    p.validate();
    noise.validate();
    if (s.channel < 0 || s.channel > 3) throw Error(Errc::invalid_argument, "readout channel must be 0..3");
    const int N = s.resonator_dim;
    if (N < 2 || N > 6) throw Error(Errc::invalid_dimension, "readout resonator truncation must be 2..6");
    const DressedCluster cl = dress_cluster(p, s.channel);
    const double delta = p.readout_freq - p.drive_freq, chi = p.chi_k[s.channel];
    const double gamma = 1.0 / noise.T1, kappa = noise.kappa_readout;
    const std::array<double, 4> z = {1.0, cl.z[0], cl.z[1], cl.z[2]};
    DenseMatrix a = destroy(N).to_dense(), n = a.adjoint() * a, I = DenseMatrix::Identity(N, N);
    const Eigen::Index B = N * N;
    DenseMatrix L = DenseMatrix::Zero(4 * B, 4 * B);
    DenseMatrix damp = kappa * (kron(DenseMatrix(a.conjugate()), a) - 0.5 * kron(I, n) - 0.5 * kron(DenseMatrix(n.transpose()), I));
    for (int k = 0; k < 4; ++k) {
        DenseMatrix H = (delta + chi * z[k]) * n + p.drive_amp * (a + DenseMatrix(a.adjoint()));
        DenseMatrix blk = cplx(0, -1) * (kron(I, H) - kron(DenseMatrix(H.transpose()), I)) + damp;
        if (k > 0) {
            blk -= gamma * DenseMatrix::Identity(B, B);
            L.block(0, k * B, B, B) += gamma * DenseMatrix::Identity(B, B);
        }
        L.block(k * B, k * B, B, B) += blk;
    }
    auto grid = linspace(0.0, s.T_int, s.n_grid);
    const double dt = grid[1] - grid[0];
    DenseMatrix P = (L * dt).exp();
    DenseVector w = DenseVector::Zero(4 * B);  // <a> = sum_s vec(a^T) . vec(rho_ss)
    DenseMatrix aT = a.transpose();
    for (int k = 0; k < 4; ++k) w.segment(k * B, B) = Eigen::Map<DenseVector>(aT.data(), B);
    IQRecord r;
    r.T_int = s.T_int;
    EvolutionRecord rec;
    rec.times = grid;
    rec.labels = {"a"};
    for (int state = 0; state < 2; ++state) {
        DenseVector v = DenseVector::Zero(4 * B);
        if (state == 0)
            v(0) = 1.0;
        else
            for (int k = 0; k < 3; ++k) v((k + 1) * B) = std::norm(cl.weight[k]);
        rec.series = {std::vector<cplx>(grid.size())};
        for (std::size_t k = 0; k < grid.size(); ++k) {
            if (k) v = P * v;
            rec.series[0][k] = (w.transpose() * v)(0);
        }
        (state ? r.mu1 : r.mu0) = integrate_iq(rec, s.T_int);
    }
    return r;
}

// |mu1 - mu0| of the calibration preset at the calibration flux: fixes sigma for every run.
inline double reference_separation(const NoiseParams& noise, const ReadoutSettings& s) {
    DeviceParams ref = preset(s.calibration_preset);
    ref.flux = s.calibration_flux;
    return simulate_iq(ref, noise, s).separation();
}

// Per-trajectory integrated I/Q plus classical noise of the same sigma.
inline ShotCloud sample_shots_trajectories(const DeviceParams& p, const NoiseParams& noise, const ReadoutSettings& s,
                                           double kappa_snr, std::size_t n_shots, std::uint64_t seed, double ref_sep) {
    if (!(kappa_snr > 0)) throw Error(Errc::invalid_argument, "kappa_snr must be positive");
    ReadoutModel m = build_readout_model(p, noise, s);
    auto grid = linspace(0.0, s.T_int, s.n_grid);
    std::vector<Observable> obs = {{"a", m.a}};
    ShotCloud c;
    c.kappa_snr = kappa_snr;
    c.sigma = kappa_snr * ref_sep;
    c.seed = seed;
    c.means.T_int = s.T_int;
    Rng rng(derive_seed(seed, 99));
    Gaussian g(rng);
    for (int state = 0; state < 2; ++state) {
        auto tr = evolve_trajectories(m.H, m.collapse, state ? m.psi1 : m.psi0, grid, obs, n_shots, derive_seed(seed, state));
        auto& shots = state ? c.shots1 : c.shots0;
        IQPoint mean;
        for (std::size_t k = 0; k < n_shots; ++k) {
            EvolutionRecord one;
            one.times = grid;
            one.labels = {"a"};
            one.series = {tr.per_trajectory[k][0]};
            IQPoint p1 = integrate_iq(one, s.T_int);
            mean.I += p1.I / n_shots;
            mean.Q += p1.Q / n_shots;
            shots.push_back({p1.I + c.sigma * g(), p1.Q + c.sigma * g()});
        }
        (state ? c.means.mu1 : c.means.mu0) = mean;
    }
    return c;
}

struct FidelityPoint {
    double kappa = 0;
    double analytic = 0;
    double empirical = 0;
    double stderr = 0;
};

inline void write_fidelity_csv(std::ostream& os, const std::vector<FidelityPoint>& curve) {
    os << "kappa,analytic,empirical,stderr\n";
    for (auto& p : curve)
        os << fmt_double(p.kappa) << "," << fmt_double(p.analytic) << "," << fmt_double(p.empirical) << "," << fmt_double(p.stderr) << "\n";
}

inline std::vector<FidelityPoint> fidelity_vs_snr(const IQRecord& iq, double ref_sep, const std::vector<double>& kappa_grid,
                                                  std::size_t n_shots, std::uint64_t seed) {
    for (std::size_t i = 1; i < kappa_grid.size(); ++i)
        if (!(kappa_grid[i] > kappa_grid[i - 1])) throw Error(Errc::invalid_argument, "kappa grid must be increasing");
    std::vector<FidelityPoint> out(kappa_grid.size());
    parallel_for(kappa_grid.size(), [&](std::size_t i) {
        ShotCloud c = sample_shots(iq, kappa_grid[i], n_shots, derive_seed(seed, i), ref_sep);
        FidelityEstimate f = classify_and_score(c);
        out[i] = {kappa_grid[i], f.analytic, f.empirical, f.stderr};
    });
    return out;
}

inline std::vector<FidelityPoint> fidelity_vs_snr(const DeviceParams& p, const NoiseParams& noise, const ReadoutSettings& s,
                                                  const std::vector<double>& kappa_grid, std::size_t n_shots, std::uint64_t seed) {
    return fidelity_vs_snr(simulate_iq(p, noise, s), reference_separation(noise, s), kappa_grid, n_shots, seed);
}

// Analytic separation fidelity of a parameter point at fixed kappa_snr (dataset fast path).
inline double readout_fidelity(const DeviceParams& p, const NoiseParams& noise, const ReadoutSettings& s, double kappa_snr,
                               double ref_sep) {
    return analytic_fidelity(simulate_iq(p, noise, s).separation(), kappa_snr * ref_sep);
}

}  // namespace qchip

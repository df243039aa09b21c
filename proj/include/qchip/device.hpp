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
#include <functional>
#include <string>
#include <vector>

#include "qchip/linalg.hpp"
#include "qchip/util.hpp"

namespace qchip {

using Quad = std::array<double, 4>;

inline constexpr double GHz = kTwoPi * 1e9;
inline constexpr double MHz = kTwoPi * 1e6;
inline constexpr double kHz = kTwoPi * 1e3;
inline constexpr double Mrad = 1e6;  // Mrad/s
inline constexpr double us = 1e-6;
inline constexpr double ns = 1e-9;

// Flux point where the tunable qubit crosses interior qubit 1.
inline constexpr double kCrossingFlux = 0.82;

struct DeviceParams {
    Quad interior_freqs{};
    Quad interior_anharm{};
    Quad exterior_freqs{};
    Quad exterior_anharm{};
    Quad coupler_res_freqs{};
    double readout_freq = 0;
    double tunable_max_freq = 0;
    double tunable_anharm = 0;
    double squid_asymmetry = 0.1;
    double flux = 0;
    Quad g_lambda_b{};  // interior - own coupling resonator
    Quad g_jr{};        // exterior - readout resonator
    Quad J_lambda_t{};  // interior - tunable
    Quad J_lambda_j{};  // interior - exterior, same index
    double drive_amp = 0;
    double drive_freq = 0;
    Quad chi_i{};  // exterior
    Quad chi_j{};  // interior
    Quad chi_k{};  // readout
    Quad g_i_bare{};
    Quad g_j_bare{};
    double g_c_bare = 0;

    void validate() const;
};

struct NoiseParams {
    double T1 = 80 * us;
    double T2 = 70 * us;
    double kappa_res = 0.1 / us;
    double kappa_readout = 3.35 * MHz;

    void validate() const {
        if (!(T1 > 0 && T2 > 0 && kappa_res >= 0 && kappa_readout >= 0))
            throw Error(Errc::invalid_argument, "noise parameters must be positive");
        if (T2 > 2 * T1 * (1 + 1e-12)) throw Error(Errc::unphysical_dephasing, "T2 exceeds 2*T1");
    }
    // 1/T_phi = 1/T2 - 1/(2 T1)
    double dephasing_rate() const {
        validate();
        double r = 1.0 / T2 - 1.0 / (2.0 * T1);
        return r < 0 ? 0.0 : r;
    }
};

// Canonical mode labels in layout order.
inline const std::vector<std::string>& canonical_modes() {
    static const std::vector<std::string> m = {"int1", "int2", "int3", "int4", "ext1", "ext2", "ext3",
                                               "ext4", "tun",  "res1", "res2", "res3", "res4", "ro"};
    return m;
}

inline bool is_transmon_label(const std::string& l) {
    return l.rfind("int", 0) == 0 || l.rfind("ext", 0) == 0 || l == "tun";
}

inline int label_index(const std::string& l) {
    if (l.size() == 4 && l[3] >= '1' && l[3] <= '4') return l[3] - '1';
    return -1;
}

inline double squid_factor(double phi, double d) {
    double c = std::cos(kPi * phi), s = std::sin(kPi * phi);
    return std::pow(c * c + d * d * s * s, 0.25);
}

inline double tunable_freq(const DeviceParams& p, double phi) {
    return p.tunable_max_freq * squid_factor(phi, p.squid_asymmetry);
}

// omega_max that puts the tunable qubit on `target` at the crossing flux.
inline double calibrate_tunable_max(double target, double d, double phi = kCrossingFlux) {
    return target / squid_factor(phi, d);
}

inline double effective_J(double g1, double g2, double d1, double d2) {
    if (d1 == 0.0 || d2 == 0.0) throw Error(Errc::resonant_regime, "effective_J: zero detuning");
    return 0.5 * g1 * g2 * (1.0 / d1 + 1.0 / d2);
}

inline double mode_frequency(const DeviceParams& p, const std::string& l) {
    int k = label_index(l);
    if (l == "tun") return tunable_freq(p, p.flux);
    if (l == "ro") return p.readout_freq;
    if (k >= 0) {
        if (l.rfind("int", 0) == 0) return p.interior_freqs[k];
        if (l.rfind("ext", 0) == 0) return p.exterior_freqs[k];
        if (l.rfind("res", 0) == 0) return p.coupler_res_freqs[k];
    }
    throw Error(Errc::unknown_label, "unknown mode label " + l);
}

inline double mode_anharm(const DeviceParams& p, const std::string& l) {
    int k = label_index(l);
    if (l == "tun") return p.tunable_anharm;
    if (k >= 0 && l.rfind("int", 0) == 0) return p.interior_anharm[k];
    if (k >= 0 && l.rfind("ext", 0) == 0) return p.exterior_anharm[k];
    return 0.0;
}

struct Coupling {
    std::string a, b, name;
    double g = 0;
};

// Exchange couplings of the bosonic model, one entry per edge.
inline std::vector<Coupling> device_couplings(const DeviceParams& p) {
    std::vector<Coupling> c;
    for (int k = 0; k < 4; ++k) {
        std::string s = std::to_string(k + 1);
        c.push_back({"int" + s, "res" + s, "g_lambda_b[" + std::to_string(k) + "]", p.g_lambda_b[k]});
        c.push_back({"ext" + s, "ro", "g_jr[" + std::to_string(k) + "]", p.g_jr[k]});
        c.push_back({"int" + s, "tun", "J_lambda_t[" + std::to_string(k) + "]", p.J_lambda_t[k]});
        c.push_back({"int" + s, "ext" + s, "J_lambda_j[" + std::to_string(k) + "]", p.J_lambda_j[k]});
    }
    return c;
}

inline void DeviceParams::validate() const {
    auto pos = [](double v, const char* what) {
        if (!(v > 0) || !std::isfinite(v)) throw Error(Errc::invalid_argument, std::string(what) + " must be positive");
    };
    for (int k = 0; k < 4; ++k) {
        pos(interior_freqs[k], "interior_freqs");
        pos(exterior_freqs[k], "exterior_freqs");
        pos(coupler_res_freqs[k], "coupler_res_freqs");
        pos(interior_anharm[k], "interior_anharm");
        pos(exterior_anharm[k], "exterior_anharm");
    }
    pos(readout_freq, "readout_freq");
    pos(tunable_max_freq, "tunable_max_freq");
    pos(tunable_anharm, "tunable_anharm");
    if (!(std::abs(flux) <= 2.0)) throw Error(Errc::invalid_argument, "|flux| must be <= 2");
    if (!(tunable_freq(*this, flux) > 0)) throw Error(Errc::invalid_argument, "tunable frequency vanishes at this flux");
    auto fin = [](const Quad& q, const char* what) {
        for (double v : q)
            if (!std::isfinite(v)) throw Error(Errc::invalid_argument, std::string(what) + " not finite");
    };
    fin(g_lambda_b, "g_lambda_b");
    fin(g_jr, "g_jr");
    fin(J_lambda_t, "J_lambda_t");
    fin(J_lambda_j, "J_lambda_j");
    fin(chi_i, "chi_i");
    fin(chi_j, "chi_j");
    fin(chi_k, "chi_k");
    fin(g_i_bare, "g_i_bare");
    fin(g_j_bare, "g_j_bare");
    if (!std::isfinite(g_c_bare) || !std::isfinite(drive_amp) || !std::isfinite(drive_freq))
        throw Error(Errc::invalid_argument, "non-finite scalar parameter");
    for (int k = 0; k < 4; ++k)
        if (!(std::abs(exterior_freqs[k] - readout_freq) > 5.0 * std::abs(g_jr[k])))
            throw Error(Errc::invalid_argument, "exterior qubit " + std::to_string(k + 1) + " violates the dispersive condition");
}

inline DeviceParams preset(const std::string& name) {
    DeviceParams p;
    const Quad anh = {200 * MHz, 200 * MHz, 200 * MHz, 200 * MHz};
    const Quad base_g = {62.83 * Mrad, 62.83 * Mrad, 62.83 * Mrad, 62.83 * Mrad};
    p.interior_anharm = anh;
    p.exterior_anharm = anh;
    p.tunable_anharm = 200 * MHz;
    p.squid_asymmetry = 0.1;
    p.readout_freq = 7.0 * GHz;
    p.drive_freq = p.readout_freq;
    p.drive_amp = 1 * MHz;
    p.g_lambda_b = base_g;
    p.g_jr = base_g;
    p.J_lambda_t = base_g;
    p.J_lambda_j = base_g;
    if (name == "baseline") {
        p.interior_freqs = {5.52 * GHz, 5.53 * GHz, 5.57 * GHz, 5.58 * GHz};
        p.exterior_freqs = {5.2 * GHz, 5.4 * GHz, 5.6 * GHz, 5.8 * GHz};
        p.coupler_res_freqs = {5.10 * GHz, 5.30 * GHz, 5.75 * GHz, 5.90 * GHz};
        p.chi_i = base_g;
        p.chi_j = base_g;
        p.chi_k = {125.66 * Mrad, 125.66 * Mrad, 125.66 * Mrad, 125.66 * Mrad};
        p.g_i_bare = base_g;
        p.g_j_bare = base_g;
        p.g_c_bare = 62.83 * Mrad;
        p.flux = 0.6;
    } else if (name == "optimized") {
        p.interior_freqs = {5.56 * GHz, 5.55 * GHz, 5.53 * GHz, 5.55 * GHz};
        p.exterior_freqs = {5.24 * GHz, 5.42 * GHz, 5.43 * GHz, 5.64 * GHz};
        p.coupler_res_freqs = {5.38 * GHz, 5.87 * GHz, 5.81 * GHz, 5.22 * GHz};
        p.chi_i = {700 * Mrad, 421 * Mrad, -346 * Mrad, 118 * Mrad};
        p.chi_j = {-38.5 * Mrad, 79 * Mrad, 20.7 * Mrad, 364 * Mrad};
        p.chi_k = {435 * Mrad, -290 * Mrad, 141 * Mrad, 225 * Mrad};
        p.g_i_bare = {528 * Mrad, -19.61 * Mrad, 517 * Mrad, 422 * Mrad};
        p.g_j_bare = {662 * Mrad, 340 * Mrad, -4.07 * Mrad, 4.88 * Mrad};
        p.g_c_bare = 92.58 * Mrad;
        p.flux = 0.86;
    } else {
        throw Error(Errc::unknown_preset, "unknown preset '" + name + "' (expected baseline or optimized)");
    }
    p.tunable_max_freq = calibrate_tunable_max(p.interior_freqs[0], p.squid_asymmetry);
    return p;
}

struct SubsystemSelector {
    std::vector<std::string> modes;
    int resonator_dim = 2;
    int transmon_dim = 2;
    // Explicit coupling names (see device_couplings). Empty: every coupling whose
    // endpoints are both included.
    std::vector<std::string> couplings;

    SpaceLayout layout() const {
        if (resonator_dim < 2 || resonator_dim > 4) throw Error(Errc::invalid_dimension, "resonator truncation must be 2..4");
        if (transmon_dim < 2 || transmon_dim > 4) throw Error(Errc::invalid_dimension, "transmon truncation must be 2..4");
        for (auto& m : modes) {
            bool ok = false;
            for (auto& c : canonical_modes()) ok = ok || (c == m);
            if (!ok) throw Error(Errc::unknown_label, "unknown mode label " + m);
        }
        std::vector<Mode> out;
        for (auto& c : canonical_modes()) {
            bool inc = false;
            for (auto& m : modes) inc = inc || (m == c);
            if (!inc) continue;
            if (is_transmon_label(c))
                out.push_back({c, transmon_dim, transmon_dim == 2});
            else
                out.push_back({c, resonator_dim, false});
        }
        SpaceLayout layout(out);
        if (layout.total_dim() > 4096) throw Error(Errc::invalid_dimension, "selected subsystem exceeds 4096 states");
        return layout;
    }
};

enum class Frame { lab, rotating };

inline SparseMatrix number_op(int dim) {
    SparseMatrix n(dim, dim);
    for (int k = 0; k < dim; ++k) n.insert(k, k) = static_cast<double>(k);
    n.makeCompressed();
    return n;
}

inline SparseMatrix build_hamiltonian_sparse(const DeviceParams& p, const SubsystemSelector& sel, Frame frame = Frame::rotating) {
    SpaceLayout L = sel.layout();
    const Eigen::Index D = L.total_dim();
    SparseMatrix H(D, D);
    const double shift = frame == Frame::rotating ? p.drive_freq : 0.0;
    for (const Mode& m : L.modes()) {
        SparseMatrix n = number_op(m.dim);
        double w = mode_frequency(p, m.label) - shift;
        SparseMatrix term = w * n;
        double alpha = mode_anharm(p, m.label);
        if (alpha != 0.0 && m.dim > 2) {
            // -(alpha/2) b+b+bb = -(alpha/2) n(n-1)
            SparseMatrix kerr(m.dim, m.dim);
            for (int k = 0; k < m.dim; ++k) kerr.insert(k, k) = -0.5 * alpha * k * (k - 1);
            term += kerr;
        }
        H += embed_sparse(term, m.label, L);
    }
    auto couplings = device_couplings(p);
    auto wanted = [&](const Coupling& c) {
        if (sel.couplings.empty()) return L.contains(c.a) && L.contains(c.b);
        for (auto& n : sel.couplings)
            if (n == c.name) return true;
        return false;
    };
    for (const Coupling& c : couplings) {
        if (!wanted(c)) continue;
        if (!L.contains(c.a) || !L.contains(c.b))
            throw Error(Errc::dangling_coupling, "coupling " + c.name + " references an excluded mode");
        if (c.g == 0.0) continue;
        SparseMatrix xa = embed_sparse(destroy(L.dim_of(c.a)).to_sparse(), c.a, L);
        SparseMatrix xb = embed_sparse(destroy(L.dim_of(c.b)).to_sparse(), c.b, L);
        SparseMatrix xy = SparseMatrix(xa.adjoint()) * xb;
        H += c.g * (xy + SparseMatrix(xy.adjoint()));
    }
    if (frame == Frame::rotating && L.contains("ro") && p.drive_amp != 0.0) {
        SparseMatrix a = embed_sparse(destroy(L.dim_of("ro")).to_sparse(), "ro", L);
        H += p.drive_amp * (a + SparseMatrix(a.adjoint()));
    }
    H.prune(cplx(0.0));
    H.makeCompressed();
    return H;
}

inline ComplexMatrix build_hamiltonian(const DeviceParams& p, const SubsystemSelector& sel, Frame frame = Frame::rotating) {
    return ComplexMatrix::automatic(build_hamiltonian_sparse(p, sel, frame));
}

// Relaxation sqrt(1/T1) b, pure dephasing sqrt(2/T_phi) n (equal to
// sqrt(1/(2 T_phi)) sigma_z on a qubit, so coherences decay at 1/T2), resonator loss sqrt(kappa) a.
inline std::vector<ComplexMatrix> build_collapse_ops(const NoiseParams& noise, const SubsystemSelector& sel) {
    noise.validate();
    SpaceLayout L = sel.layout();
    std::vector<ComplexMatrix> out;
    const double gphi = noise.dephasing_rate();
    for (const Mode& m : L.modes()) {
        SparseMatrix a = destroy(m.dim).to_sparse();
        if (is_transmon_label(m.label)) {
            out.push_back(ComplexMatrix::automatic(embed_sparse(std::sqrt(1.0 / noise.T1) * a, m.label, L)));
            if (gphi > 0)
                out.push_back(ComplexMatrix::automatic(embed_sparse(std::sqrt(2.0 * gphi) * number_op(m.dim), m.label, L)));
        } else {
            double k = m.label == "ro" ? noise.kappa_readout : noise.kappa_res;
            if (k > 0) out.push_back(ComplexMatrix::automatic(embed_sparse(std::sqrt(k) * a, m.label, L)));
        }
    }
    return out;
}

// Named access to every scalar slot of DeviceParams (used by config overrides
// and the surrogate parameter box).
struct ParamField {
    std::string name;
    double* scalar = nullptr;
    Quad* quad = nullptr;
};

inline std::vector<ParamField> param_fields(DeviceParams& p) {
    return {
        {"interior_freqs", nullptr, &p.interior_freqs},
        {"interior_anharm", nullptr, &p.interior_anharm},
        {"exterior_freqs", nullptr, &p.exterior_freqs},
        {"exterior_anharm", nullptr, &p.exterior_anharm},
        {"coupler_res_freqs", nullptr, &p.coupler_res_freqs},
        {"readout_freq", &p.readout_freq, nullptr},
        {"tunable_max_freq", &p.tunable_max_freq, nullptr},
        {"tunable_anharm", &p.tunable_anharm, nullptr},
        {"squid_asymmetry", &p.squid_asymmetry, nullptr},
        {"flux", &p.flux, nullptr},
        {"g_lambda_b", nullptr, &p.g_lambda_b},
        {"g_jr", nullptr, &p.g_jr},
        {"J_lambda_t", nullptr, &p.J_lambda_t},
        {"J_lambda_j", nullptr, &p.J_lambda_j},
        {"drive_amp", &p.drive_amp, nullptr},
        {"drive_freq", &p.drive_freq, nullptr},
        {"chi_i", nullptr, &p.chi_i},
        {"chi_j", nullptr, &p.chi_j},
        {"chi_k", nullptr, &p.chi_k},
        {"g_i_bare", nullptr, &p.g_i_bare},
        {"g_j_bare", nullptr, &p.g_j_bare},
        {"g_c_bare", &p.g_c_bare, nullptr},
    };
}

}  // namespace qchip

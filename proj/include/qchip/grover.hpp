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
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qchip/dynamics.hpp"
#include "qchip/pauli.hpp"
#include "qchip/util.hpp"

namespace qchip {

struct PairParams {
    double w1 = 5.0 * GHz, w2 = 5.0 * GHz;  // dressed
    double J12 = 0;
    double zeta = 0;
};

inline PairParams pair_params(const EffectivePair& e) { return {e.w1, e.w2, e.J12, e.zeta}; }

enum class Sampling { systematic, iid };

struct GroverConfig {
    std::string target = "11";
    PairParams pair;
    NoiseParams noise;
    double noise_scale = 1.0;  // global multiplier on every decoherence rate
    std::size_t n_shots = 2048;
    double readout_error = 0.0;
    std::uint64_t seed = 1;
    Sampling sampling = Sampling::systematic;
    double gate_1q = 25 * ns;

    void validate() const {
        if (target.size() != 2 || (target[0] != '0' && target[0] != '1') || (target[1] != '0' && target[1] != '1'))
            throw Error(Errc::invalid_argument, "target must be a 2-bit string");
        if (n_shots < 1) throw Error(Errc::invalid_argument, "n_shots must be >= 1");
        if (!(readout_error >= 0 && readout_error < 0.5)) throw Error(Errc::invalid_argument, "readout_error must be in [0, 0.5)");
        if (!(pair.zeta != 0.0) || !std::isfinite(pair.zeta)) throw Error(Errc::invalid_argument, "zeta must be nonzero for a ZZ phase gate");
        if (!(noise_scale >= 0)) throw Error(Errc::invalid_argument, "noise_scale must be >= 0");
        noise.validate();
    }
};

struct GroverResult {
    std::map<std::string, std::size_t> counts;
    double accuracy = 0;
    double expected_accuracy = 0;            // target probability after readout error
    std::array<double, 4> populations{};     // final diagonal, before readout error
    DenseMatrix rho;
    GateCircuit schedule;
    double t_cz = 0;
    bool impractical_gate = false;           // t_CZ > 100 us

    void write_counts_csv(std::ostream& os) const {
        os << "outcome,count\n";
        for (auto& [k, v] : counts) os << k << "," << v << "\n";
    }
};

inline constexpr double kImpracticalGate = 100 * us;

// H H | oracle | H H X X CZ X X H H | measure ; one iteration is exact for 4 items.
inline GateCircuit build_grover_circuit(const std::string& target) {
    if (target != "00" && target != "01" && target != "10" && target != "11") throw Error(Errc::invalid_argument, "target must be 00, 01, 10 or 11");
    GateCircuit c;
    c.n_qubits = 2;
    c.add(GateKind::H, {0});
    c.add(GateKind::H, {1});
    for (int q = 0; q < 2; ++q)
        if (target[q] == '0') c.add(GateKind::X, {q});
    c.add(GateKind::CZ, {0, 1});
    for (int q = 0; q < 2; ++q)
        if (target[q] == '0') c.add(GateKind::X, {q});
    for (GateKind k : {GateKind::H, GateKind::X}) {
        c.add(k, {0});
        c.add(k, {1});
    }
    c.add(GateKind::CZ, {0, 1});
    for (GateKind k : {GateKind::X, GateKind::H}) {
        c.add(k, {0});
        c.add(k, {1});
    }
    c.add(GateKind::Measure, {0, 1});
    return c;
}

namespace detail {

inline DenseMatrix on_qubit(const DenseMatrix& k, int q) {
    return q == 0 ? kron(k, pauli::I()) : kron(pauli::I(), k);
}

inline void apply_kraus(DenseMatrix& rho, const std::vector<DenseMatrix>& ks) {
    DenseMatrix out = DenseMatrix::Zero(rho.rows(), rho.cols());
    for (auto& k : ks) out += k * rho * k.adjoint();
    rho = out;
}

// amplitude damping then pure dephasing for time t on one qubit
inline void idle_channel(DenseMatrix& rho, int q, double gamma1, double gphi, double t) {
    if (gamma1 > 0) {
        double p = -std::expm1(-gamma1 * t);
        DenseMatrix k0 = DenseMatrix::Zero(2, 2), k1 = DenseMatrix::Zero(2, 2);
        k0(0, 0) = 1;
        k0(1, 1) = std::sqrt(1 - p);
        k1(0, 1) = std::sqrt(p);
        apply_kraus(rho, {on_qubit(k0, q), on_qubit(k1, q)});
    }
    if (gphi > 0) {
        double lam = std::exp(-gphi * t);
        apply_kraus(rho, {on_qubit(std::sqrt((1 + lam) / 2) * pauli::I(), q), on_qubit(std::sqrt((1 - lam) / 2) * pauli::Z(), q)});
    }
}

struct CZRealization {
    DenseMatrix propagator;  // superoperator, column stacking
    DenseMatrix correction;  // diagonal virtual-Z frame fix
    double alpha = 0, beta = 0;
    double t = 0;
};

// Free evolution under the effective pair Hamiltonian in the mean-frequency frame.
inline DenseMatrix pair_hamiltonian(const PairParams& p) {
    const double wbar = 0.5 * (p.w1 + p.w2);
    DenseMatrix Z1 = kron(pauli::Z(), pauli::I()), Z2 = kron(pauli::I(), pauli::Z());
    return -0.5 * (p.w1 - wbar) * Z1 - 0.5 * (p.w2 - wbar) * Z2 +
           0.5 * p.J12 * (kron(pauli::X(), pauli::X()) + kron(pauli::Y(), pauli::Y())) + p.zeta * kron(pauli::Z(), pauli::Z());
}

inline CZRealization realize_cz(const GroverConfig& cfg) {
    CZRealization r;
    r.t = kPi / (4 * std::abs(cfg.pair.zeta));
    DenseMatrix H = pair_hamiltonian(cfg.pair);
    DenseMatrix U0 = expm_unitary(ComplexMatrix(H), r.t).to_dense();
    auto ph = [&](int k) { return std::arg(U0(k, k)); };
    r.beta = ph(0) - ph(1);
    r.alpha = ph(0) - ph(2);
    r.correction = DenseMatrix::Zero(4, 4);
    r.correction(0, 0) = 1;
    r.correction(1, 1) = std::exp(cplx(0, r.beta));
    r.correction(2, 2) = std::exp(cplx(0, r.alpha));
    r.correction(3, 3) = std::exp(cplx(0, r.alpha + r.beta));
    const double m = cfg.noise_scale;
    std::vector<ComplexMatrix> c;
    if (m > 0) {
        const double g1 = m * (1.0 / cfg.noise.T1 + cfg.noise.kappa_res);
        const double gphi = m * cfg.noise.dephasing_rate();
        for (int q = 0; q < 2; ++q) {
            c.emplace_back(DenseMatrix(std::sqrt(g1) * on_qubit(pauli::minus(), q)));
            if (gphi > 0) c.emplace_back(DenseMatrix(std::sqrt(2 * gphi) * on_qubit(DenseMatrix(0.5 * (pauli::I() - pauli::Z())), q)));
        }
    }
    DenseMatrix Lv = Lindblad(ComplexMatrix(H), c).liouvillian();
    r.propagator = (Lv * r.t).exp();
    return r;
}

inline std::array<double, 4> flip_readout(const std::array<double, 4>& p, double e) {
    std::array<double, 4> out{};
    for (int s = 0; s < 4; ++s)
        for (int m = 0; m < 4; ++m) {
            int diff = s ^ m;
            double w = 1;
            for (int b = 0; b < 2; ++b) w *= ((diff >> b) & 1) ? e : 1 - e;
            out[m] += w * p[s];
        }
    return out;
}

inline std::array<std::size_t, 4> sample_counts(const std::array<double, 4>& p, std::size_t n, std::uint64_t seed, Sampling mode) {
    Rng rng(seed);
    std::array<std::size_t, 4> c{};
    std::array<double, 4> cdf{};
    double acc = 0;
    int last = 0;
    for (int k = 0; k < 4; ++k) {
        double pk = p[k] < 1e-14 ? 0.0 : p[k];  // round-off populations never get a shot
        if (pk > 0) last = k;
        cdf[k] = (acc += pk);
    }
    for (auto& x : cdf) x /= acc;
    for (int k = last; k < 4; ++k) cdf[k] = 1.0;
    auto bucket = [&](double u) {
        int k = 0;
        while (k < 3 && u >= cdf[k]) ++k;
        return k;
    };
    if (mode == Sampling::systematic) {
        double u0 = uniform01(rng);
        for (std::size_t i = 0; i < n; ++i) ++c[bucket((u0 + static_cast<double>(i)) / static_cast<double>(n))];
    } else {
        for (std::size_t i = 0; i < n; ++i) ++c[bucket(uniform01(rng))];
    }
    return c;
}

}  // namespace detail

inline const char* basis_label(int k) {
    static const char* names[4] = {"00", "01", "10", "11"};
    return names[k];
}

inline GroverResult run_noisy(const GroverConfig& cfg) {
    cfg.validate();
    GroverResult res;
    GateCircuit logical = build_grover_circuit(cfg.target);
    detail::CZRealization cz = detail::realize_cz(cfg);
    res.t_cz = cz.t;
    res.impractical_gate = cz.t > kImpracticalGate;
    const double m = cfg.noise_scale;
    const double g1 = m / cfg.noise.T1, gphi = m * cfg.noise.dephasing_rate();
    res.schedule.n_qubits = 2;
    DenseMatrix rho = DenseMatrix::Zero(4, 4);
    rho(0, 0) = 1;
    for (const Gate& g : logical.gates) {
        switch (g.kind) {
            case GateKind::H:
            case GateKind::X: {
                DenseMatrix u = detail::on_qubit(gate_matrix(g), g.qubits[0]);
                rho = u * rho * u.adjoint();
                detail::idle_channel(rho, g.qubits[0], g1, gphi, cfg.gate_1q);
                res.schedule.add(g.kind, g.qubits, 0.0, cfg.gate_1q);
                break;
            }
            case GateKind::CZ: {
                Eigen::Map<Eigen::VectorXcd> v(rho.data(), rho.size());
                DenseVector out = cz.propagator * v;
                rho = Eigen::Map<DenseMatrix>(out.data(), 4, 4);
                rho = cz.correction * rho * cz.correction.adjoint();
                res.schedule.add(GateKind::CZ, {0, 1}, 0.0, cz.t);
                res.schedule.add(GateKind::Rz, {0}, cz.alpha, 0.0);
                res.schedule.add(GateKind::Rz, {1}, cz.beta, 0.0);
                break;
            }
            case GateKind::Measure: res.schedule.add(GateKind::Measure, {0, 1}); break;
            default: throw Error(Errc::unsupported_term, "unexpected gate in Grover circuit");
        }
    }
    rho = 0.5 * (rho + DenseMatrix(rho.adjoint()));
    const double tr = rho.trace().real();
    if (std::abs(tr - 1) > 1e-9) throw Error(Errc::contract_violation, "Grover state lost trace");
    for (int k = 0; k < 4; ++k) {
        double d = rho(k, k).real();
        if (d < -1e-9) throw Error(Errc::contract_violation, "negative population in Grover state");
        res.populations[k] = std::max(d, 0.0);
    }
    res.rho = rho;
    auto pm = detail::flip_readout(res.populations, cfg.readout_error);
    const int t = std::stoi(cfg.target, nullptr, 2);
    res.expected_accuracy = pm[t];
    auto c = detail::sample_counts(pm, cfg.n_shots, cfg.seed, cfg.sampling);
    for (int k = 0; k < 4; ++k) res.counts[basis_label(k)] = c[k];
    res.accuracy = static_cast<double>(c[t]) / static_cast<double>(cfg.n_shots);
    return res;
}

// ---------------------------------------------------------------- calibration

// Readout error at noise multiplier m: discrimination floor at the separation fidelity
// plus relaxation during the integration window.
struct ReadoutErrorModel {
    double kappa_snr = 0.2;
    double t_int = 500 * ns;

    double operator()(const NoiseParams& n, double m) const {
        return (1 - normal_cdf(1 / (2 * kappa_snr))) - std::expm1(-m * (1 / n.T1 + n.kappa_res) * t_int);
    }
};

struct GroverCalibration {
    double noise_scale = 1;
    double readout_error = 0;
    double anchor_expected = 0;
};

struct ReferencePair {
    std::string pair;
    double zeta;      // rad/s
    double accuracy;  // reference fraction
};

inline const std::vector<ReferencePair>& reference_pairs() {
    static const std::vector<ReferencePair> rows = {
        {"int1-bus-int2", 0.2556 * MHz, 0.7119},
        {"int1-res-tun", 0.7097 * MHz, 0.7808},
        {"ext1-res-int1", 0.2639 * MHz, 0.7148},
        {"ext1-bus-ext2", 0.5322 * MHz, 0.7676},
    };
    return rows;
}

inline constexpr double kAnchorAccuracy = 0.7808;

// Reference-row configuration: literal zeta ZZ evolution (no transverse coupling).
inline GroverConfig row_config(const ReferencePair& row, const NoiseParams& noise, const GroverCalibration& cal, std::size_t shots,
                               std::uint64_t seed) {
    GroverConfig c;
    c.pair.zeta = row.zeta;
    c.noise = noise;
    c.noise_scale = cal.noise_scale;
    c.readout_error = cal.readout_error;
    c.n_shots = shots;
    c.seed = seed;
    return c;
}

inline GroverCalibration calibrate_noise(const NoiseParams& noise, double target = kAnchorAccuracy, const ReadoutErrorModel& rm = {}) {
    const ReferencePair& anchor = reference_pairs()[1];
    auto expected = [&](double m) {
        GroverCalibration cal{m, rm(noise, m), 0};
        return run_noisy(row_config(anchor, noise, cal, 1, 1)).expected_accuracy;
    };
    double lo = 0, hi = 1;
    if (expected(lo) < target) throw Error(Errc::invalid_argument, "anchor accuracy unreachable even without noise");
    while (expected(hi) > target) {
        hi *= 2;
        if (hi > 1e6) throw Error(Errc::invalid_argument, "noise calibration failed to bracket the anchor");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (expected(mid) > target ? lo : hi) = mid;
    }
    GroverCalibration cal;
    cal.noise_scale = 0.5 * (lo + hi);
    cal.readout_error = rm(noise, cal.noise_scale);
    cal.anchor_expected = expected(cal.noise_scale);
    return cal;
}

struct PairAccuracy {
    ReferencePair row;
    double predicted = 0;     // sampled accuracy
    double expected = 0;      // infinite-shot accuracy
    double device_zeta = std::numeric_limits<double>::quiet_NaN();  // from the effective model, information only
    double device_J12 = std::numeric_limits<double>::quiet_NaN();
};

inline std::vector<PairAccuracy> reproduce_reference_pairs(const NoiseParams& noise, const GroverCalibration& cal, std::size_t shots,
                                                  std::uint64_t seed, const DeviceParams& device = preset("optimized")) {
    const double scale = calibrate_zeta_scale(device);
    std::vector<PairAccuracy> out;
    std::size_t i = 0;
    for (auto& row : reference_pairs()) {
        PairAccuracy r;
        r.row = row;
        auto g = run_noisy(row_config(row, noise, cal, shots, derive_seed(seed, i++)));
        r.predicted = g.accuracy;
        r.expected = g.expected_accuracy;
        try {
            auto e = effective_two_qubit(device, row.pair, scale);
            r.device_zeta = e.zeta;
            r.device_J12 = e.J12;
        } catch (const Error&) {
        }
        out.push_back(r);
    }
    return out;
}

struct ShotSweepPoint {
    std::size_t shots;
    double accuracy;
};

inline std::vector<ShotSweepPoint> shot_sweep(const NoiseParams& noise, const GroverCalibration& cal, const std::vector<std::size_t>& shots,
                                              std::uint64_t seed, Sampling mode = Sampling::systematic) {
    std::vector<ShotSweepPoint> out;
    for (std::size_t i = 0; i < shots.size(); ++i) {
        auto c = row_config(reference_pairs()[1], noise, cal, shots[i], derive_seed(seed, i));
        c.sampling = mode;
        out.push_back({shots[i], run_noisy(c).accuracy});
    }
    return out;
}

// ---------------------------------------------------------------- sweeps

struct AccuracySurface {
    std::string x_name, y_name;
    std::vector<double> x, y;
    Eigen::MatrixXd accuracy;  // (x, y); NaN marks an invalid cell
    Eigen::MatrixXd expected;

    void write_csv(std::ostream& os) const {
        os << x_name << "," << y_name << ",accuracy,expected\n";
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = 0; j < y.size(); ++j)
                os << fmt_double(x[i]) << "," << fmt_double(y[j]) << "," << fmt_double(accuracy(i, j)) << "," << fmt_double(expected(i, j)) << "\n";
    }
};

// Cells evaluated in parallel with per-cell derived seeds; cell(i, j) returns the pair or nothing if invalid.
template <class CellFn>
AccuracySurface sweep_accuracy(const GroverConfig& base, std::string xn, std::vector<double> xs, std::string yn, std::vector<double> ys,
                               CellFn cell) {
    if (xs.empty() || ys.empty()) throw Error(Errc::invalid_argument, "sweep grids must be nonempty");
    AccuracySurface s{std::move(xn), std::move(yn), std::move(xs), std::move(ys), {}, {}};
    const std::size_t nx = s.x.size(), ny = s.y.size();
    s.accuracy = Eigen::MatrixXd::Constant(nx, ny, std::numeric_limits<double>::quiet_NaN());
    s.expected = s.accuracy;
    parallel_for(nx * ny, [&](std::size_t k) {
        std::size_t i = k / ny, j = k % ny;
        std::optional<PairParams> p = cell(s.x[i], s.y[j]);
        if (!p) return;
        GroverConfig c = base;
        c.pair = *p;
        c.seed = derive_seed(base.seed, k);
        auto r = run_noisy(c);
        s.accuracy(i, j) = r.accuracy;
        s.expected(i, j) = r.expected_accuracy;
    });
    return s;
}

// (zeta, J12) plane around a fixed pair detuning.
inline AccuracySurface sweep_zeta_j12(const GroverConfig& base, const std::vector<double>& zetas, const std::vector<double>& j12s) {
    return sweep_accuracy(base, "zeta_rad_s", zetas, "J12_rad_s", j12s, [&](double z, double j) -> std::optional<PairParams> {
        PairParams p = base.pair;
        p.zeta = z;
        p.J12 = j;
        return p;
    });
}

// (zeta, flux) plane: zeta is the value at the preset flux; the device model carries
// it to other biases, zeta(phi) = zeta * zeta_raw(phi) / zeta_raw(phi_preset).
inline AccuracySurface sweep_zeta_flux(const GroverConfig& base, const DeviceParams& device, const std::string& pair,
                                       const std::vector<double>& zetas, const std::vector<double>& fluxes, bool device_j12) {
    PairSpec spec = parse_pair(pair);
    const double ref = effective_two_qubit(device, spec).zeta_raw;
    if (ref == 0.0) throw Error(Errc::invalid_argument, "pair has no ZZ coupling at the preset flux");
    std::vector<std::optional<EffectivePair>> at(fluxes.size());
    for (std::size_t j = 0; j < fluxes.size(); ++j) {
        DeviceParams d = device;
        d.flux = fluxes[j];
        try {
            at[j] = effective_two_qubit(d, spec);
        } catch (const Error& e) {
            if (e.code() != Errc::resonant_regime) throw;
        }
    }
    std::map<double, std::size_t> col;
    for (std::size_t j = 0; j < fluxes.size(); ++j) col[fluxes[j]] = j;
    return sweep_accuracy(base, "zeta_rad_s", zetas, "flux", fluxes, [&](double z, double phi) -> std::optional<PairParams> {
        const auto& e = at[col.at(phi)];
        if (!e || e->zeta_raw == 0.0) return std::nullopt;
        PairParams p{e->w1, e->w2, device_j12 ? e->J12 : 0.0, z * e->zeta_raw / ref};
        return p;
    });
}

}  // namespace qchip

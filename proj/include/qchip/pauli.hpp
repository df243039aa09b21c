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

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qchip/config.hpp"
#include "qchip/device.hpp"
#include "qchip/linalg.hpp"

namespace qchip {

struct PauliTerm {
    double coeff = 0;
    std::string ops;
};

class PauliHamiltonian {
public:
    explicit PauliHamiltonian(std::size_t n_qubits = 0) : n_(n_qubits) {}

    std::size_t n_qubits() const { return n_; }
    double offset() const { return offset_; }
    const std::vector<PauliTerm>& terms() const { return terms_; }

    void add(double c, const std::string& ops) {
        if (ops.size() != n_) throw Error(Errc::dimension_mismatch, "Pauli string length mismatch: " + ops);
        if (!std::isfinite(c)) throw Error(Errc::invalid_argument, "non-finite Pauli coefficient");
        bool ident = true;
        for (char ch : ops) {
            if (ch != 'I' && ch != 'X' && ch != 'Y' && ch != 'Z') throw Error(Errc::parse_error, "bad Pauli label in " + ops);
            ident = ident && ch == 'I';
        }
        if (ident) {
            offset_ += c;
            return;
        }
        for (auto& t : terms_)
            if (t.ops == ops) {
                t.coeff += c;
                return;
            }
        if (c != 0.0) terms_.push_back({c, ops});
    }

    void add_offset(double c) { offset_ += c; }

    std::string single(std::size_t q, char p) const {
        std::string s(n_, 'I');
        s[q] = p;
        return s;
    }
    std::string pair(std::size_t a, std::size_t b, char pa, char pb) const {
        std::string s(n_, 'I');
        s[a] = pa;
        s[b] = pb;
        return s;
    }

    void drop_zeros() {
        terms_.erase(std::remove_if(terms_.begin(), terms_.end(), [](const PauliTerm& t) { return t.coeff == 0.0; }), terms_.end());
    }

    // Qubit 0 is the most significant bit of the basis index.
    static SparseMatrix string_matrix(const std::string& ops) {
        const std::size_t n = ops.size();
        const Eigen::Index D = Eigen::Index(1) << n;
        std::uint64_t xmask = 0;
        for (std::size_t q = 0; q < n; ++q)
            if (ops[q] == 'X' || ops[q] == 'Y') xmask |= 1ULL << (n - 1 - q);
        std::vector<Eigen::Triplet<cplx>> trip;
        trip.reserve(D);
        for (Eigen::Index b = 0; b < D; ++b) {
            cplx ph = 1;
            for (std::size_t q = 0; q < n; ++q) {
                int bit = (b >> (n - 1 - q)) & 1;
                switch (ops[q]) {
                    case 'Z': if (bit) ph = -ph; break;
                    case 'Y': ph *= bit ? cplx(0, -1) : cplx(0, 1); break;
                    default: break;
                }
            }
            trip.emplace_back(static_cast<Eigen::Index>(b ^ xmask), b, ph);
        }
        SparseMatrix m(D, D);
        m.setFromTriplets(trip.begin(), trip.end());
        return m;
    }

    SparseMatrix to_matrix(bool with_offset = true) const {
        const Eigen::Index D = Eigen::Index(1) << n_;
        SparseMatrix m(D, D);
        if (with_offset && offset_ != 0.0) m = offset_ * sparse_identity(D);
        for (auto& t : terms_) m += t.coeff * string_matrix(t.ops);
        m.prune(cplx(0.0));
        m.makeCompressed();
        return m;
    }

    // Keep `qubits` (in the given order); every other qubit is frozen in |0>.
    PauliHamiltonian restrict_to(const std::vector<std::size_t>& qubits) const {
        PauliHamiltonian out(qubits.size());
        out.offset_ = offset_;
        for (auto& t : terms_) {
            bool dead = false;
            for (std::size_t q = 0; q < n_; ++q) {
                if (std::find(qubits.begin(), qubits.end(), q) != qubits.end()) continue;
                if (t.ops[q] == 'X' || t.ops[q] == 'Y') dead = true;
            }
            if (dead) continue;
            std::string s;
            for (auto q : qubits) s += t.ops[q];
            out.add(t.coeff, s);
        }
        return out;
    }

    std::string serialize() const {
        std::ostringstream os;
        os << fmt_double(offset_) << " " << std::string(n_, 'I') << "\n";
        for (auto& t : terms_) os << fmt_double(t.coeff) << " " << t.ops << "\n";
        return os.str();
    }

    static PauliHamiltonian parse(const std::string& text) {
        std::stringstream ss(text);
        std::string line;
        PauliHamiltonian h;
        bool first = true;
        while (std::getline(ss, line)) {
            line = trim(line);
            if (line.empty() || line[0] == '#') continue;
            std::stringstream ls(line);
            std::string c, ops;
            if (!(ls >> c >> ops)) throw Error(Errc::parse_error, "bad Pauli line: " + line);
            if (first) {
                h = PauliHamiltonian(ops.size());
                first = false;
            }
            h.add(parse_values(c)[0], ops);
        }
        return h;
    }

private:
    std::size_t n_;
    double offset_ = 0;
    std::vector<PauliTerm> terms_;
};

inline constexpr std::size_t kIntQ = 0, kExtQ = 4, kTunQ = 8;

struct PauliMapOptions {
    // Give the readout resonator its own spin (qubit index 9).
    bool readout_spin = false;
};

inline double mediated_J(double g1, double g2, double d1, double d2, const char* what) {
    if (g1 == 0.0 || g2 == 0.0) return 0.0;
    if (d1 == 0.0 || d2 == 0.0) throw Error(Errc::resonant_regime, std::string(what) + ": zero detuning from mediator");
    return g1 * g2 * (1.0 / d1 + 1.0 / d2);
}

// Spin-mapped Hamiltonian: omega n -> -(omega/2) Z + omega/2, chi Z (a^dag a) with
// a^dag a -> (I - Z_partner)/2, exchange -> (J/2)(XX + YY).
inline PauliHamiltonian map_to_pauli(const DeviceParams& p, const PauliMapOptions& opt = {}) {
    const std::size_t n = opt.readout_spin ? 10 : 9;
    PauliHamiltonian h(n);
    auto freq = [&](std::size_t q, double w) {
        h.add(-0.5 * w, h.single(q, 'Z'));
        h.add_offset(0.5 * w);
    };
    auto chi = [&](std::size_t q, std::size_t partner, double c) {
        h.add(0.5 * c, h.single(q, 'Z'));
        h.add(-0.5 * c, h.pair(q, partner, 'Z', 'Z'));
    };
    auto exch = [&](std::size_t a, std::size_t b, double J) {
        h.add(0.5 * J, h.pair(a, b, 'X', 'X'));
        h.add(0.5 * J, h.pair(a, b, 'Y', 'Y'));
    };
    const double wt = tunable_freq(p, p.flux);
    for (std::size_t k = 0; k < 4; ++k) freq(kIntQ + k, p.interior_freqs[k]);
    for (std::size_t k = 0; k < 4; ++k) freq(kExtQ + k, p.exterior_freqs[k]);
    freq(kTunQ, wt);
    for (std::size_t k = 0; k < 4; ++k) {
        chi(kIntQ + k, kExtQ + k, p.chi_j[k]);
        chi(kExtQ + k, kIntQ + k, p.chi_i[k]);
    }
    for (std::size_t k = 0; k < 4; ++k) {
        const double wc = p.coupler_res_freqs[k];
        double Jjc = mediated_J(p.g_c_bare, p.g_j_bare[k], wt - wc, p.interior_freqs[k] - wc, "J_jc");
        double Jij = mediated_J(p.g_i_bare[k], p.g_j_bare[k], p.exterior_freqs[k] - wc, p.interior_freqs[k] - wc, "J_ij");
        if (Jjc != 0.0) exch(kIntQ + k, kTunQ, Jjc);
        if (Jij != 0.0) exch(kIntQ + k, kExtQ + k, Jij);
    }
    if (opt.readout_spin) {
        freq(9, p.readout_freq);
        for (std::size_t k = 0; k < 4; ++k) chi(kExtQ + k, 9, p.chi_k[k]);
    }
    h.drop_zeros();
    return h;
}

// ---------------------------------------------------------------- circuits

enum class GateKind { Rz, Rzz, Rxx, Ryy, H, X, CZ, Measure };

inline const char* gate_name(GateKind k) {
    switch (k) {
        case GateKind::Rz: return "RZ";
        case GateKind::Rzz: return "RZZ";
        case GateKind::Rxx: return "RXX";
        case GateKind::Ryy: return "RYY";
        case GateKind::H: return "H";
        case GateKind::X: return "X";
        case GateKind::CZ: return "CZ";
        case GateKind::Measure: return "MEASURE";
    }
    return "?";
}

inline GateKind gate_kind(const std::string& s) {
    static const std::map<std::string, GateKind> m = {{"RZ", GateKind::Rz},   {"RZZ", GateKind::Rzz}, {"RXX", GateKind::Rxx},
                                                      {"RYY", GateKind::Ryy}, {"H", GateKind::H},     {"X", GateKind::X},
                                                      {"CZ", GateKind::CZ},   {"MEASURE", GateKind::Measure}};
    auto it = m.find(s);
    if (it == m.end()) throw Error(Errc::parse_error, "unknown gate kind " + s);
    return it->second;
}

struct Gate {
    GateKind kind = GateKind::H;
    std::vector<int> qubits;
    double angle = 0;
    double duration = 0;
};

struct GateCircuit {
    int n_qubits = 0;
    std::vector<Gate> gates;

    void add(GateKind k, std::vector<int> q, double angle = 0, double duration = 0) {
        for (int x : q)
            if (x < 0 || x >= n_qubits) throw Error(Errc::invalid_argument, "gate qubit index out of range");
        if (!std::isfinite(angle)) throw Error(Errc::invalid_argument, "non-finite gate angle");
        if (!(duration >= 0)) throw Error(Errc::invalid_argument, "negative gate duration");
        gates.push_back({k, std::move(q), angle, duration});
    }
    std::size_t size() const { return gates.size(); }

    std::string serialize() const {
        std::ostringstream os;
        os << "# qubits " << n_qubits << "\n";
        for (auto& g : gates) {
            os << gate_name(g.kind) << " ";
            for (std::size_t i = 0; i < g.qubits.size(); ++i) os << (i ? "," : "") << g.qubits[i];
            os << " " << fmt_double(g.angle) << " " << fmt_double(g.duration) << "\n";
        }
        return os.str();
    }

    static GateCircuit parse(const std::string& text) {
        GateCircuit c;
        std::stringstream ss(text);
        std::string line;
        std::vector<Gate> gates;
        int maxq = -1;
        while (std::getline(ss, line)) {
            line = trim(line);
            if (line.empty()) continue;
            if (line[0] == '#') {
                std::stringstream hs(line.substr(1));
                std::string w;
                int nq;
                if (hs >> w >> nq && w == "qubits") c.n_qubits = nq;
                continue;
            }
            std::stringstream ls(line);
            std::string kind, qs, a, d;
            if (!(ls >> kind >> qs >> a >> d)) throw Error(Errc::parse_error, "bad gate line: " + line);
            Gate g;
            g.kind = gate_kind(kind);
            std::stringstream qss(qs);
            std::string tok;
            while (std::getline(qss, tok, ',')) {
                g.qubits.push_back(std::stoi(tok));
                maxq = std::max(maxq, g.qubits.back());
            }
            g.angle = std::stod(a);
            g.duration = std::stod(d);
            gates.push_back(g);
        }
        if (c.n_qubits == 0) c.n_qubits = maxq + 1;
        for (auto& g : gates) c.add(g.kind, g.qubits, g.angle, g.duration);
        return c;
    }
};

inline DenseMatrix gate_matrix(const Gate& g) {
    const double th = g.angle;
    const cplx mi(0, -1);
    switch (g.kind) {
        case GateKind::Rz: {
            DenseMatrix m = DenseMatrix::Zero(2, 2);
            m(0, 0) = std::exp(mi * (th / 2));
            m(1, 1) = std::exp(-mi * (th / 2));
            return m;
        }
        case GateKind::H: {
            DenseMatrix m(2, 2);
            m << 1, 1, 1, -1;
            return m / std::sqrt(2.0);
        }
        case GateKind::X: return pauli::X();
        case GateKind::CZ: {
            DenseMatrix m = DenseMatrix::Identity(4, 4);
            m(3, 3) = -1;
            return m;
        }
        case GateKind::Rzz: return std::cos(th / 2) * DenseMatrix::Identity(4, 4) + mi * std::sin(th / 2) * kron(pauli::Z(), pauli::Z());
        case GateKind::Rxx: return std::cos(th / 2) * DenseMatrix::Identity(4, 4) + mi * std::sin(th / 2) * kron(pauli::X(), pauli::X());
        case GateKind::Ryy: return std::cos(th / 2) * DenseMatrix::Identity(4, 4) + mi * std::sin(th / 2) * kron(pauli::Y(), pauli::Y());
        case GateKind::Measure: break;
    }
    throw Error(Errc::invalid_argument, "gate has no unitary");
}

// Left-multiply rows of M (dimension 2^n) by a 1- or 2-qubit gate.
inline void apply_gate_rows(DenseMatrix& M, int n, const std::vector<int>& q, const DenseMatrix& u) {
    const Eigen::Index D = Eigen::Index(1) << n;
    if (M.rows() != D) throw Error(Errc::dimension_mismatch, "state dimension mismatch");
    if (q.size() == 1) {
        const Eigen::Index bit = Eigen::Index(1) << (n - 1 - q[0]);
        for (Eigen::Index b = 0; b < D; ++b) {
            if (b & bit) continue;
            for (Eigen::Index c = 0; c < M.cols(); ++c) {
                cplx x0 = M(b, c), x1 = M(b | bit, c);
                M(b, c) = u(0, 0) * x0 + u(0, 1) * x1;
                M(b | bit, c) = u(1, 0) * x0 + u(1, 1) * x1;
            }
        }
        return;
    }
    const Eigen::Index b1 = Eigen::Index(1) << (n - 1 - q[0]);
    const Eigen::Index b2 = Eigen::Index(1) << (n - 1 - q[1]);
    for (Eigen::Index b = 0; b < D; ++b) {
        if ((b & b1) || (b & b2)) continue;
        const Eigen::Index idx[4] = {b, b | b2, b | b1, b | b1 | b2};  // |q0 q1> = 00, 01, 10, 11
        for (Eigen::Index c = 0; c < M.cols(); ++c) {
            cplx x[4] = {M(idx[0], c), M(idx[1], c), M(idx[2], c), M(idx[3], c)};
            for (int r = 0; r < 4; ++r) M(idx[r], c) = u(r, 0) * x[0] + u(r, 1) * x[1] + u(r, 2) * x[2] + u(r, 3) * x[3];
        }
    }
}

inline DenseMatrix circuit_unitary(const GateCircuit& c) {
    const Eigen::Index D = Eigen::Index(1) << c.n_qubits;
    DenseMatrix U = DenseMatrix::Identity(D, D);
    for (auto& g : c.gates) {
        if (g.kind == GateKind::Measure) continue;
        apply_gate_rows(U, c.n_qubits, g.qubits, gate_matrix(g));
    }
    return U;
}

// First-order Trotter circuit for exp(-i h t). For t < 0 the term order inside
// each slice is reversed, so trotterize(h,-t,n) is the exact inverse of trotterize(h,t,n).
inline GateCircuit trotterize(const PauliHamiltonian& h, double t, int n_steps) {
    if (n_steps < 1) throw Error(Errc::invalid_argument, "n_steps must be >= 1");
    GateCircuit c;
    c.n_qubits = static_cast<int>(h.n_qubits());
    const double dt = t / n_steps;
    std::vector<PauliTerm> terms = h.terms();
    if (t < 0) std::reverse(terms.begin(), terms.end());
    struct Planned {
        GateKind k;
        std::vector<int> q;
        double angle;
    };
    std::vector<Planned> slice;
    for (auto& term : terms) {
        std::vector<int> q;
        std::string kinds;
        for (std::size_t i = 0; i < term.ops.size(); ++i)
            if (term.ops[i] != 'I') {
                q.push_back(static_cast<int>(i));
                kinds += term.ops[i];
            }
        const double ang = 2.0 * term.coeff * dt;
        if (kinds == "Z") slice.push_back({GateKind::Rz, q, ang});
        else if (kinds == "ZZ") slice.push_back({GateKind::Rzz, q, ang});
        else if (kinds == "XX") slice.push_back({GateKind::Rxx, q, ang});
        else if (kinds == "YY") slice.push_back({GateKind::Ryy, q, ang});
        else throw Error(Errc::unsupported_term, "no gate for Pauli term " + term.ops);
    }
    for (int s = 0; s < n_steps; ++s)
        for (auto& p : slice) c.add(p.k, p.q, p.angle, 0.0);
    return c;
}

// ---------------------------------------------------------------- effective pair

struct PairSpec {
    std::string q1, mediator, q2;
    bool bus = false;
    std::string text;
};

inline bool is_qubit_label(const std::string& s) {
    return s == "tun" || ((s.rfind("int", 0) == 0 || s.rfind("ext", 0) == 0) && label_index(s) >= 0);
}

// "int1-res-tun", "ext1-bus-ext2", "int2-res3-tun"
inline PairSpec parse_pair(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, '-')) parts.push_back(tok);
    if (parts.size() != 3) throw Error(Errc::parse_error, "pair must look like int1-res-tun, got " + text);
    PairSpec p{parts[0], parts[1], parts[2], false, text};
    if (!is_qubit_label(p.q1) || !is_qubit_label(p.q2) || p.q1 == p.q2)
        throw Error(Errc::unknown_label, "pair needs two distinct qubit labels: " + text);
    if (p.mediator == "res") {
        const std::string& anchor = p.q1 != "tun" ? p.q1 : p.q2;
        p.mediator = "res" + std::to_string(label_index(anchor) + 1);
    } else if (p.mediator == "bus" || p.mediator == "ro") {
        p.mediator = "ro";
        p.bus = true;
    } else if (!(p.mediator.rfind("res", 0) == 0 && label_index(p.mediator) >= 0)) {
        throw Error(Errc::unknown_label, "unknown mediator " + p.mediator);
    }
    return p;
}

inline double bare_coupling(const DeviceParams& p, const std::string& q) {
    if (q == "tun") return p.g_c_bare;
    int k = label_index(q);
    return q.rfind("int", 0) == 0 ? p.g_j_bare[k] : p.g_i_bare[k];
}

// chi channel of qubit q on mediator m: interior on its own resonator chi_j,
// exterior on its own resonator chi_i, exterior on the bus chi_k, else none.
inline double pair_chi(const DeviceParams& p, const std::string& q, const std::string& m) {
    int k = label_index(q);
    if (q == "tun") return 0.0;
    bool own = m.rfind("res", 0) == 0 && label_index(m) == k;
    if (q.rfind("int", 0) == 0) return own ? p.chi_j[k] : 0.0;
    if (own) return p.chi_i[k];
    if (m == "ro") return p.chi_k[k];
    return 0.0;
}

struct EffectivePair {
    PairSpec spec;
    double w1 = 0, w2 = 0;       // dressed
    double J12 = 0;
    double zeta = 0;             // scaled
    double zeta_raw = 0;         // before the global scale
    double delta1 = 0, delta2 = 0;
    double mediator_freq = 0;
};

// ZZ coefficient of the three-spin (A, mediator, B) Pauli model, from exact diagonalization.
inline double three_spin_zeta(double wa, double wm, double wb, double ga, double gb, double ca, double cb) {
    PauliHamiltonian h(3);
    // rotating at the mediator: the ZZ combination is frame independent
    h.add(-0.5 * (wa - wm), "ZII");
    h.add(-0.5 * (wb - wm), "IIZ");
    h.add(0.5 * ca, "ZII");
    h.add(-0.5 * ca, "ZZI");
    h.add(0.5 * cb, "IIZ");
    h.add(-0.5 * cb, "IZZ");
    h.add(0.5 * ga, "XXI");
    h.add(0.5 * ga, "YYI");
    h.add(0.5 * gb, "IXX");
    h.add(0.5 * gb, "IYY");
    DenseMatrix H(h.to_matrix(false));
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(H);
    auto energy = [&](int a, int b) {
        Eigen::Index idx = a * 4 + b;
        Eigen::Index best = 0;
        double bo = -1;
        for (Eigen::Index k = 0; k < 8; ++k) {
            double o = std::norm(es.eigenvectors()(idx, k));
            if (o > bo) {
                bo = o;
                best = k;
            }
        }
        return es.eigenvalues()(best);
    };
    return (energy(0, 0) + energy(1, 1) - energy(0, 1) - energy(1, 0)) / 4.0;
}

inline EffectivePair effective_two_qubit(const DeviceParams& p, const PairSpec& pair, double zeta_scale = 1.0) {
    EffectivePair e;
    e.spec = pair;
    const double wm = mode_frequency(p, pair.mediator);
    const double w1 = mode_frequency(p, pair.q1), w2 = mode_frequency(p, pair.q2);
    const double g1 = bare_coupling(p, pair.q1), g2 = bare_coupling(p, pair.q2);
    e.mediator_freq = wm;
    e.delta1 = w1 - wm;
    e.delta2 = w2 - wm;
    if (std::abs(e.delta1) <= std::abs(g1) || std::abs(e.delta2) <= std::abs(g2) || e.delta1 == 0.0 || e.delta2 == 0.0)
        throw Error(Errc::resonant_regime, "mediator " + pair.mediator + " is resonant with pair " + pair.text);
    e.w1 = w1 + g1 * g1 / e.delta1;
    e.w2 = w2 + g2 * g2 / e.delta2;
    e.J12 = effective_J(g1, g2, e.delta1, e.delta2);
    e.zeta_raw = three_spin_zeta(w1, wm, w2, g1, g2, pair_chi(p, pair.q1, pair.mediator), pair_chi(p, pair.q2, pair.mediator));
    e.zeta = zeta_scale * e.zeta_raw;
    return e;
}

inline EffectivePair effective_two_qubit(const DeviceParams& p, const std::string& pair, double zeta_scale = 1.0) {
    return effective_two_qubit(p, parse_pair(pair), zeta_scale);
}

inline constexpr const char* kAnchorPair = "int1-res-tun";
inline constexpr double kAnchorZeta = 0.7097 * MHz;

// Global zeta scale: the anchor pair on the optimized preset lands on its reference value.
inline double calibrate_zeta_scale(const DeviceParams& optimized = preset("optimized")) {
    EffectivePair e = effective_two_qubit(optimized, kAnchorPair, 1.0);
    if (e.zeta_raw == 0.0) throw Error(Errc::invalid_argument, "anchor pair has no ZZ coupling");
    return kAnchorZeta / std::abs(e.zeta_raw);
}

}  // namespace qchip

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
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "qchip/device.hpp"
#include "qchip/error.hpp"
#include "qchip/util.hpp"

namespace qchip {

namespace phys {
inline constexpr double e = 1.602176634e-19;
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double c = 299792458.0;
}  // namespace phys

inline constexpr double fF = 1e-15;
inline constexpr double mm = 1e-3;

enum class LineMode { half_wave, quarter_wave };

// C = e^2 / (2 hbar alpha), alpha in rad/s. Returns farads.
inline double total_capacitance(double alpha) {
    if (!(alpha > 0)) throw Error(Errc::invalid_argument, "anharmonicity must be positive");
    return phys::e * phys::e / (2 * phys::hbar * alpha);
}

// f in Hz; metres.
inline double resonator_length(double f, double eps_eff, LineMode mode) {
    if (!(f > 0) || !(eps_eff > 0)) throw Error(Errc::invalid_argument, "frequency and permittivity must be positive");
    return phys::c / ((mode == LineMode::half_wave ? 2.0 : 4.0) * f * std::sqrt(eps_eff));
}

inline double purcell_rate(double g, double delta, double kappa) {
    if (delta == 0) throw Error(Errc::resonant_regime, "purcell rate needs nonzero detuning");
    double r = g / delta;
    return r * r * kappa;
}

// Half-wave line capacitance pi / (2 omega_r Z0).
inline double resonator_capacitance(double omega_r, double z0) { return kPi / (2 * omega_r * z0); }

inline double coupling_capacitance(double g, double c_sigma, double c_r, double omega_q, double omega_r) {
    return 2 * std::abs(g) * std::sqrt(c_sigma * c_r) / std::sqrt(omega_q * omega_r);
}

struct HardwareConstants {
    double z0 = 50.0;
    double eps_eff = 5.5;
    double alpha = 200 * MHz;
    LineMode mode = LineMode::half_wave;
    Quad kappa = {3.35 * MHz, 3.69 * MHz, 3.65 * MHz, 3.25 * MHz};
    // separation heuristic: |J| = 0 -> ld_max, |J| >= j_span -> ld_min
    double ld_min = 3.48 * mm, ld_max = 4.10 * mm;
    double j_span = 20 * MHz;
};

struct ReportEntry {
    std::string quantity;
    int index = -1;  // channel, -1 for scalars
    double value = 0;
    std::string unit;
    std::string formula;
    std::map<std::string, double> inputs;  // SI / rad/s
};

inline const char* kResonatorLengthNote =
    "note: resonator lengths use L = c/(2 f sqrt(eps_eff)); the reference lengths 7.19-8.23 mm match neither the half-wave "
    "nor the quarter-wave form at eps_eff = 5.5, and their ordering runs opposite to the resonator frequencies, so they "
    "are not reproduced here.";
inline const char* kSeparationNote = "note: qubit separations come from a linear heuristic in |J_lambda_j| (no physical model).";

struct HardwareReport {
    HardwareConstants constants;
    std::vector<ReportEntry> entries;

    std::vector<double> values(const std::string& q) const {
        std::vector<double> v;
        for (auto& e : entries)
            if (e.quantity == q) v.push_back(e.value);
        return v;
    }

    void write_csv(std::ostream& os) const {
        os << "quantity,index,value,unit,formula\n";
        for (auto& e : entries) os << e.quantity << "," << e.index << "," << fmt_double(e.value) << "," << e.unit << "," << e.formula << "\n";
    }

    void write_text(std::ostream& os) const {
        os << "circuit translation\n";
        os << "constants: Z0=" << fmt_double(constants.z0) << " ohm, eps_eff=" << fmt_double(constants.eps_eff)
           << ", alpha/2pi=" << fmt_double(constants.alpha / MHz) << " MHz, line="
           << (constants.mode == LineMode::half_wave ? "half-wave" : "quarter-wave") << "\n";
        for (auto& e : entries) {
            os << e.quantity;
            if (e.index >= 0) os << "[" << e.index + 1 << "]";
            os << " = " << fmt_double(e.value) << " " << e.unit << "  (" << e.formula << ";";
            for (auto& [k, v] : e.inputs) os << " " << k << "=" << fmt_double(v);
            os << ")\n";
        }
        os << kResonatorLengthNote << "\n" << kSeparationNote << "\n";
    }
};

// Recomputes an entry from its formula tag and logged inputs (audit path).
inline double recompute(const ReportEntry& e) {
    auto in = [&](const char* k) {
        auto it = e.inputs.find(k);
        if (it == e.inputs.end()) throw Error(Errc::missing_observable, std::string("report entry lacks input ") + k);
        return it->second;
    };
    if (e.formula == "C=e^2/(2*hbar*alpha)") return total_capacitance(in("alpha")) / fF;
    if (e.formula == "L=c/(2*f*sqrt(eps))") return resonator_length(in("f"), in("eps_eff"), LineMode::half_wave) / mm;
    if (e.formula == "L=c/(4*f*sqrt(eps))") return resonator_length(in("f"), in("eps_eff"), LineMode::quarter_wave) / mm;
    if (e.formula == "kappa/2pi") return in("kappa") / MHz;
    if (e.formula == "Gamma=(g/Delta)^2*kappa") return purcell_rate(in("g"), in("delta"), in("kappa")) / kHz;
    if (e.formula == "Cc=2g*sqrt(Cs*Cr)/sqrt(wq*wr),Cr=pi/(2*wr*Z0)")
        return coupling_capacitance(in("g"), in("c_sigma"), resonator_capacitance(in("omega_r"), in("z0")), in("omega_q"), in("omega_r")) / fF;
    if (e.formula == "heuristic:Ld=ld_max-(ld_max-ld_min)*min(|J|/j_span,1)")
        return (in("ld_max") - (in("ld_max") - in("ld_min")) * std::min(std::abs(in("J")) / in("j_span"), 1.0)) / mm;
    throw Error(Errc::unsupported_term, "unknown formula tag " + e.formula);
}

// Channel k: coupling resonator k (length, kappa, Purcell via g_lambda_b and the interior
// detuning); C_c from the exterior bare coupling g_i_bare against the readout resonator.
inline HardwareReport translate(const DeviceParams& p, const HardwareConstants& hc = {}) {
    p.validate();
    if (!(hc.z0 > 0 && hc.eps_eff > 0 && hc.alpha > 0 && hc.ld_max >= hc.ld_min && hc.ld_min > 0 && hc.j_span > 0))
        throw Error(Errc::invalid_argument, "hardware constants must be positive");
    for (double k : hc.kappa)
        if (!(k > 0)) throw Error(Errc::invalid_argument, "decay rates must be positive");
    HardwareReport r;
    r.constants = hc;
    auto add = [&](std::string q, int idx, std::string unit, std::string formula, std::map<std::string, double> in) {
        ReportEntry e{std::move(q), idx, 0, std::move(unit), std::move(formula), std::move(in)};
        e.value = recompute(e);
        r.entries.push_back(std::move(e));
    };
    const double c_sigma = total_capacitance(hc.alpha);
    add("total_capacitance", -1, "fF", "C=e^2/(2*hbar*alpha)", {{"alpha", hc.alpha}});
    for (int k = 0; k < 4; ++k)
        add("resonator_length", k, "mm", hc.mode == LineMode::half_wave ? "L=c/(2*f*sqrt(eps))" : "L=c/(4*f*sqrt(eps))",
            {{"f", p.coupler_res_freqs[k] / kTwoPi}, {"eps_eff", hc.eps_eff}});
    for (int k = 0; k < 4; ++k) add("decay_rate", k, "MHz", "kappa/2pi", {{"kappa", hc.kappa[k]}});
    for (int k = 0; k < 4; ++k) {
        double delta = p.interior_freqs[k] - p.coupler_res_freqs[k];
        add("purcell_rate", k, "kHz", "Gamma=(g/Delta)^2*kappa", {{"g", p.g_lambda_b[k]}, {"delta", delta}, {"kappa", hc.kappa[k]}});
        if (!(r.entries.back().value * kHz < hc.kappa[k]))
            throw Error(Errc::contract_violation, "purcell rate of channel " + std::to_string(k + 1) + " is not below its decay rate");
    }
    for (int k = 0; k < 4; ++k)
        add("coupling_capacitance", k, "fF", "Cc=2g*sqrt(Cs*Cr)/sqrt(wq*wr),Cr=pi/(2*wr*Z0)",
            {{"g", p.g_i_bare[k]}, {"c_sigma", c_sigma}, {"omega_q", p.exterior_freqs[k]}, {"omega_r", p.readout_freq}, {"z0", hc.z0}});
    for (int k = 0; k < 4; ++k)
        add("qubit_separation", k, "mm", "heuristic:Ld=ld_max-(ld_max-ld_min)*min(|J|/j_span,1)",
            {{"J", p.J_lambda_j[k]}, {"ld_min", hc.ld_min}, {"ld_max", hc.ld_max}, {"j_span", hc.j_span}});
    return r;
}

}  // namespace qchip

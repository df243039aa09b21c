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

#include <stdexcept>
#include <string>

namespace qchip {

enum class Errc {
    invalid_dimension,
    unknown_label,
    dimension_mismatch,
    contract_violation,
    resonant_regime,
    dangling_coupling,
    unphysical_dephasing,
    unknown_preset,
    stiffness,
    missing_observable,
    empty_cloud,
    invalid_argument,
    degenerate_dataset,
    divergence,
    under_resolved,
    unsupported_term,
    parse_error,
    io_error,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::invalid_dimension: return "invalid-dimension";
        case Errc::unknown_label: return "unknown-label";
        case Errc::dimension_mismatch: return "dimension-mismatch";
        case Errc::contract_violation: return "contract-violation";
        case Errc::resonant_regime: return "resonant-regime";
        case Errc::dangling_coupling: return "dangling-coupling";
        case Errc::unphysical_dephasing: return "unphysical-dephasing";
        case Errc::unknown_preset: return "unknown-preset";
        case Errc::stiffness: return "stiffness";
        case Errc::missing_observable: return "missing-observable";
        case Errc::empty_cloud: return "empty-cloud";
        case Errc::invalid_argument: return "invalid-argument";
        case Errc::degenerate_dataset: return "degenerate-dataset";
        case Errc::divergence: return "divergence";
        case Errc::under_resolved: return "under-resolved";
        case Errc::unsupported_term: return "unsupported-term";
        case Errc::parse_error: return "parse-error";
        case Errc::io_error: return "io-error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace qchip

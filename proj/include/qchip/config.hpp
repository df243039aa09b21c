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

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qchip/device.hpp"

namespace qchip {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Unit suffix -> factor into rad/s or seconds.
inline bool unit_factor(const std::string& u, double& f) {
    static const std::map<std::string, double> units = {
        {"GHz", GHz},  {"MHz", MHz},      {"kHz", kHz},    {"Hz", kTwoPi}, {"Mrad/s", 1e6}, {"rad/s", 1.0},
        {"us", 1e-6},  {"ns", 1e-9},      {"s", 1.0},      {"/us", 1e6},   {"/s", 1.0},
    };
    auto it = units.find(u);
    if (it == units.end()) return false;
    f = it->second;
    return true;
}

// "5.52, 5.53 GHz" -> {2pi*5.52e9, 2pi*5.53e9}. A bare value keeps its number.
inline std::vector<double> parse_values(const std::string& raw) {
    std::string s = trim(raw);
    double factor = 1.0;
    // unit is the trailing run of non-numeric characters
    std::size_t pos = s.size();
    while (pos > 0) {
        char c = s[pos - 1];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '/') {
            --pos;
            continue;
        }
        break;
    }
    std::string unit = trim(s.substr(pos));
    std::string nums = s.substr(0, pos);
    if (!unit.empty()) {
        if (!unit_factor(unit, factor)) throw Error(Errc::parse_error, "unknown unit '" + unit + "' in '" + raw + "'");
    }
    std::vector<double> out;
    std::stringstream ss(nums);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) throw Error(Errc::parse_error, "empty value in '" + raw + "'");
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(tok, &used);
        } catch (...) {
            throw Error(Errc::parse_error, "not a number: '" + tok + "'");
        }
        if (used != tok.size()) throw Error(Errc::parse_error, "not a number: '" + tok + "'");
        out.push_back(v * factor);
    }
    if (out.empty()) throw Error(Errc::parse_error, "no value in '" + raw + "'");
    return out;
}

// Ordered key/value list; later entries override earlier ones.
struct KeyValues {
    std::vector<std::pair<std::string, std::string>> entries;

    void set(const std::string& k, const std::string& v) { entries.emplace_back(trim(k), trim(v)); }
    bool has(const std::string& k) const {
        for (auto& e : entries)
            if (e.first == k) return true;
        return false;
    }
    std::string get(const std::string& k, const std::string& dflt = "") const {
        std::string v = dflt;
        for (auto& e : entries)
            if (e.first == k) v = e.second;
        return v;
    }
};

inline KeyValues parse_config_text(const std::string& text) {
    KeyValues kv;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(Errc::parse_error, "config line " + std::to_string(lineno) + ": expected key = value");
        std::string k = trim(line.substr(0, eq));
        if (k.empty()) throw Error(Errc::parse_error, "config line " + std::to_string(lineno) + ": empty key");
        kv.set(k, line.substr(eq + 1));
    }
    return kv;
}

inline KeyValues load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

inline std::pair<std::string, int> split_index(const std::string& key) {
    auto lb = key.find('[');
    if (lb == std::string::npos) return {key, -1};
    auto rb = key.find(']', lb);
    if (rb == std::string::npos || rb != key.size() - 1) throw Error(Errc::parse_error, "bad index in key " + key);
    int idx = std::stoi(key.substr(lb + 1, rb - lb - 1));
    if (idx < 0 || idx > 3) throw Error(Errc::parse_error, "index out of range in key " + key);
    return {key.substr(0, lb), idx};
}

inline bool apply_noise_key(NoiseParams& n, const std::string& key, const std::string& value) {
    double* slot = nullptr;
    if (key == "T1") slot = &n.T1;
    else if (key == "T2") slot = &n.T2;
    else if (key == "kappa_res") slot = &n.kappa_res;
    else if (key == "kappa_readout") slot = &n.kappa_readout;
    if (!slot) return false;
    auto v = parse_values(value);
    if (v.size() != 1) throw Error(Errc::parse_error, key + " takes one value");
    *slot = v[0];
    return true;
}

inline bool apply_device_key(DeviceParams& p, const std::string& raw_key, const std::string& value) {
    auto [key, idx] = split_index(raw_key);
    for (auto& f : param_fields(p)) {
        if (f.name != key) continue;
        auto v = parse_values(value);
        if (f.scalar) {
            if (idx >= 0 || v.size() != 1) throw Error(Errc::parse_error, key + " takes one value");
            *f.scalar = v[0];
        } else if (idx >= 0) {
            if (v.size() != 1) throw Error(Errc::parse_error, raw_key + " takes one value");
            (*f.quad)[idx] = v[0];
        } else if (v.size() == 1) {
            f.quad->fill(v[0]);
        } else if (v.size() == 4) {
            for (int k = 0; k < 4; ++k) (*f.quad)[k] = v[k];
        } else {
            throw Error(Errc::parse_error, key + " takes 1 or 4 values");
        }
        return true;
    }
    return false;
}

// Preset, then config/override entries in order. Keys the device and noise
// models do not know are left for the caller.
struct ResolvedConfig {
    std::string preset_name;
    DeviceParams device;
    NoiseParams noise;
    KeyValues extra;
    std::vector<std::string> log;
};

inline ResolvedConfig resolve_config(const std::string& default_preset, const KeyValues& file, const KeyValues& overrides) {
    ResolvedConfig rc;
    rc.preset_name = default_preset;
    if (file.has("preset")) rc.preset_name = file.get("preset");
    if (overrides.has("preset")) rc.preset_name = overrides.get("preset");
    rc.device = preset(rc.preset_name);
    rc.log.push_back("preset " + rc.preset_name);
    auto apply = [&](const KeyValues& kv, const char* origin) {
        for (auto& [k, v] : kv.entries) {
            if (k == "preset") continue;
            if (apply_device_key(rc.device, k, v) || apply_noise_key(rc.noise, k, v)) {
                rc.log.push_back(std::string(origin) + " " + k + " = " + v);
                continue;
            }
            rc.extra.set(k, v);
            rc.log.push_back(std::string(origin) + " " + k + " = " + v);
        }
    };
    apply(file, "config");
    apply(overrides, "override");
    rc.device.validate();
    rc.noise.validate();
    return rc;
}

// Canonical units (rad/s, s, 1/s); re-loading this text reproduces the values bit for bit.
inline std::string serialize_device(const DeviceParams& p0, const NoiseParams& n) {
    DeviceParams p = p0;
    std::ostringstream os;
    for (auto& f : param_fields(p)) {
        os << f.name << " = ";
        bool dimless = f.name == "flux" || f.name == "squid_asymmetry";
        if (f.scalar) {
            os << fmt_double(*f.scalar);
        } else {
            for (int k = 0; k < 4; ++k) os << (k ? ", " : "") << fmt_double((*f.quad)[k]);
        }
        os << (dimless ? "" : " rad/s") << "\n";
    }
    os << "T1 = " << fmt_double(n.T1) << " s\n";
    os << "T2 = " << fmt_double(n.T2) << " s\n";
    os << "kappa_res = " << fmt_double(n.kappa_res) << " /s\n";
    os << "kappa_readout = " << fmt_double(n.kappa_readout) << " /s\n";
    return os.str();
}

inline double get_double(const KeyValues& kv, const std::string& key, double dflt) {
    if (!kv.has(key)) return dflt;
    auto v = parse_values(kv.get(key));
    if (v.size() != 1) throw Error(Errc::parse_error, key + " takes one value");
    return v[0];
}

}  // namespace qchip

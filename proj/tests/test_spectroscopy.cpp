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

#include <chrono>
#include <sstream>

#include "qchip/spectroscopy.hpp"

using namespace qchip;

namespace {

// ground state plus an avoided two-level pair centred at w0, detuning slope a per unit flux
std::function<ComplexMatrix(double)> two_level(double w0, double J, double a, double phi0) {
    return [=](double phi) {
        double d = a * (phi - phi0);
        DenseMatrix h = DenseMatrix::Zero(3, 3);
        h(1, 1) = w0 + d / 2;
        h(2, 2) = w0 - d / 2;
        h(1, 2) = h(2, 1) = J;
        return ComplexMatrix(h);
    };
}

std::vector<double> probe_band(double lo, double hi, std::size_t n) { return linspace(lo, hi, n); }

}  // namespace

TEST(Spectroscopy, UncoupledBranches) {
    auto p = preset("baseline");
    p.J_lambda_t = {0, 0, 0, 0};
    auto flux = linspace(0.6, 1.1, 11);
    auto probe = probe_band(5.0 * GHz, 6.2 * GHz, 1201);
    auto m = sweep_spectrum(p, default_spectroscopy_selector(), flux, probe);
    EXPECT_NEAR(m.intensity.maxCoeff(), 1.0, 1e-15);
    for (std::size_t i = 0; i < flux.size(); ++i) {
        auto pk = detail::column_peaks(m.intensity, i, probe);
        double wt = tunable_freq(p, flux[i]);
        bool has_int = false, has_tun = wt < 5.0 * GHz || wt > 6.2 * GHz;
        for (double w : pk) {
            has_int = has_int || std::abs(w - p.interior_freqs[0]) < 0.05 * MHz;
            has_tun = has_tun || std::abs(w - wt) < 0.05 * MHz;
        }
        EXPECT_TRUE(has_int) << flux[i];
        EXPECT_TRUE(has_tun) << flux[i];
    }
}

TEST(Spectroscopy, SyntheticGapIsTwiceJ) {
    const double J = 10 * MHz;
    auto m = sweep_spectrum(two_level(5.5 * GHz, J, 5 * GHz, 0.8), linspace(0.7, 0.9, 201), probe_band(5.3 * GHz, 5.7 * GHz, 801));
    auto r = find_avoided_crossing(m);
    EXPECT_NEAR(r.flux_at_min_gap, 0.8, 1e-9);
    EXPECT_NEAR(r.gap, 2 * J, 0.01 * 2 * J);
    EXPECT_FALSE(r.below_floor);
}

TEST(Spectroscopy, GapMonotoneInJ) {
    double prev = 0;
    for (double J : {4.0, 6.0, 10.0, 15.0, 25.0}) {
        auto m = sweep_spectrum(two_level(5.5 * GHz, J * MHz, 5 * GHz, 0.8), linspace(0.75, 0.85, 101),
                                probe_band(5.3 * GHz, 5.7 * GHz, 1601), {1 * MHz});
        double g = find_avoided_crossing(m).gap;
        EXPECT_GT(g, prev) << J;
        prev = g;
    }
}

TEST(Spectroscopy, ZeroCouplingIsFlagged) {
    auto m = sweep_spectrum(two_level(5.5 * GHz, 0.0, 5 * GHz, 0.8), linspace(0.7, 0.9, 101), probe_band(5.3 * GHz, 5.7 * GHz, 401));
    EXPECT_TRUE(find_avoided_crossing(m).below_floor);
}

TEST(Spectroscopy, UnderResolvedThrows) {
    auto m = sweep_spectrum(two_level(5.5 * GHz, 10 * MHz, 0.0, 0.8), linspace(0.7, 0.9, 5), probe_band(5.3 * GHz, 5.7 * GHz, 101),
                            {200 * MHz});
    try {
        find_avoided_crossing(m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::under_resolved);
    }
}

TEST(Spectroscopy, DefaultCalibrationCrossesAt082) {
    auto t0 = std::chrono::steady_clock::now();
    auto m = sweep_spectrum(preset("baseline"), default_spectroscopy_selector(), linspace(0.6, 1.1, 101),
                            probe_band(5.0 * GHz, 6.2 * GHz, 121));
    auto r = find_avoided_crossing(m);
    EXPECT_NEAR(r.flux_at_min_gap, 0.82, 0.02);
    EXPECT_FALSE(r.below_floor);
    EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 300.0);
    // refined probe grid keeps the crossing within one coarse flux cell
    auto fine = sweep_spectrum(preset("baseline"), default_spectroscopy_selector(), linspace(0.6, 1.1, 101),
                               probe_band(5.0 * GHz, 6.2 * GHz, 1201));
    auto rf = find_avoided_crossing(fine);
    EXPECT_LE(std::abs(rf.flux_at_min_gap - r.flux_at_min_gap), 0.005 + 1e-12);
    EXPECT_NEAR(rf.gap, 2 * preset("baseline").J_lambda_t[0], 0.05 * rf.gap);
}

TEST(Spectroscopy, MediatedGapMatchesEffectiveJ) {
    // ext1 and the tunable qubit brought into resonance through an off-resonant int1
    struct Case {
        double g, delta;
    };
    for (Case c : {Case{40, 500}, Case{60, 600}, Case{30, -400}}) {
        auto p = preset("baseline");
        const double w = p.interior_freqs[0];
        p.exterior_freqs[0] = w;
        p.interior_freqs[0] = w + c.delta * MHz;
        p.J_lambda_j[0] = c.g * MHz;
        p.J_lambda_t[0] = c.g * MHz;
        SubsystemSelector sel;
        sel.modes = {"int1", "ext1", "tun"};
        sel.couplings = {"J_lambda_j[0]", "J_lambda_t[0]"};
        double Jeff = std::abs(effective_J(c.g * MHz, c.g * MHz, -c.delta * MHz, -c.delta * MHz));
        auto m = sweep_spectrum(p, sel, linspace(0.80, 0.84, 161), probe_band(w - 40 * MHz, w + 40 * MHz, 801), {0.2 * MHz});
        auto r = find_avoided_crossing(m);
        EXPECT_NEAR(r.gap / 2, Jeff, 0.10 * Jeff) << c.g << " " << c.delta;
    }
}

TEST(Spectroscopy, SpectatorRelabelingInvariant) {
    auto p = preset("baseline");
    p.exterior_freqs[2] = p.exterior_freqs[1];
    SubsystemSelector a, b;
    a.modes = {"int1", "tun", "ext2"};
    b.modes = {"int1", "tun", "ext3"};
    a.couplings = b.couplings = {"J_lambda_t[0]"};
    auto flux = linspace(0.7, 0.9, 21);
    auto probe = probe_band(5.0 * GHz, 6.2 * GHz, 241);
    auto ma = sweep_spectrum(p, a, flux, probe), mb = sweep_spectrum(p, b, flux, probe);
    EXPECT_LT((ma.intensity - mb.intensity).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Spectroscopy, CsvAndReport) {
    auto m = sweep_spectrum(two_level(5.5 * GHz, 10 * MHz, 5 * GHz, 0.8), linspace(0.7, 0.9, 3), probe_band(5.3 * GHz, 5.7 * GHz, 4));
    std::ostringstream os;
    m.write_csv(os);
    std::string text = os.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 13);
    EXPECT_THROW(sweep_spectrum(two_level(5.5 * GHz, 0, 0, 0), {}, {1.0}), Error);
}

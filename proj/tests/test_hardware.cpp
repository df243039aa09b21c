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

#include <sstream>

#include "qchip/hardware.hpp"

using namespace qchip;

TEST(Hardware, TotalCapacitance) {
    EXPECT_NEAR(total_capacitance(200 * MHz) / fF, 96.85, 0.2);
    EXPECT_NEAR(total_capacitance(100 * MHz) / fF, 193.7, 0.2);
    EXPECT_NEAR(total_capacitance(400 * MHz) / total_capacitance(200 * MHz), 0.5, 1e-14);
    EXPECT_THROW(total_capacitance(0), Error);
}

TEST(Hardware, ResonatorLength) {
    EXPECT_NEAR(resonator_length(5.38e9, 5.5, LineMode::half_wave) / mm, 11.89, 0.02);
    EXPECT_NEAR(resonator_length(5.38e9, 5.5, LineMode::quarter_wave) / mm, 5.95, 0.02);
    EXPECT_NEAR(resonator_length(10.76e9, 5.5, LineMode::half_wave) / resonator_length(5.38e9, 5.5, LineMode::half_wave), 0.5, 1e-14);
    EXPECT_THROW(resonator_length(-1, 5.5, LineMode::half_wave), Error);
}

TEST(Hardware, PurcellRate) {
    const double ratio = 0.0266;
    EXPECT_NEAR(purcell_rate(ratio * 1e9, 1e9, 3.35 * MHz) / kHz, 2.37, 0.005);
    EXPECT_NEAR(purcell_rate(ratio * 1e9, 1e9, 3.69 * MHz) / kHz, 2.61, 0.005);
    EXPECT_EQ(purcell_rate(0, 1e9, 3.35 * MHz), 0.0);
    EXPECT_THROW(purcell_rate(1e6, 0, 1e6), Error);
}

TEST(Hardware, TranslateOptimizedPreset) {
    auto r = translate(preset("optimized"));
    ASSERT_EQ(r.values("total_capacitance").size(), 1u);
    EXPECT_NEAR(r.values("total_capacitance")[0], 96.8, 0.2);
    auto L = r.values("resonator_length");
    ASSERT_EQ(L.size(), 4u);
    EXPECT_NEAR(L[0], 11.89, 0.02);
    // L decreases with f: res2 (5.87 GHz) shorter than res4 (5.22 GHz)
    EXPECT_LT(L[1], L[3]);
    for (auto& e : r.entries) {
        EXPECT_GT(e.value, 0) << e.quantity << e.index;
        EXPECT_DOUBLE_EQ(recompute(e), e.value) << e.formula;
    }
    auto gp = r.values("purcell_rate"), kp = r.values("decay_rate");
    for (int k = 0; k < 4; ++k) EXPECT_LT(gp[k] * 1e-3, kp[k]);
    for (double ld : r.values("qubit_separation")) {
        EXPECT_GE(ld, 3.48 - 1e-12);
        EXPECT_LE(ld, 4.10 + 1e-12);
    }
}

TEST(Hardware, ZeroCouplingAndMonotoneKappa) {
    auto p = preset("optimized");
    p.g_i_bare = {0, 0, 0, 0};
    p.g_lambda_b = {0, 0, 0, 0};
    HardwareConstants hc;
    auto r = translate(p, hc);
    for (double c : r.values("coupling_capacitance")) EXPECT_EQ(c, 0.0);
    for (double g : r.values("purcell_rate")) EXPECT_EQ(g, 0.0);

    auto a = translate(preset("optimized"), hc);
    hc.kappa[0] *= 2;
    auto b = translate(preset("optimized"), hc);
    EXPECT_NEAR(b.values("purcell_rate")[0], 2 * a.values("purcell_rate")[0], 1e-12);
}

TEST(Hardware, ReportCarriesTagsAndNote) {
    auto r = translate(preset("optimized"));
    std::ostringstream txt, csv;
    r.write_text(txt);
    r.write_csv(csv);
    EXPECT_NE(txt.str().find(kResonatorLengthNote), std::string::npos);
    EXPECT_NE(txt.str().find("C=e^2/(2*hbar*alpha)"), std::string::npos);
    EXPECT_EQ(csv.str().rfind("quantity,index,value,unit,formula\n", 0), 0u);
    const std::string s = csv.str();
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 22);
    HardwareConstants bad;
    bad.z0 = 0;
    EXPECT_THROW(translate(preset("optimized"), bad), Error);
}

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

#include <functional>
#include <ostream>
#include <vector>

#include "qchip/device.hpp"
#include "qchip/util.hpp"

namespace qchip {

struct SpectroscopyOptions {
    double width = 3 * MHz;  // Lorentzian HWHM
};

// intensity(i, j): flux_grid[i], probe_grid[j]; normalised transition density, max 1.
struct SpectroscopyMap {
    std::vector<double> flux_grid, probe_grid;
    Eigen::MatrixXd intensity;
    double width = 0;

    void write_csv(std::ostream& os) const {
        os << "flux,probe,intensity\n";
        for (std::size_t i = 0; i < flux_grid.size(); ++i)
            for (std::size_t j = 0; j < probe_grid.size(); ++j)
                os << fmt_double(flux_grid[i]) << "," << fmt_double(probe_grid[j]) << "," << fmt_double(intensity(i, j)) << "\n";
    }
};

struct CrossingReport {
    double flux_at_min_gap = 0;
    double gap = 0;
    double lower = 0, upper = 0;  // branch frequencies at the crossing
    bool below_floor = false;     // gap not resolvable against the broadening

    void write(std::ostream& os) const {
        os << "flux_at_min_gap " << fmt_double(flux_at_min_gap) << "\n"
           << "gap_rad_s " << fmt_double(gap) << "\n"
           << "gap_MHz " << fmt_fixed(gap / MHz, 4) << "\n"
           << "lower_branch_rad_s " << fmt_double(lower) << "\n"
           << "upper_branch_rad_s " << fmt_double(upper) << "\n"
           << "below_broadening_floor " << (below_floor ? "true" : "false") << "\n";
    }
};

inline std::vector<double> transition_frequencies(const ComplexMatrix& H) {
    DenseMatrix h = H.to_dense();
    if (!H.is_hermitian(1e-12)) throw Error(Errc::contract_violation, "spectroscopy needs a Hermitian Hamiltonian");
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h, Eigen::EigenvaluesOnly);
    const auto& e = es.eigenvalues();
    std::vector<double> out;
    for (Eigen::Index k = 1; k < e.size(); ++k) out.push_back(e(k) - e(0));
    return out;
}

inline SpectroscopyMap sweep_spectrum(const std::function<ComplexMatrix(double)>& builder, const std::vector<double>& flux_grid,
                                      const std::vector<double>& probe_grid, const SpectroscopyOptions& opt = {}) {
    if (flux_grid.empty() || probe_grid.empty()) throw Error(Errc::invalid_argument, "spectroscopy grids must be nonempty");
    if (!(opt.width > 0)) throw Error(Errc::invalid_argument, "broadening width must be positive");
    SpectroscopyMap m;
    m.flux_grid = flux_grid;
    m.probe_grid = probe_grid;
    m.width = opt.width;
    m.intensity = Eigen::MatrixXd::Zero(flux_grid.size(), probe_grid.size());
    const double g2 = opt.width * opt.width;
    parallel_for(flux_grid.size(), [&](std::size_t i) {
        for (double w : transition_frequencies(builder(flux_grid[i])))
            for (std::size_t j = 0; j < probe_grid.size(); ++j) {
                double d = probe_grid[j] - w;
                m.intensity(i, j) += g2 / (d * d + g2);
            }
    });
    double mx = m.intensity.maxCoeff();
    if (mx > 0) m.intensity /= mx;
    return m;
}

inline SubsystemSelector default_spectroscopy_selector() {
    SubsystemSelector s;
    s.modes = {"int1", "tun"};
    return s;
}

inline SpectroscopyMap sweep_spectrum(const DeviceParams& p, const SubsystemSelector& sel, const std::vector<double>& flux_grid,
                                      const std::vector<double>& probe_grid, const SpectroscopyOptions& opt = {}) {
    p.validate();
    sel.layout();
    return sweep_spectrum(
        [&](double phi) {
            DeviceParams q = p;
            q.flux = phi;
            return build_hamiltonian(q, sel, Frame::lab);
        },
        flux_grid, probe_grid, opt);
}

namespace detail {

// Peaks of one column, vertex of the parabola through 1/I (exact for an isolated Lorentzian).
inline std::vector<double> column_peaks(const Eigen::MatrixXd& I, Eigen::Index i, const std::vector<double>& probe) {
    std::vector<double> out;
    const Eigen::Index n = I.cols();
    for (Eigen::Index j = 1; j + 1 < n; ++j) {
        double a = I(i, j - 1), b = I(i, j), c = I(i, j + 1);
        if (!(b > a && b >= c) || b < 1e-3) continue;
        double x = probe[j];
        double ya = 1 / a, yb = 1 / b, yc = 1 / c, h1 = x - probe[j - 1], h2 = probe[j + 1] - x;
        // parabola through (-h1, ya), (0, yb), (h2, yc)
        double s1 = (yb - ya) / h1, s2 = (yc - yb) / h2;
        double curv = (s2 - s1) / (h1 + h2);
        double off = curv > 0 ? -(s1 + curv * h1) / (2 * curv) : 0.0;
        off = std::clamp(off, -h1, h2);
        out.push_back(x + off);
    }
    return out;
}

}  // namespace detail

inline CrossingReport find_avoided_crossing(const SpectroscopyMap& m) {
    CrossingReport r;
    const std::size_t n = m.flux_grid.size();
    std::vector<double> col_gap(n, -1.0);  // -1: no peak, 0: single merged peak
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
        auto pk = detail::column_peaks(m.intensity, static_cast<Eigen::Index>(i), m.probe_grid);
        if (pk.size() == 1) col_gap[i] = 0.0;
        for (std::size_t k = 1; k < pk.size(); ++k) {
            double g = pk[k] - pk[k - 1];
            if (col_gap[i] <= 0 || g < col_gap[i]) col_gap[i] = g;
            if (best == n || g < r.gap) {
                best = i;
                r.gap = g;
                r.flux_at_min_gap = m.flux_grid[i];
                r.lower = pk[k - 1];
                r.upper = pk[k];
            }
        }
    }
    if (best == n)
        throw Error(Errc::under_resolved, "fewer than two resolvable peaks in every flux column; shrink the broadening or refine the probe grid");
    r.below_floor = r.gap < 2 * m.width;
    if (best > 0 && best + 1 < n) {
        double a = col_gap[best - 1], c = col_gap[best + 1];
        if (a == 0.0 || c == 0.0) {
            r.below_floor = true;  // branches merge next to the minimum
        } else if (a > 0 && c > 0) {
            // separation^2 is quadratic in flux across an avoided crossing; a vanishing vertex means the branches cross
            double x0 = m.flux_grid[best - 1], x1 = m.flux_grid[best], x2 = m.flux_grid[best + 1];
            double y0 = a * a, y1 = r.gap * r.gap, y2 = c * c;
            double s1 = (y1 - y0) / (x1 - x0), s2 = (y2 - y1) / (x2 - x1), A = (s2 - s1) / (x2 - x0);
            if (A > 0) {
                double B = s1 - A * (x0 + x1);
                double C = y1 - A * x1 * x1 - B * x1;
                double v = C - B * B / (4 * A);
                r.below_floor = r.below_floor || v < 4 * m.width * m.width;
            }
        }
    }
    return r;
}

}  // namespace qchip

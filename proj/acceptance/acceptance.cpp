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


// Acceptance run: one PASS/FAIL line per criterion.

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "qchip/dynamics.hpp"
#include "qchip/grover.hpp"
#include "qchip/hardware.hpp"
#include "qchip/pauli.hpp"
#include "qchip/readout.hpp"
#include "qchip/spectroscopy.hpp"
#include "qchip/surrogate.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace qchip;

namespace {

int failures = 0;

void report(int id, const std::string& what, bool ok, const std::string& detail) {
    if (!ok) ++failures;
    std::cout << (ok ? "PASS" : "FAIL") << " [" << id << "] " << what << ": " << detail << std::endl;
}

std::string f6(double v) { return fmt_fixed(v, 6); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path scratch() {
    static fs::path p = [] {
        fs::path d = fs::temp_directory_path() / ("qchip_acceptance_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return p;
}

int cli(const std::string& args) {
    std::string cmd = std::string("\"") + QCHIP_CLI_PATH + "\" " + args + " 2>>\"" + (scratch() / "cli_stderr.txt").string() + "\"";
    int rc = std::system(cmd.c_str());
    return rc;
}

json metadata(const fs::path& dir) {
    std::ifstream in(dir / "metadata.json");
    if (!in) return json::object();
    return json::parse(in);
}

template <class Fn>
void guarded(int id, const std::string& what, Fn&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        report(id, what, false, std::string("exception: ") + e.what());
    }
}

// ---------------------------------------------------------------- 1, 2

void criterion1() {
    auto t0 = std::chrono::steady_clock::now();
    fs::path out = scratch() / "c1";
    int rc = cli("fidelity-snr --out \"" + out.string() + "\" --set kappas=0.2 --set shots=100000");
    double dt = seconds_since(t0);
    json m = metadata(out);
    if (rc != 0 || !m.contains("results") || !m["results"].contains("at_kappa")) {
        report(1, "analytic fidelity anchor", false, "fidelity-snr failed (exit " + std::to_string(rc) + ")");
        return;
    }
    double a = m["results"]["at_kappa"]["analytic"], e = m["results"]["at_kappa"]["empirical"];
    double ref = normal_cdf(2.5);
    bool ok = std::abs(a - ref) < 1e-5 && std::abs(e - ref) <= 0.005 && dt < 60;
    report(1, "analytic fidelity anchor", ok,
           "analytic=" + f6(a) + " Phi(2.5)=" + f6(ref) + " empirical(1e5)=" + f6(e) + " runtime=" + fmt_fixed(dt, 2) + "s");
}

void criterion2() {
    std::vector<double> k;
    for (int i = 1; i <= 20; ++i) k.push_back(i / 50.0);  // 0.02 .. 0.40
    NoiseParams noise;
    ReadoutSettings s;
    DeviceParams p = preset("baseline");
    p.flux = 0.70;
    auto curve = fidelity_vs_snr(p, noise, s, k, 100000, 7);
    bool high = true, decreasing = true;
    double min_low = 1;
    for (auto& c : curve) {
        if (c.kappa <= 0.18 + 1e-12) {
            min_low = std::min(min_low, c.analytic);
            high = high && c.analytic >= 0.993 && c.empirical >= 0.993 - 3 * c.stderr;
        }
    }
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
        if (curve[i].kappa < 0.18 - 1e-12) continue;
        const auto &a = curve[i], &b = curve[i + 1];
        double se = std::sqrt(a.stderr * a.stderr + b.stderr * b.stderr);
        decreasing = decreasing && b.analytic < a.analytic && b.empirical < a.empirical + 2 * se;
    }
    report(2, "fidelity vs kappa_SNR shape", high && decreasing,
           "min F(kappa<=0.18)=" + f6(min_low) + " F(0.18)=" + f6(curve[8].analytic) + " F(0.40)=" + f6(curve.back().analytic) +
               (decreasing ? " strictly decreasing on [0.18,0.40]" : " NOT decreasing"));
}

// ---------------------------------------------------------------- 3

void criterion3() {
    auto t0 = std::chrono::steady_clock::now();
    auto m = sweep_spectrum(preset("baseline"), default_spectroscopy_selector(), linspace(0.6, 1.1, 101), linspace(5.0 * GHz, 6.2 * GHz, 121));
    auto r = find_avoided_crossing(m);
    double dt = seconds_since(t0);
    double worst = 0;
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
        double jeff = std::abs(effective_J(c.g * MHz, c.g * MHz, -c.delta * MHz, -c.delta * MHz));
        auto mm = sweep_spectrum(p, sel, linspace(0.80, 0.84, 161), linspace(w - 40 * MHz, w + 40 * MHz, 801), {0.2 * MHz});
        auto rr = find_avoided_crossing(mm);
        worst = std::max(worst, std::abs(rr.gap / 2 - jeff) / jeff);
    }
    bool ok = std::abs(r.flux_at_min_gap - 0.82) <= 0.02 && worst < 0.10 && dt < 300;
    report(3, "avoided crossing", ok,
           "flux_at_min_gap=" + fmt_fixed(r.flux_at_min_gap, 4) + " gap=" + fmt_fixed(r.gap / MHz, 3) + " MHz, worst |gap/2-J_eff|/J_eff=" +
               fmt_fixed(worst, 4) + " over 3 mediated cases, map runtime=" + fmt_fixed(dt, 2) + "s");
}

// ---------------------------------------------------------------- 4

void criterion4() {
    const double kappa = 1e6;
    const int dim = 3;
    ComplexMatrix a = destroy(dim);
    ComplexMatrix H(DenseMatrix::Zero(dim, dim));
    std::vector<ComplexMatrix> c = {std::sqrt(kappa) * a};
    QuantumState psi0 = QuantumState::basis(dim, 1);
    std::vector<Observable> obs = {{"n", a.adjoint() * a}};
    auto grid = linspace(0, 3.0 / kappa, 301);
    auto me = evolve_master(H, c, psi0, grid, obs);
    double worst = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) worst = std::max(worst, std::abs(me.expectation("n")[k].real() - std::exp(-kappa * grid[k])));
    double drift = me.max_trace_drift;

    auto g2 = linspace(0, 3.0 / kappa, 31);
    auto me2 = evolve_master(H, c, psi0, g2, obs);
    drift = std::max(drift, me2.max_trace_drift);
    auto tr = evolve_trajectories(H, c, psi0, g2, obs, 2000, 42, false);
    double worst_z = 0;
    for (std::size_t k = 1; k < g2.size(); ++k) {
        double se = tr.stderr_series[0][k].real();
        double d = std::abs(tr.mean.series[0][k].real() - me2.series[0][k].real());
        if (se > 0) worst_z = std::max(worst_z, d / se);
    }

    // dissipative multi-mode run from the device model
    DeviceParams p = preset("baseline");
    SubsystemSelector sel;
    sel.modes = {"int1", "res1", "tun"};
    NoiseParams n;
    auto H3 = build_hamiltonian(p, sel);
    auto c3 = build_collapse_ops(n, sel);
    auto me3 = evolve_master(H3, c3, QuantumState::basis(static_cast<int>(H3.rows()), 1), linspace(0, 200e-9, 201), {});
    drift = std::max(drift, me3.max_trace_drift);

    bool ok = worst < 1e-4 && worst_z <= 3.0 && drift < 1e-8;
    report(4, "dynamics oracles", ok,
           "max|<n>-exp(-kt)|=" + fmt_double(worst) + " trajectory max deviation=" + fmt_fixed(worst_z, 2) +
               " SE (2000 traj) max trace drift=" + fmt_double(drift));
}

// ---------------------------------------------------------------- 5

double trotter_error(const PauliHamiltonian& h, double t, int n) {
    DenseMatrix U = circuit_unitary(trotterize(h, t, n));
    DenseMatrix V = expm_unitary(ComplexMatrix(DenseMatrix(h.to_matrix())), t).to_dense();
    return op_norm(U - V);
}

void criterion5() {
    PauliHamiltonian ex(2);
    ex.add(5 * MHz, "XX");
    ex.add(5 * MHz, "YY");
    double e0 = trotter_error(ex, 50e-9, 64);
    PauliHamiltonian h(2);
    const double d = 30 * MHz, J = 10 * MHz;
    h.add(d / 2, "ZI");
    h.add(-d / 2, "IZ");
    h.add(0.3 * d, "ZZ");
    h.add(J / 2, "XX");
    h.add(J / 2, "YY");
    double e1 = trotter_error(h, 50e-9, 64), e2 = trotter_error(h, 50e-9, 128);
    bool ok = e0 < 1e-6 && e1 / e2 > 1.8 && e1 / e2 < 2.2;
    report(5, "Pauli/Trotter equivalence", ok,
           "exchange error(n=64)=" + fmt_double(e0) + " detuned error ratio n=64/n=128=" + fmt_fixed(e1 / e2, 4));
}

// ---------------------------------------------------------------- 6

void criterion6() {
    double worst = 0;
    bool all_one = true;
    for (int t = 0; t < 4; ++t) {
        GroverConfig c;
        c.target = basis_label(t);
        c.pair = {5.6 * GHz, 5.75 * GHz, 0.0, 0.7 * MHz};
        c.noise_scale = 0;
        auto r = run_noisy(c);
        DenseVector s = DenseVector::Constant(4, 0.5), psi = s;
        psi(t) = -psi(t);
        psi = 2.0 * s * s.dot(psi) - psi;
        DenseMatrix ref = psi * psi.adjoint();
        worst = std::max(worst, (r.rho - ref).cwiseAbs().maxCoeff());
        all_one = all_one && r.accuracy == 1.0;
    }
    report(6, "Grover noiseless exactness", all_one && worst < 1e-12,
           std::string(all_one ? "accuracy 1.0 for 00/01/10/11" : "accuracy below 1") + ", max |rho - oracle|=" + fmt_double(worst));
}

// ---------------------------------------------------------------- 7, 8

void criterion7() {
    auto t0 = std::chrono::steady_clock::now();
    NoiseParams n;
    auto cal = calibrate_noise(n);
    auto rows = reproduce_reference_pairs(n, cal, 2048, 20260101);
    double worst = 0;
    bool order = true;
    std::string detail;
    for (auto& r : rows) {
        worst = std::max(worst, std::abs(r.predicted - r.row.accuracy));
        detail += r.row.pair + "=" + fmt_fixed(100 * r.predicted, 2) + "% (ref " + fmt_fixed(100 * r.row.accuracy, 2) + "%) ";
        for (auto& b : rows)
            if (r.row.accuracy < b.row.accuracy && !(r.predicted < b.predicted)) order = false;
    }
    auto shots = shot_sweep(n, cal, {512, 1024, 2048, 4096}, 20260101);
    double lo = 1, hi = 0;
    for (auto& s : shots) lo = std::min(lo, s.accuracy), hi = std::max(hi, s.accuracy);
    double dt = seconds_since(t0);
    bool ok = worst <= 0.03 && order && hi - lo < 0.01 && dt < 600;
    report(7, "Grover calibrated reproduction", ok,
           detail + "max dev=" + fmt_fixed(100 * worst, 2) + "pp, ordering " + (order ? "preserved" : "BROKEN") + ", shot spread=" +
               fmt_fixed(100 * (hi - lo), 3) + "pp, runtime=" + fmt_fixed(dt, 2) + "s");
}

void criterion8() {
    NoiseParams n;
    auto cal = calibrate_noise(n);
    GroverConfig base;
    base.noise_scale = cal.noise_scale;
    base.readout_error = cal.readout_error;
    base.pair = pair_params(effective_two_qubit(preset("optimized"), kAnchorPair, calibrate_zeta_scale()));
    std::vector<double> zs, js;
    for (int i = 0; i < 8; ++i) zs.push_back((0.1 + 0.2 * i) * MHz);
    for (int j = 0; j < 5; ++j) js.push_back(2.0 * j * MHz);
    auto s = sweep_zeta_j12(base, zs, js);
    const double sigma = std::sqrt(0.25 / static_cast<double>(base.n_shots));
    bool mono = true;
    for (std::size_t j = 0; j < js.size(); ++j)
        for (std::size_t i = 1; i < zs.size(); ++i) mono = mono && s.accuracy(i, j) >= s.accuracy(i - 1, j) - 2 * sigma;
    // "adequate" zeta: the CZ fits well inside the coherence window (zeta >= 0.5 MHz)
    double zeta_range = s.accuracy.col(0).maxCoeff() - s.accuracy.col(0).minCoeff();
    bool dom = true;
    double worst_j = 0;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        if (zs[i] < 0.5 * MHz) continue;
        double jr = s.accuracy.row(i).maxCoeff() - s.accuracy.row(i).minCoeff();
        worst_j = std::max(worst_j, jr);
        dom = dom && jr < zeta_range;
    }
    auto fl = linspace(0.6, 1.1, 51);
    auto f = sweep_zeta_flux(base, preset("optimized"), kAnchorPair, {0.3 * MHz, 0.7097 * MHz, 1.2 * MHz}, fl, true);
    bool peak = true;
    std::string peaks;
    for (Eigen::Index i = 0; i < f.accuracy.rows(); ++i) {
        Eigen::Index best = -1;
        for (Eigen::Index j = 0; j < f.accuracy.cols(); ++j)
            if (std::isfinite(f.accuracy(i, j)) && (best < 0 || f.accuracy(i, j) > f.accuracy(i, best))) best = j;
        peak = peak && best >= 0 && std::abs(fl[best] - 0.8) <= 0.05 + 1e-12;
        peaks += (i ? "," : "") + (best >= 0 ? fmt_fixed(fl[best], 2) : std::string("none"));
    }
    report(8, "Grover sweep trends", mono && dom && peak,
           std::string("zeta-monotone ") + (mono ? "yes" : "NO") + ", zeta range=" + fmt_fixed(100 * zeta_range, 2) + "pp vs max J12 range=" +
               fmt_fixed(100 * worst_j, 2) + "pp, flux peaks at " + peaks);
}

// ---------------------------------------------------------------- 9

void criterion9() {
    // gradient check on a tiny graph network
    Architecture a;
    a.embed = 2;
    a.hidden = {3};
    SurrogateModel tiny(a, 11);
    Rng rng(4);
    Eigen::MatrixXd X(34, 5);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = uniform01(rng);
    Eigen::VectorXd s = Eigen::VectorXd::LinSpaced(5, 0.15, 0.85), grad;
    tiny.loss_and_grad(X, s, &grad);
    double worst = 0;
    for (std::size_t i = 0; i < tiny.n_params(); ++i) {
        double w0 = tiny.params()(i), h = 1e-6;
        tiny.params()(i) = w0 + h;
        double up = tiny.loss_and_grad(X, s, nullptr);
        tiny.params()(i) = w0 - h;
        double dn = tiny.loss_and_grad(X, s, nullptr);
        tiny.params()(i) = w0;
        double fd = (up - dn) / (2 * h);
        worst = std::max(worst, std::abs(grad(i) - fd) / std::max(1e-7, std::abs(grad(i)) + std::abs(fd)));
    }

    // synthetic smooth quadratic
    ParamDataset d;
    d.space = ParamSpace::around(preset("baseline"), 0.2);
    const int n = 3000;
    d.X.resize(34, n);
    for (Eigen::Index i = 0; i < d.X.size(); ++i) d.X.data()[i] = uniform01(rng);
    d.F.resize(n);
    for (int j = 0; j < n; ++j) {
        auto x = d.X.col(j);
        d.F(j) = 0.3 + 0.4 * (1 - 1.5 * std::pow(x(0) - 0.3, 2) - std::pow(x(5) - 0.6, 2) - 0.8 * std::pow(x(33) - 0.5, 2)) + 0.1 * x(12);
    }
    SurrogateModel m({}, 2);
    TrainOptions o;
    o.epochs = 200;
    double r2 = train(m, d, o).val_r2;

    // full pipeline through the CLI
    auto t0 = std::chrono::steady_clock::now();
    fs::path base = scratch() / "c9";
    std::string ds = (base / "data").string(), tr = (base / "model").string(), op = (base / "opt").string();
    int rc = cli("gen-dataset --out \"" + ds + "\"");
    if (rc == 0) rc = cli("train --dataset \"" + ds + "/dataset.csv\" --out \"" + tr + "\"");
    if (rc == 0) rc = cli("optimize --model \"" + tr + "/surrogate.weights\" --box \"" + ds + "/dataset_box.csv\" --out \"" + op + "\"");
    double dt = seconds_since(t0);
    json res = metadata(op).value("results", json::object());
    double f0 = res.value("start_fidelity", 0.0), f1 = res.value("fidelity", 0.0);
    std::string prov = res.value("fidelity_provenance", std::string("?"));
    double pr2 = metadata(tr).value("results", json::object()).value("val_r2", 0.0);
    bool ok = worst < 1e-5 && r2 > 0.95 && rc == 0 && f1 - f0 >= 0.001 && prov == "simulator";
    report(9, "surrogate quality", ok,
           "grad check max rel err=" + fmt_double(worst) + ", synthetic R2=" + fmt_fixed(r2, 4) + ", pipeline (2000 samples, val R2=" +
               fmt_fixed(pr2, 4) + "): baseline F=" + f6(f0) + " -> optimized F=" + f6(f1) + " (+" + f6(f1 - f0) + ", provenance " + prov +
               "), runtime=" + fmt_fixed(dt, 1) + "s");
}

// ---------------------------------------------------------------- 10

void criterion10() {
    double cs = total_capacitance(200 * MHz) / fF;
    double ratio = std::sqrt(2.37e3 / 3.35e6);  // back-solved g/Delta
    double gp = purcell_rate(ratio, 1.0, 3.35 * MHz) / kHz;
    fs::path out = scratch() / "c10";
    int rc = cli("translate --preset optimized --out \"" + out.string() + "\"");
    std::ifstream in(out / "hardware_report.txt");
    std::stringstream ss;
    ss << in.rdbuf();
    bool note = ss.str().find(kResonatorLengthNote) != std::string::npos;
    double cli_cs = metadata(out).value("results", json::object()).value("total_capacitance_fF", 0.0);
    bool ok = rc == 0 && std::abs(cs - 96.85) <= 0.2 && std::abs(cli_cs - 96.85) <= 0.2 && std::abs(gp - 2.37) < 0.005 && note;
    report(10, "hardware translation", ok,
           "C_sigma=" + fmt_fixed(cs, 3) + " fF (CLI " + fmt_fixed(cli_cs, 3) + "), g/Delta=" + fmt_fixed(ratio, 5) + " -> Gamma_p/2pi=" +
               fmt_fixed(gp, 4) + " kHz, resonator-length note " + (note ? "present" : "MISSING"));
}

// ---------------------------------------------------------------- 11

std::map<std::string, std::uint64_t> csv_hashes(const fs::path& dir) {
    std::map<std::string, std::uint64_t> h;
    if (!fs::exists(dir)) return h;
    for (auto& e : fs::directory_iterator(dir)) {
        auto ext = e.path().extension();
        if (ext != ".csv" && ext != ".weights" && ext != ".cfg") continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        h[e.path().filename().string()] = fnv1a64(ss.str());
    }
    return h;
}

void criterion11() {
    fs::path base = scratch() / "c11";
    struct Run {
        std::string name, args;
    };
    const std::string ds = (base / "a_gen-dataset").string();
    const std::string model = (base / "a_train").string();
    std::vector<Run> runs = {
        {"spectroscopy", "spectroscopy --set flux_points=41 --set probe_points=61"},
        {"fidelity-snr", "fidelity-snr --set shots=20000"},
        {"iq-clouds", "iq-clouds --flux 0.70"},
        {"gen-dataset", "gen-dataset --n 200"},
        {"train", "train --dataset \"" + ds + "/dataset.csv\" --set epochs=20"},
        {"optimize", "optimize --model \"" + model + "/surrogate.weights\" --box \"" + ds + "/dataset_box.csv\" --set steps=200"},
        {"grover", "grover --pair int1-res-tun --shots 2048 --set sampling=iid"},
        {"grover-pairs", "grover --mode pairs"},
        {"grover-shots", "grover --mode shots --set sampling=iid"},
        {"grover-sweep", "grover-sweep --surface zeta-flux --set sampling=iid"},
        {"translate", "translate --preset optimized"},
    };
    std::string bad;
    int files = 0;
    for (auto& r : runs) {
        std::map<std::string, std::uint64_t> h[2];
        for (int k = 0; k < 2; ++k) {
            fs::path out = base / (std::string(k ? "b_" : "a_") + r.name);
            int rc = cli(r.args + " --seed 77 --out \"" + out.string() + "\"");
            if (rc != 0) bad += r.name + "(exit) ";
            h[k] = csv_hashes(out);
        }
        if (h[0].empty() || h[0] != h[1]) bad += r.name + " ";
        files += static_cast<int>(h[0].size());
    }
    report(11, "CLI byte-determinism", bad.empty(),
           bad.empty() ? std::to_string(runs.size()) + " runs, " + std::to_string(files) + " output files identical across repeats"
                       : "mismatch: " + bad);
}

}  // namespace

int main() {
    std::cout << "qchip acceptance" << std::endl;
    guarded(1, "analytic fidelity anchor", criterion1);
    guarded(2, "fidelity vs kappa_SNR shape", criterion2);
    guarded(3, "avoided crossing", criterion3);
    guarded(4, "dynamics oracles", criterion4);
    guarded(5, "Pauli/Trotter equivalence", criterion5);
    guarded(6, "Grover noiseless exactness", criterion6);
    guarded(7, "Grover calibrated reproduction", criterion7);
    guarded(8, "Grover sweep trends", criterion8);
    guarded(9, "surrogate quality", criterion9);
    guarded(10, "hardware translation", criterion10);
    guarded(11, "CLI byte-determinism", criterion11);
    std::error_code ec;
    fs::remove_all(scratch(), ec);
    std::cout << (failures ? "acceptance: " + std::to_string(failures) + " criteria failed" : std::string("acceptance: all criteria passed")) << std::endl;
    return failures ? 1 : 0;
}

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


// qchip command-line driver. Every subcommand writes CSV (plus SVG with --svg),
// config.resolved.txt and metadata.json into --out.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "qchip/config.hpp"
#include "qchip/grover.hpp"
#include "qchip/hardware.hpp"
#include "qchip/readout.hpp"
#include "qchip/spectroscopy.hpp"
#include "qchip/surrogate.hpp"
#include "qchip/svg.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace qchip;

namespace {

constexpr std::uint64_t kDefaultSeed = 20260101;

struct Common {
    std::string config;
    std::string out;
    std::uint64_t seed = kDefaultSeed;
    std::vector<std::string> sets;
    bool svg = false;
};

KeyValues parse_sets(const std::vector<std::string>& sets) {
    KeyValues kv;
    for (auto& s : sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos || trim(s.substr(0, eq)).empty()) throw Error(Errc::parse_error, "--set expects key=value, got '" + s + "'");
        kv.set(s.substr(0, eq), s.substr(eq + 1));
    }
    return kv;
}

// One run of one subcommand: resolved config, tracked outputs, metadata.
class Job {
public:
    ResolvedConfig rc;
    json results = json::object();
    bool svg = false;
    std::uint64_t seed = 0;

    Job(std::string sub, const Common& c, const std::vector<std::string>& argv, std::string default_preset, const KeyValues& defaults,
        const KeyValues& flags, std::set<std::string> known)
        : sub_(std::move(sub)), argv_(argv), known_(std::move(known)) {
        svg = c.svg;
        seed = c.seed;
        config_ = c.config;
        if (c.out.empty()) throw Error(Errc::invalid_argument, "--out is required");
        out_ = c.out;
        KeyValues file = defaults;
        if (!c.config.empty())
            for (auto& e : load_config_file(c.config).entries) file.set(e.first, e.second);
        KeyValues ov = parse_sets(c.sets);
        for (auto& e : flags.entries) ov.set(e.first, e.second);
        rc = resolve_config(default_preset, file, ov);
        for (auto& [k, v] : rc.extra.entries)
            if (!known_.count(k)) throw Error(Errc::parse_error, "unknown key '" + k + "' for " + sub_);
        std::error_code ec;
        if (!fs::exists(out_)) {
            fs::create_directories(out_, ec);
            if (ec) throw Error(Errc::io_error, "cannot create output directory " + out_.string());
            created_dir_ = true;
        }
        if (!fs::is_directory(out_)) throw Error(Errc::io_error, out_.string() + " is not a directory");
    }

    double num(const std::string& k, double d) const { return get_double(rc.extra, k, d); }
    std::size_t count(const std::string& k, std::size_t d) const {
        double v = num(k, static_cast<double>(d));
        if (!(v >= 0) || v != std::floor(v)) throw Error(Errc::parse_error, k + " must be a nonnegative integer");
        return static_cast<std::size_t>(v);
    }
    std::string str(const std::string& k, const std::string& d) const { return rc.extra.has(k) ? rc.extra.get(k) : d; }
    std::vector<double> list(const std::string& k) const { return parse_values(rc.extra.get(k)); }
    bool has(const std::string& k) const { return rc.extra.has(k); }

    void write(const std::string& name, const std::function<void(std::ostream&)>& fn) {
        fs::path p = out_ / name;
        files_.push_back(p);
        std::ofstream os(p, std::ios::binary);
        if (!os) throw Error(Errc::io_error, "cannot write " + p.string());
        fn(os);
        if (!os) throw Error(Errc::io_error, "write failed for " + p.string());
        outputs_.push_back(name);
    }

    void write_svg(const std::string& name, const std::function<void(std::ostream&)>& fn) {
        if (svg) write(name, fn);
    }

    void finish() {
        std::string resolved = "preset = " + rc.preset_name + "\n" + serialize_device(rc.device, rc.noise);
        std::vector<std::string> seen;
        for (auto it = rc.extra.entries.rbegin(); it != rc.extra.entries.rend(); ++it)
            if (std::find(seen.begin(), seen.end(), it->first) == seen.end()) seen.push_back(it->first);
        std::sort(seen.begin(), seen.end());
        for (auto& k : seen) resolved += k + " = " + rc.extra.get(k) + "\n";
        write("config.resolved.txt", [&](std::ostream& os) { os << resolved; });
        json m;
        m["tool"] = "qchip";
        m["format"] = 1;
        m["subcommand"] = sub_;
        m["seed"] = seed;
        m["preset"] = rc.preset_name;
        m["config_file"] = config_;
        m["argv"] = argv_;
        m["resolve_log"] = rc.log;
        m["resolved_config"] = "config.resolved.txt";
        m["rerun"] = "qchip " + sub_ + " --config config.resolved.txt --seed " + std::to_string(seed) + " --out <dir>";
        m["outputs"] = outputs_;
        m["results"] = results;
        write("metadata.json", [&](std::ostream& os) { os << m.dump(2) << "\n"; });
    }

    void cleanup() noexcept {
        std::error_code ec;
        for (auto& f : files_) fs::remove(f, ec);
        if (created_dir_ && fs::is_empty(out_, ec)) fs::remove(out_, ec);
    }

private:
    std::string sub_, config_;
    std::vector<std::string> argv_;
    std::set<std::string> known_;
    fs::path out_;
    bool created_dir_ = false;
    std::vector<fs::path> files_;
    std::vector<std::string> outputs_;
};

const std::set<std::string> kReadoutKeys = {"T_int", "resonator_dim", "n_grid", "channel", "calibration_flux", "calibration_preset"};

std::set<std::string> with_readout(std::set<std::string> s) {
    s.insert(kReadoutKeys.begin(), kReadoutKeys.end());
    return s;
}

ReadoutSettings readout_settings(const Job& j) {
    ReadoutSettings s;
    s.T_int = j.num("T_int", s.T_int);
    s.resonator_dim = static_cast<int>(j.count("resonator_dim", static_cast<std::size_t>(s.resonator_dim)));
    s.n_grid = j.count("n_grid", s.n_grid);
    s.channel = static_cast<int>(j.count("channel", static_cast<std::size_t>(s.channel)));
    s.calibration_flux = j.num("calibration_flux", s.calibration_flux);
    s.calibration_preset = j.str("calibration_preset", s.calibration_preset);
    if (s.channel > 3) throw Error(Errc::invalid_argument, "channel must be 0..3");
    if (s.n_grid < 2 || !(s.T_int > 0)) throw Error(Errc::invalid_argument, "readout grid needs T_int > 0 and n_grid >= 2");
    return s;
}

json readout_json(const ReadoutSettings& s) {
    return {{"T_int_s", s.T_int},         {"resonator_dim", s.resonator_dim},          {"n_grid", s.n_grid},
            {"channel", s.channel},       {"calibration_flux", s.calibration_flux}, {"calibration_preset", s.calibration_preset}};
}

std::vector<double> grid(const Job& j, const std::string& name, double lo, double hi, std::size_t n) {
    double a = j.num(name + "_min", lo), b = j.num(name + "_max", hi);
    std::size_t k = j.count(name + "_points", n);
    if (k < 1 || (k > 1 && !(b > a))) throw Error(Errc::invalid_argument, name + " grid needs max > min and points >= 1");
    return k == 1 ? std::vector<double>{a} : linspace(a, b, k);
}

std::set<std::string> grid_keys(std::set<std::string> s, std::initializer_list<const char*> names) {
    for (auto n : names)
        for (auto suf : {"_min", "_max", "_points"}) s.insert(std::string(n) + suf);
    return s;
}

// ---------------------------------------------------------------- subcommands

void run_spectroscopy(Job& j) {
    SubsystemSelector sel = default_spectroscopy_selector();
    if (j.has("modes")) {
        sel.modes.clear();
        std::stringstream ss(j.str("modes", ""));
        std::string m;
        while (std::getline(ss, m, ',')) sel.modes.push_back(trim(m));
    }
    SpectroscopyOptions opt;
    opt.width = j.num("width", opt.width);
    auto flux = grid(j, "flux", 0.6, 1.1, 101);
    auto probe = grid(j, "probe", 5.0 * GHz, 6.2 * GHz, 121);
    auto map = sweep_spectrum(j.rc.device, sel, flux, probe, opt);
    auto rep = find_avoided_crossing(map);
    j.write("spectroscopy.csv", [&](std::ostream& os) { map.write_csv(os); });
    j.write("crossing.txt", [&](std::ostream& os) { rep.write(os); });
    j.write_svg("spectroscopy.svg", [&](std::ostream& os) {
        std::vector<double> ghz;
        for (double p : probe) ghz.push_back(p / GHz);
        svg::heatmap(os, flux, ghz, map.intensity, "transition spectrum", "flux / flux quantum", "probe (GHz)");
    });
    j.results["flux_at_min_gap"] = rep.flux_at_min_gap;
    j.results["gap_MHz"] = rep.gap / MHz;
    j.results["below_broadening_floor"] = rep.below_floor;
    j.results["width_MHz"] = opt.width / MHz;
    j.results["grid"] = {flux.size(), probe.size()};
}

void run_fidelity_snr(Job& j) {
    auto s = readout_settings(j);
    std::vector<double> kappas;
    if (j.has("kappas")) {
        kappas = j.list("kappas");
    } else {
        double kmax = j.num("kappa_max", 0.6);
        std::size_t n = j.count("kappa_points", 30);
        for (std::size_t i = 1; i <= n; ++i) kappas.push_back(kmax * static_cast<double>(i) / static_cast<double>(n));
    }
    std::size_t shots = j.count("shots", 100000);
    double ref = reference_separation(j.rc.noise, s);
    auto iq = simulate_iq(j.rc.device, j.rc.noise, s);
    auto curve = fidelity_vs_snr(iq, ref, kappas, shots, j.seed);
    j.write("fidelity_snr.csv", [&](std::ostream& os) { write_fidelity_csv(os, curve); });
    j.write_svg("fidelity_snr.svg", [&](std::ostream& os) {
        svg::Series a{"analytic", {}, {}, "#1f77b4", false}, e{"empirical", {}, {}, "#d62728", true};
        for (auto& p : curve) {
            a.x.push_back(p.kappa), a.y.push_back(p.analytic);
            e.x.push_back(p.kappa), e.y.push_back(p.empirical);
        }
        svg::plot(os, {a, e}, "readout fidelity vs noise", "kappa_SNR", "fidelity");
    });
    j.results["readout"] = readout_json(s);
    j.results["shots"] = shots;
    j.results["reference_separation"] = ref;
    j.results["separation"] = iq.separation();
    const double kr = j.num("kappa_report", 0.2);
    for (auto& p : curve)
        if (std::abs(p.kappa - kr) < 1e-12) j.results["at_kappa"] = {{"kappa", p.kappa}, {"analytic", p.analytic}, {"empirical", p.empirical}, {"stderr", p.stderr}};
}

void run_iq_clouds(Job& j) {
    auto s = readout_settings(j);
    const double kappa = j.num("kappa_snr", 0.2);
    const std::size_t shots = j.count("shots", 1500);
    const std::string mode = j.str("iq_mode", "mean");
    double ref = reference_separation(j.rc.noise, s);
    ShotCloud cloud;
    if (mode == "mean")
        cloud = sample_shots(simulate_iq(j.rc.device, j.rc.noise, s), kappa, shots, j.seed, ref);
    else if (mode == "trajectories")
        cloud = sample_shots_trajectories(j.rc.device, j.rc.noise, s, kappa, shots, j.seed, ref);
    else
        throw Error(Errc::invalid_argument, "iq_mode must be mean or trajectories");
    auto f = classify_and_score(cloud);
    j.write("iq_clouds.csv", [&](std::ostream& os) { cloud.write_csv(os); });
    j.write_svg("iq_clouds.svg", [&](std::ostream& os) {
        svg::Series a{"|0>", {}, {}, "#1f77b4", true}, b{"|1>", {}, {}, "#d62728", true};
        for (auto& p : cloud.shots0) a.x.push_back(p.I), a.y.push_back(p.Q);
        for (auto& p : cloud.shots1) b.x.push_back(p.I), b.y.push_back(p.Q);
        svg::plot(os, {a, b}, "integrated I/Q shots", "I", "Q");
    });
    j.results["readout"] = readout_json(s);
    j.results["iq_mode"] = mode;
    j.results["flux"] = j.rc.device.flux;
    j.results["kappa_snr"] = kappa;
    j.results["sigma"] = cloud.sigma;
    j.results["mu0"] = {cloud.means.mu0.I, cloud.means.mu0.Q};
    j.results["mu1"] = {cloud.means.mu1.I, cloud.means.mu1.Q};
    j.results["fidelity"] = {{"analytic", f.analytic}, {"empirical", f.empirical}, {"stderr", f.stderr}, {"shots", f.shots}};
}

ParamSpace box_space(const Job& j) {
    double frac = j.num("box", 0.2);
    std::string mode = j.str("box_mode", "narrow");
    if (mode != "narrow" && mode != "wide") throw Error(Errc::invalid_argument, "box_mode must be narrow or wide");
    return ParamSpace::around(j.rc.device, frac, mode == "wide");
}

void run_gen_dataset(Job& j) {
    auto s = readout_settings(j);
    const double kappa = j.num("kappa_snr", 0.2);
    const std::size_t n = j.count("n", 2000);
    auto space = box_space(j);
    const double ref = reference_separation(j.rc.noise, s);
    const NoiseParams noise = j.rc.noise;
    auto ds = generate_dataset(space, n, [&](const DeviceParams& p) { return readout_fidelity(p, noise, s, kappa, ref); }, j.seed);
    j.write("dataset.csv", [&](std::ostream& os) { ds.write_csv(os); });
    j.write("dataset_box.csv", [&](std::ostream& os) { space.write_box_csv(os); });
    j.write("skipped.txt", [&](std::ostream& os) {
        for (auto& l : ds.skipped) os << l << "\n";
    });
    j.write_svg("dataset.svg", [&](std::ostream& os) {
        svg::Series h{"F", {}, {}, "#1f77b4", true};
        for (std::size_t i = 0; i < ds.size(); ++i) h.x.push_back(static_cast<double>(i)), h.y.push_back(ds.F(static_cast<Eigen::Index>(i)));
        svg::plot(os, {h}, "dataset fidelities", "sample", "F");
    });
    j.results["provenance"] = {{"evaluator", "analytic separation fidelity"}, {"kappa_snr", kappa}, {"reference_separation", ref},
                               {"readout", readout_json(s)}, {"seed", j.seed}, {"box_fraction", j.num("box", 0.2)},
                               {"box_mode", j.str("box_mode", "narrow")}};
    j.results["requested"] = n;
    j.results["samples"] = ds.size();
    j.results["skipped"] = ds.skipped.size();
    j.results["F_min"] = ds.F.minCoeff();
    j.results["F_max"] = ds.F.maxCoeff();
}

ParamSpace load_box(const Job& j, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot read box file " + path);
    return ParamSpace::from_dims(j.rc.device, ParamSpace::read_box_csv(in));
}

OptimizerConfig optimizer_config(const Job& j) {
    OptimizerConfig c;
    c.kind = optimizer_kind(j.str("optimizer", "adam"));
    if (j.has("lr")) c.lr = j.num("lr", 0);
    return c;
}

void run_train(Job& j, const std::string& dataset, std::string box) {
    if (dataset.empty()) throw Error(Errc::invalid_argument, "--dataset is required");
    std::ifstream in(dataset);
    if (!in) throw Error(Errc::io_error, "cannot read dataset " + dataset);
    if (box.empty()) box = (fs::path(dataset).parent_path() / "dataset_box.csv").string();
    auto space = load_box(j, box);
    auto ds = ParamDataset::read_csv(in, space);
    Architecture a;
    std::string arch = j.str("arch", "graph");
    if (arch != "graph" && arch != "mlp") throw Error(Errc::invalid_argument, "arch must be graph or mlp");
    a.graph = arch == "graph";
    a.in_dim = static_cast<int>(space.size());
    a.embed = static_cast<int>(j.count("embed", 8));
    SurrogateModel m(a, derive_seed(j.seed, 100));
    TrainOptions o;
    o.opt = optimizer_config(j);
    o.epochs = static_cast<int>(j.count("epochs", 500));
    o.batch = static_cast<int>(j.count("batch", 64));
    o.val_fraction = j.num("val_fraction", 0.2);
    o.seed = j.seed;
    auto r = train(m, ds, o);
    j.write("surrogate.weights", [&](std::ostream& os) { m.save(os); });
    j.write("loss.csv", [&](std::ostream& os) { write_loss_csv(os, r.curve); });
    j.write_svg("loss.svg", [&](std::ostream& os) {
        svg::Series t{"train", {}, {}, "#1f77b4", false}, v{"validation", {}, {}, "#d62728", false};
        for (auto& p : r.curve) {
            t.x.push_back(p.epoch), t.y.push_back(std::log10(p.train));
            v.x.push_back(p.epoch), v.y.push_back(std::log10(p.val));
        }
        svg::plot(os, {t, v}, "training loss", "epoch", "log10 MSE (scaled)");
    });
    j.results["dataset"] = dataset;
    j.results["box"] = box;
    j.results["architecture"] = a.describe();
    j.results["parameters"] = m.n_params();
    j.results["optimizer"] = optimizer_name(o.opt.kind);
    j.results["learning_rate"] = o.opt.learning_rate();
    j.results["epochs"] = o.epochs;
    j.results["batch"] = o.batch;
    j.results["train_samples"] = r.train_idx.size();
    j.results["val_samples"] = r.val_idx.size();
    j.results["final_train_loss"] = r.curve.back().train;
    j.results["final_val_loss"] = r.curve.back().val;
    j.results["val_r2"] = r.val_r2;
}

void run_optimize(Job& j, const std::string& model_path, const std::string& box) {
    if (model_path.empty() || box.empty()) throw Error(Errc::invalid_argument, "--model and --box are required");
    auto space = load_box(j, box);
    std::ifstream in(model_path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot read weights " + model_path);
    auto model = SurrogateModel::load(in);
    if (static_cast<std::size_t>(model.arch().in_dim) != space.size()) throw Error(Errc::dimension_mismatch, "model and box dimensions differ");
    auto s = readout_settings(j);
    const double kappa = j.num("kappa_snr", 0.2);
    const double ref = reference_separation(j.rc.noise, s);
    const NoiseParams noise = j.rc.noise;
    auto sim = [&](const Eigen::VectorXd& x) { return readout_fidelity(space.to_params(x), noise, s, kappa, ref); };
    OptimizeOptions o;
    o.opt = optimizer_config(j);
    o.steps = static_cast<int>(j.count("steps", 1000));
    o.reeval_every = static_cast<int>(j.count("reeval_every", 50));
    Eigen::VectorXd start = space.normalize(j.rc.device);
    auto r = optimize(model, start, sim, o);
    DeviceParams best = space.to_params(r.theta_opt);
    j.write("trace.csv", [&](std::ostream& os) { write_trace_csv(os, r.trace); });
    j.write("theta_opt.csv", [&](std::ostream& os) {
        os << "name,normalized,value\n";
        Eigen::VectorXd phys = r.theta_opt;
        for (std::size_t i = 0; i < space.size(); ++i) {
            const auto& d = space.dims()[i];
            os << d.name << "," << fmt_double(r.theta_opt(i)) << "," << fmt_double(d.lo + r.theta_opt(i) * (d.hi - d.lo)) << "\n";
        }
    });
    j.write("optimized.cfg", [&](std::ostream& os) { os << serialize_device(best, noise); });
    j.write_svg("trace.svg", [&](std::ostream& os) {
        svg::Series p{"surrogate", {}, {}, "#1f77b4", false}, q{"simulator", {}, {}, "#d62728", true};
        for (auto& t : r.trace) {
            p.x.push_back(t.step), p.y.push_back(t.predicted);
            if (std::isfinite(t.simulated)) q.x.push_back(t.step), q.y.push_back(t.simulated);
        }
        svg::plot(os, {p, q}, "surrogate-guided ascent", "step", "fidelity");
    });
    // shot-sampled check of start and result
    const std::size_t vs = j.count("verify_shots", 800);
    json verify = json::object();
    if (vs > 0) {
        auto check = [&](const DeviceParams& p, std::uint64_t sd) {
            auto f = classify_and_score(sample_shots(simulate_iq(p, noise, s), kappa, vs, sd, ref));
            return json{{"empirical", f.empirical}, {"stderr", f.stderr}};
        };
        verify["shots"] = vs;
        verify["start"] = check(space.to_params(start), derive_seed(j.seed, 1));
        verify["optimized"] = check(best, derive_seed(j.seed, 2));
    }
    j.results["model"] = model_path;
    j.results["box"] = box;
    j.results["optimizer"] = optimizer_name(o.opt.kind);
    j.results["steps"] = o.steps;
    j.results["reeval_every"] = o.reeval_every;
    j.results["kappa_snr"] = kappa;
    j.results["start_fidelity"] = r.start_fidelity;
    j.results["fidelity"] = r.fidelity;
    j.results["improvement"] = r.fidelity - r.start_fidelity;
    j.results["fidelity_provenance"] = r.provenance;
    j.results["no_improvement"] = r.no_improvement;
    j.results["best_step"] = r.best_step;
    j.results["simulator_failures"] = r.failures;
    j.results["verification"] = verify;
}

Sampling sampling_mode(const Job& j) {
    std::string m = j.str("sampling", "systematic");
    if (m == "systematic") return Sampling::systematic;
    if (m == "iid") return Sampling::iid;
    throw Error(Errc::invalid_argument, "sampling must be systematic or iid");
}

json calibration_json(const GroverCalibration& c) {
    return {{"noise_scale", c.noise_scale}, {"readout_error", c.readout_error}, {"anchor_expected", c.anchor_expected}, {"anchor_target", kAnchorAccuracy}};
}

void run_grover(Job& j) {
    ReadoutErrorModel rm;
    rm.kappa_snr = j.num("calib_kappa_snr", rm.kappa_snr);
    auto cal = calibrate_noise(j.rc.noise, kAnchorAccuracy, rm);
    const std::size_t shots = j.count("shots", 2048);
    const std::string mode = j.str("mode", "single");
    j.results["calibration"] = calibration_json(cal);
    j.results["shots"] = shots;
    if (mode == "pairs") {
        auto rows = reproduce_reference_pairs(j.rc.noise, cal, shots, j.seed, j.rc.device);
        j.write("pair_accuracy.csv", [&](std::ostream& os) {
            os << "pair,zeta_MHz,reference,predicted,expected,device_zeta_MHz,device_J12_MHz\n";
            for (auto& r : rows)
                os << r.row.pair << "," << fmt_double(r.row.zeta / MHz) << "," << fmt_double(r.row.accuracy) << "," << fmt_double(r.predicted) << ","
                   << fmt_double(r.expected) << "," << fmt_double(r.device_zeta / MHz) << "," << fmt_double(r.device_J12 / MHz) << "\n";
        });
        j.write_svg("pair_accuracy.svg", [&](std::ostream& os) {
            svg::Series p{"predicted", {}, {}, "#1f77b4", true}, q{"reference", {}, {}, "#d62728", true};
            for (auto& r : rows) {
                p.x.push_back(r.row.zeta / MHz), p.y.push_back(r.predicted);
                q.x.push_back(r.row.zeta / MHz), q.y.push_back(r.row.accuracy);
            }
            svg::plot(os, {p, q}, "Grover accuracy by pair", "zeta (MHz)", "accuracy");
        });
        json arr = json::array();
        for (auto& r : rows) arr.push_back({{"pair", r.row.pair}, {"reference", r.row.accuracy}, {"predicted", r.predicted}, {"expected", r.expected}});
        j.results["rows"] = arr;
        return;
    }
    if (mode == "shots") {
        std::vector<std::size_t> list = {512, 1024, 2048, 4096};
        if (j.has("shot_list")) {
            list.clear();
            for (double v : j.list("shot_list")) list.push_back(static_cast<std::size_t>(v));
        }
        auto pts = shot_sweep(j.rc.noise, cal, list, j.seed, sampling_mode(j));
        j.write("shot_sweep.csv", [&](std::ostream& os) {
            os << "shots,accuracy\n";
            for (auto& p : pts) os << p.shots << "," << fmt_double(p.accuracy) << "\n";
        });
        j.write_svg("shot_sweep.svg", [&](std::ostream& os) {
            svg::Series s{"accuracy", {}, {}, "#1f77b4", true};
            for (auto& p : pts) s.x.push_back(static_cast<double>(p.shots)), s.y.push_back(p.accuracy);
            svg::plot(os, {s}, "accuracy vs shots", "shots", "accuracy");
        });
        double lo = 1, hi = 0;
        for (auto& p : pts) lo = std::min(lo, p.accuracy), hi = std::max(hi, p.accuracy);
        j.results["spread"] = hi - lo;
        j.results["sampling"] = j.str("sampling", "systematic");
        return;
    }
    if (mode != "single") throw Error(Errc::invalid_argument, "mode must be single, pairs or shots");

    const std::string pair = j.str("pair", kAnchorPair);
    const std::string source = j.str("pair_source", "device");
    PairParams pp;
    if (source == "device") {
        pp = pair_params(effective_two_qubit(j.rc.device, pair, calibrate_zeta_scale()));
    } else if (source == "reference") {
        bool found = false;
        for (auto& r : reference_pairs())
            if (r.pair == pair) pp.zeta = r.zeta, found = true;
        if (!found) throw Error(Errc::invalid_argument, "no reference row for pair " + pair);
    } else {
        throw Error(Errc::invalid_argument, "pair_source must be device or reference");
    }
    pp.zeta = j.num("zeta", pp.zeta);
    pp.J12 = j.num("J12", pp.J12);
    GroverConfig c;
    c.target = j.str("target", "11");
    c.pair = pp;
    c.noise = j.rc.noise;
    c.noise_scale = cal.noise_scale;
    c.readout_error = cal.readout_error;
    c.n_shots = shots;
    c.seed = j.seed;
    c.sampling = sampling_mode(j);
    auto r = run_noisy(c);
    j.write("counts.csv", [&](std::ostream& os) { r.write_counts_csv(os); });
    j.write("schedule.txt", [&](std::ostream& os) { os << r.schedule.serialize(); });
    j.write_svg("counts.svg", [&](std::ostream& os) {
        svg::Series s{"counts", {}, {}, "#1f77b4", true};
        int k = 0;
        for (auto& [o, n] : r.counts) s.x.push_back(k++), s.y.push_back(static_cast<double>(n));
        svg::plot(os, {s}, "outcomes (00, 01, 10, 11)", "outcome index", "count");
    });
    j.results["pair"] = pair;
    j.results["pair_source"] = source;
    j.results["target"] = c.target;
    j.results["pair_params"] = {{"w1", pp.w1}, {"w2", pp.w2}, {"J12", pp.J12}, {"zeta", pp.zeta}};
    j.results["accuracy"] = r.accuracy;
    j.results["expected_accuracy"] = r.expected_accuracy;
    j.results["t_cz_s"] = r.t_cz;
    j.results["impractical_gate"] = r.impractical_gate;
}

void run_grover_sweep(Job& j) {
    ReadoutErrorModel rm;
    rm.kappa_snr = j.num("calib_kappa_snr", rm.kappa_snr);
    auto cal = calibrate_noise(j.rc.noise, kAnchorAccuracy, rm);
    GroverConfig base;
    base.target = j.str("target", "11");
    base.noise = j.rc.noise;
    base.noise_scale = cal.noise_scale;
    base.readout_error = cal.readout_error;
    base.n_shots = j.count("shots", 2048);
    base.seed = j.seed;
    base.sampling = sampling_mode(j);
    const std::string pair = j.str("pair", kAnchorPair);
    base.pair = pair_params(effective_two_qubit(j.rc.device, pair, calibrate_zeta_scale()));
    auto zetas = grid(j, "zeta", 0.1 * MHz, 1.0 * MHz, 10);
    const std::string surface = j.str("surface", "zeta-j12");
    AccuracySurface s;
    if (surface == "zeta-j12") {
        s = sweep_zeta_j12(base, zetas, grid(j, "j12", 0.0, 5 * MHz, 11));
    } else if (surface == "zeta-flux") {
        std::string dj = j.str("device_j12", "true");
        if (dj != "true" && dj != "false") throw Error(Errc::invalid_argument, "device_j12 must be true or false");
        s = sweep_zeta_flux(base, j.rc.device, pair, zetas, grid(j, "flux", 0.70, 0.90, 21), dj == "true");
    } else {
        throw Error(Errc::invalid_argument, "surface must be zeta-j12 or zeta-flux");
    }
    j.write("surface.csv", [&](std::ostream& os) { s.write_csv(os); });
    j.write_svg("surface.svg", [&](std::ostream& os) {
        std::vector<double> zx;
        for (double z : s.x) zx.push_back(z / MHz);
        std::vector<double> y = s.y;
        if (surface == "zeta-j12")
            for (double& v : y) v /= MHz;
        svg::heatmap(os, zx, y, s.accuracy, "Grover accuracy", "zeta (MHz)", surface == "zeta-j12" ? "J12 (MHz)" : "flux");
    });
    int invalid = 0;
    for (Eigen::Index k = 0; k < s.accuracy.size(); ++k) invalid += std::isnan(s.accuracy.data()[k]);
    j.results["calibration"] = calibration_json(cal);
    j.results["surface"] = surface;
    j.results["pair"] = pair;
    j.results["cells"] = s.accuracy.size();
    j.results["invalid_cells"] = invalid;
}

void run_translate(Job& j) {
    HardwareConstants hc;
    hc.z0 = j.num("z0", hc.z0);
    hc.eps_eff = j.num("eps_eff", hc.eps_eff);
    hc.alpha = j.num("alpha", hc.alpha);
    std::string line = j.str("line", "half-wave");
    if (line == "quarter-wave") hc.mode = LineMode::quarter_wave;
    else if (line != "half-wave") throw Error(Errc::invalid_argument, "line must be half-wave or quarter-wave");
    if (j.has("kappa")) {
        auto k = j.list("kappa");
        if (k.size() != 4) throw Error(Errc::parse_error, "kappa takes 4 values");
        for (int i = 0; i < 4; ++i) hc.kappa[i] = k[i];
    }
    hc.ld_min = j.num("ld_min_mm", hc.ld_min / mm) * mm;
    hc.ld_max = j.num("ld_max_mm", hc.ld_max / mm) * mm;
    hc.j_span = j.num("j_span", hc.j_span);
    auto r = translate(j.rc.device, hc);
    j.write("hardware.csv", [&](std::ostream& os) { r.write_csv(os); });
    j.write("hardware_report.txt", [&](std::ostream& os) { r.write_text(os); });
    j.write_svg("resonator_lengths.svg", [&](std::ostream& os) {
        svg::Series s{"L_r", {}, {}, "#1f77b4", true};
        auto L = r.values("resonator_length");
        for (int k = 0; k < 4; ++k) s.x.push_back(j.rc.device.coupler_res_freqs[k] / GHz), s.y.push_back(L[k]);
        svg::plot(os, {s}, "resonator length vs frequency", "f (GHz)", "length (mm)");
    });
    j.results["total_capacitance_fF"] = r.values("total_capacitance")[0];
    j.results["resonator_length_mm"] = r.values("resonator_length");
    j.results["purcell_rate_kHz"] = r.values("purcell_rate");
    j.results["coupling_capacitance_fF"] = r.values("coupling_capacitance");
    j.results["notes"] = {kResonatorLengthNote, kSeparationNote};
}

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qchip: nine-qubit chip simulation and co-design toolkit"};
    app.require_subcommand(1);
    std::vector<std::string> args(argv, argv + argc);

    struct Sub {
        CLI::App* app;
        Common c;
    };
    std::map<std::string, Sub> subs;
    auto add = [&](const std::string& name, const std::string& desc) -> Sub& {
        Sub& s = subs[name];
        s.app = app.add_subcommand(name, desc);
        s.app->add_option("--config", s.c.config, "config file (key = value)");
        s.app->add_option("--out", s.c.out, "output directory")->required();
        s.app->add_option("--seed", s.c.seed, "random seed")->default_val(kDefaultSeed);
        s.app->add_option("--set", s.c.sets, "override key=value (repeatable)");
        s.app->add_flag("--svg", s.c.svg, "also write SVG plots");
        return s;
    };
    std::string preset_flag, flux_flag, pair_flag, target_flag, shots_flag, mode_flag, surface_flag, n_flag;
    std::string dataset_flag, box_flag, model_flag;

    add("spectroscopy", "transition spectrum vs flux and avoided-crossing report");
    add("fidelity-snr", "readout fidelity vs kappa_SNR");
    auto& iq = add("iq-clouds", "single-shot I/Q clouds at one flux");
    iq.app->add_option("--flux", flux_flag, "flux bias (flux quanta)");
    auto& gd = add("gen-dataset", "Latin-hypercube dataset of readout fidelities");
    gd.app->add_option("--n", n_flag, "number of samples");
    auto& tr = add("train", "train the surrogate on a dataset");
    tr.app->add_option("--dataset", dataset_flag, "dataset CSV");
    tr.app->add_option("--box", box_flag, "box CSV (default: dataset_box.csv next to the dataset)");
    auto& op = add("optimize", "surrogate-guided parameter optimization");
    op.app->add_option("--model", model_flag, "surrogate weights");
    op.app->add_option("--box", box_flag, "box CSV");
    auto& gr = add("grover", "noisy two-qubit Grover run, reference pairs or shot sweep");
    gr.app->add_option("--pair", pair_flag, "pair, e.g. int1-res-tun");
    gr.app->add_option("--target", target_flag, "marked state (00, 01, 10, 11)");
    gr.app->add_option("--shots", shots_flag, "shots");
    gr.app->add_option("--mode", mode_flag, "single (default), pairs: reference pair accuracies, shots: shot sweep");
    auto& gs = add("grover-sweep", "Grover accuracy surfaces");
    gs.app->add_option("--surface", surface_flag, "zeta-j12 or zeta-flux");
    add("translate", "circuit-level hardware report");
    for (auto& [n, s] : subs) s.app->add_option("--preset", preset_flag, "baseline or optimized");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: code=usage message=" << one_line(e.what()) << "\n";
        return 2;
    }

    std::string name;
    for (auto& [n, s] : subs)
        if (s.app->parsed()) name = n;
    const Common& c = subs[name].c;

    KeyValues flags, defaults;
    if (!preset_flag.empty()) flags.set("preset", preset_flag);
    auto flag = [&](const std::string& k, const std::string& v) {
        if (!v.empty()) flags.set(k, v);
    };
    flag("flux", flux_flag);
    flag("pair", pair_flag);
    flag("target", target_flag);
    flag("shots", shots_flag);
    flag("mode", mode_flag);
    flag("surface", surface_flag);
    flag("n", n_flag);

    std::string preset_name = "baseline";
    std::set<std::string> known;
    std::function<void(Job&)> body;
    if (name == "spectroscopy") {
        known = grid_keys({"modes", "width"}, {"flux", "probe"});
        body = run_spectroscopy;
    } else if (name == "fidelity-snr") {
        defaults.set("flux", "0.70");
        known = with_readout({"kappas", "kappa_max", "kappa_points", "shots", "kappa_report"});
        body = run_fidelity_snr;
    } else if (name == "iq-clouds") {
        defaults.set("flux", "0.70");
        known = with_readout({"kappa_snr", "shots", "iq_mode"});
        body = run_iq_clouds;
    } else if (name == "gen-dataset") {
        known = with_readout({"n", "box", "box_mode", "kappa_snr"});
        body = run_gen_dataset;
    } else if (name == "train") {
        known = {"arch", "embed", "epochs", "batch", "optimizer", "lr", "val_fraction"};
        body = [&](Job& j) { run_train(j, dataset_flag, box_flag); };
    } else if (name == "optimize") {
        known = with_readout({"steps", "reeval_every", "optimizer", "lr", "kappa_snr", "verify_shots"});
        body = [&](Job& j) { run_optimize(j, model_flag, box_flag); };
    } else if (name == "grover") {
        preset_name = "optimized";
        known = {"pair", "pair_source", "target", "shots", "mode", "shot_list", "sampling", "zeta", "J12", "calib_kappa_snr"};
        body = run_grover;
    } else if (name == "grover-sweep") {
        preset_name = "optimized";
        known = grid_keys({"surface", "pair", "target", "shots", "sampling", "device_j12", "calib_kappa_snr"}, {"zeta", "j12", "flux"});
        body = run_grover_sweep;
    } else {
        preset_name = "optimized";
        known = {"z0", "eps_eff", "alpha", "line", "kappa", "ld_min_mm", "ld_max_mm", "j_span"};
        body = run_translate;
    }

    std::unique_ptr<Job> job;
    try {
        job = std::make_unique<Job>(name, c, args, preset_name, defaults, flags, known);
        body(*job);
        job->finish();
    } catch (const Error& e) {
        if (job) job->cleanup();
        std::cerr << "error: code=" << errc_name(e.code()) << " message=" << one_line(e.what()) << "\n";
        return 1;
    } catch (const std::exception& e) {
        if (job) job->cleanup();
        std::cerr << "error: code=internal message=" << one_line(e.what()) << "\n";
        return 1;
    }
    return 0;
}

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
#include <array>
#include <bit>
#include <concepts>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qchip/config.hpp"
#include "qchip/device.hpp"
#include "qchip/util.hpp"

namespace qchip {

// ---------------------------------------------------------------- parameter space

struct ParamDim {
    std::string name;
    double base = 0, lo = 0, hi = 0;
};

// Frequencies (12), dispersive shifts (12), bare couplings (9) and flux; everything else frozen.
class ParamSpace {
public:
    ParamSpace() = default;

    static ParamSpace around(const DeviceParams& base, double fraction, bool wide = false) {
        if (!(fraction >= 0) || fraction >= 1) throw Error(Errc::invalid_argument, "box fraction must be in [0, 1)");
        ParamSpace s;
        s.base_ = base;
        DeviceParams tmp = base;
        for (auto& [name, ref] : refs(tmp)) {
            double b = *ref;
            bool coupling = name.rfind("chi", 0) == 0 || name.rfind("g_", 0) == 0;
            ParamDim d{name, b, b - fraction * std::abs(b), b + fraction * std::abs(b)};
            if (wide && coupling) d = {name, b, -12 * std::abs(b), 12 * std::abs(b)};
            s.dims_.push_back(d);
        }
        return s;
    }

    static ParamSpace from_dims(const DeviceParams& base, std::vector<ParamDim> dims) {
        ParamSpace s = around(base, 0.0);
        if (dims.size() != s.dims_.size()) throw Error(Errc::dimension_mismatch, "box has the wrong number of dimensions");
        for (std::size_t i = 0; i < dims.size(); ++i) {
            if (dims[i].name != s.dims_[i].name) throw Error(Errc::parse_error, "box dimension " + dims[i].name + " out of order");
            if (!(dims[i].hi >= dims[i].lo)) throw Error(Errc::invalid_argument, "box dimension " + dims[i].name + " has hi < lo");
        }
        s.dims_ = std::move(dims);
        return s;
    }

    std::size_t size() const { return dims_.size(); }
    const std::vector<ParamDim>& dims() const { return dims_; }
    const DeviceParams& base() const { return base_; }
    bool degenerate() const {
        for (auto& d : dims_)
            if (d.hi > d.lo) return false;
        return true;
    }

    DeviceParams to_params(const Eigen::VectorXd& x) const {
        if (static_cast<std::size_t>(x.size()) != dims_.size()) throw Error(Errc::dimension_mismatch, "theta has the wrong dimension");
        DeviceParams p = base_;
        auto r = refs(p);
        for (std::size_t i = 0; i < dims_.size(); ++i) *r[i].second = dims_[i].lo + x(i) * (dims_[i].hi - dims_[i].lo);
        return p;
    }

    Eigen::VectorXd normalize(const DeviceParams& p) const {
        DeviceParams tmp = p;
        auto r = refs(tmp);
        Eigen::VectorXd x(dims_.size());
        for (std::size_t i = 0; i < dims_.size(); ++i) {
            double w = dims_[i].hi - dims_[i].lo;
            x(i) = w > 0 ? (*r[i].second - dims_[i].lo) / w : 0.5;
        }
        return x;
    }

    void write_box_csv(std::ostream& os) const {
        os << "name,base,lo,hi\n";
        for (auto& d : dims_) os << d.name << "," << fmt_double(d.base) << "," << fmt_double(d.lo) << "," << fmt_double(d.hi) << "\n";
    }

    static std::vector<ParamDim> read_box_csv(std::istream& is) {
        std::string line;
        std::getline(is, line);
        if (trim(line) != "name,base,lo,hi") throw Error(Errc::parse_error, "box file header mismatch");
        std::vector<ParamDim> dims;
        while (std::getline(is, line)) {
            if (trim(line).empty()) continue;
            std::stringstream ss(line);
            std::string f[4];
            for (auto& x : f)
                if (!std::getline(ss, x, ',')) throw Error(Errc::parse_error, "malformed box line: " + line);
            try {
                dims.push_back({f[0], std::stod(f[1]), std::stod(f[2]), std::stod(f[3])});
            } catch (const std::exception&) {
                throw Error(Errc::parse_error, "malformed box line: " + line);
            }
        }
        return dims;
    }

private:
    static std::vector<std::pair<std::string, double*>> refs(DeviceParams& p) {
        std::vector<std::pair<std::string, double*>> r;
        auto quad = [&](const char* n, Quad& q) {
            for (int k = 0; k < 4; ++k) r.push_back({std::string(n) + "[" + std::to_string(k) + "]", &q[k]});
        };
        quad("interior_freqs", p.interior_freqs);
        quad("exterior_freqs", p.exterior_freqs);
        quad("coupler_res_freqs", p.coupler_res_freqs);
        quad("chi_i", p.chi_i);
        quad("chi_j", p.chi_j);
        quad("chi_k", p.chi_k);
        quad("g_i_bare", p.g_i_bare);
        quad("g_j_bare", p.g_j_bare);
        r.push_back({"g_c_bare", &p.g_c_bare});
        r.push_back({"flux", &p.flux});
        return r;
    }

    DeviceParams base_;
    std::vector<ParamDim> dims_;
};

inline constexpr int kThetaDim = 34;

// ---------------------------------------------------------------- dataset

struct ParamDataset {
    ParamSpace space;
    Eigen::MatrixXd X;  // (dims, samples), normalized to the box
    Eigen::VectorXd F;
    std::vector<std::string> skipped;
    std::string provenance;  // evaluator settings + seed

    std::size_t size() const { return static_cast<std::size_t>(F.size()); }

    void write_csv(std::ostream& os) const {
        for (auto& d : space.dims()) os << d.name << ",";
        os << "F\n";
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            for (Eigen::Index i = 0; i < X.rows(); ++i) os << fmt_double(X(i, j)) << ",";
            os << fmt_double(F(j)) << "\n";
        }
    }

    static ParamDataset read_csv(std::istream& is, const ParamSpace& space) {
        ParamDataset d;
        d.space = space;
        std::string line;
        std::getline(is, line);
        std::string expect;
        for (auto& dim : space.dims()) expect += dim.name + ",";
        if (trim(line) != expect + "F") throw Error(Errc::parse_error, "dataset header does not match the box");
        std::vector<std::vector<double>> rows;
        while (std::getline(is, line)) {
            if (trim(line).empty()) continue;
            std::vector<double> v;
            std::stringstream ss(line);
            std::string f;
            while (std::getline(ss, f, ',')) {
                try {
                    v.push_back(std::stod(f));
                } catch (const std::exception&) {
                    throw Error(Errc::parse_error, "malformed dataset value: " + f);
                }
            }
            if (v.size() != space.size() + 1) throw Error(Errc::parse_error, "dataset row has the wrong width");
            rows.push_back(std::move(v));
        }
        d.X.resize(space.size(), rows.size());
        d.F.resize(rows.size());
        for (std::size_t j = 0; j < rows.size(); ++j) {
            for (std::size_t i = 0; i < space.size(); ++i) d.X(i, j) = rows[j][i];
            d.F(j) = rows[j].back();
        }
        return d;
    }
};

using Evaluator = std::function<double(const DeviceParams&)>;

// Latin-hypercube samples of the box; failed or out-of-range evaluations are skipped and logged.
inline ParamDataset generate_dataset(const ParamSpace& space, std::size_t n, const Evaluator& eval, std::uint64_t seed) {
    if (n < 2) throw Error(Errc::invalid_argument, "dataset needs n >= 2");
    if (space.degenerate()) throw Error(Errc::degenerate_dataset, "box has zero width: every sample would be identical");
    const std::size_t D = space.size();
    Rng rng(seed);
    Eigen::MatrixXd X(D, n);
    std::vector<std::size_t> perm(n);
    for (std::size_t d = 0; d < D; ++d) {
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i + 1))]);
        for (std::size_t i = 0; i < n; ++i) X(d, i) = (static_cast<double>(perm[i]) + uniform01(rng)) / static_cast<double>(n);
    }
    std::vector<double> F(n, std::numeric_limits<double>::quiet_NaN());
    std::vector<std::string> err(n);
    parallel_for(n, [&](std::size_t i) {
        try {
            double f = eval(space.to_params(X.col(i)));
            if (!(f >= 0 && f <= 1)) throw Error(Errc::invalid_argument, "fidelity outside [0, 1]: " + fmt_double(f));
            F[i] = f;
        } catch (const std::exception& e) {
            err[i] = e.what();
        }
    });
    ParamDataset ds;
    ds.space = space;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i) {
        if (err[i].empty())
            keep.push_back(i);
        else
            ds.skipped.push_back("sample " + std::to_string(i) + ": " + err[i]);
    }
    ds.X.resize(D, keep.size());
    ds.F.resize(keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j) {
        ds.X.col(j) = X.col(keep[j]);
        ds.F(j) = F[keep[j]];
    }
    if (keep.size() < 2) throw Error(Errc::degenerate_dataset, "fewer than two samples evaluated successfully");
    return ds;
}

// ---------------------------------------------------------------- model

struct Architecture {
    bool graph = true;
    int embed = 8;
    std::vector<int> hidden = {64, 64};
    int in_dim = kThetaDim;

    std::string describe() const {
        std::string h;
        for (std::size_t i = 0; i < hidden.size(); ++i) h += (i ? "," : "") + std::to_string(hidden[i]);
        return "graph=" + std::to_string(graph ? 1 : 0) + " embed=" + std::to_string(embed) + " hidden=" + h + " in=" + std::to_string(in_dim) +
               " nodes=14 feat=4";
    }
    std::uint64_t hash() const { return fnv1a64(describe()); }

    static Architecture parse(const std::string& s) {
        Architecture a;
        std::stringstream ss(s);
        std::string tok;
        while (ss >> tok) {
            auto eq = tok.find('=');
            if (eq == std::string::npos) throw Error(Errc::parse_error, "bad architecture token " + tok);
            std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
            if (k == "graph") a.graph = v == "1";
            else if (k == "embed") a.embed = std::stoi(v);
            else if (k == "in") a.in_dim = std::stoi(v);
            else if (k == "hidden") {
                a.hidden.clear();
                std::stringstream hs(v);
                std::string x;
                while (std::getline(hs, x, ',')) a.hidden.push_back(std::stoi(x));
            }
        }
        return a;
    }
};

// Chip graph: int1-4 (0-3), ext1-4 (4-7), tun (8), res1-4 (9-12), ro (13).
namespace graph {
inline constexpr int kNodes = 14, kFeat = 4;

inline const std::array<std::array<int, kFeat>, kNodes>& slots() {
    static const std::array<std::array<int, kFeat>, kNodes> s = [] {
        std::array<std::array<int, kFeat>, kNodes> t{};
        for (auto& r : t) r.fill(-1);
        for (int k = 0; k < 4; ++k) {
            t[k] = {k, 16 + k, 28 + k, -1};          // interior: freq, chi_j, g_j
            t[4 + k] = {4 + k, 12 + k, 24 + k, -1};  // exterior: freq, chi_i, g_i
            t[9 + k] = {8 + k, 20 + k, -1, -1};      // coupler resonator: freq, chi_k
        }
        t[8] = {33, 32, -1, -1};  // tunable: flux, g_c
        return t;
    }();
    return s;
}

inline const std::vector<std::vector<int>>& neighbors() {
    static const std::vector<std::vector<int>> nb = [] {
        std::vector<std::vector<int>> n(kNodes);
        auto edge = [&](int a, int b) {
            n[a].push_back(b);
            n[b].push_back(a);
        };
        for (int k = 0; k < 4; ++k) {
            edge(k, 9 + k);   // g_lambda_b
            edge(4 + k, 13);  // g_jr
            edge(k, 8);       // J_lambda_t
            edge(k, 4 + k);   // J_lambda_j
            edge(8, 9 + k);   // coupler path
        }
        return n;
    }();
    return nb;
}
}  // namespace graph

class SurrogateModel {
public:
    double target_lo = 0, target_hi = 1;  // targets are mapped to [0.1, 0.9] with these

    explicit SurrogateModel(Architecture arch = {}, std::uint64_t seed = 1) : arch_(std::move(arch)) {
        if (arch_.graph && arch_.in_dim != kThetaDim) throw Error(Errc::invalid_dimension, "graph encoder needs the 34-dimensional theta");
        if (arch_.embed < 1 || arch_.in_dim < 1) throw Error(Errc::invalid_dimension, "architecture sizes must be positive");
        layout();
        Rng rng(seed);
        w_.resize(static_cast<Eigen::Index>(total_));
        auto fill = [&](std::size_t off, int rows, int cols) {
            double a = std::sqrt(6.0 / (rows + cols));
            for (int i = 0; i < rows * cols; ++i) w_(static_cast<Eigen::Index>(off) + i) = a * (2 * uniform01(rng) - 1);
        };
        w_.setZero();
        if (arch_.graph) {
            fill(off_ws_, arch_.embed, graph::kFeat);
            fill(off_wn_, arch_.embed, graph::kFeat);
        }
        for (std::size_t l = 0; l < sizes_.size() - 1; ++l) fill(off_w_[l], sizes_[l + 1], sizes_[l]);
    }

    const Architecture& arch() const { return arch_; }
    Eigen::VectorXd& params() { return w_; }
    const Eigen::VectorXd& params() const { return w_; }
    std::size_t n_params() const { return total_; }

    double to_scaled(double y) const { return 0.1 + 0.8 * (y - target_lo) / span(); }
    double from_scaled(double s) const { return target_lo + (s - 0.1) / 0.8 * span(); }

    // Raw sigmoid outputs (scaled space), one per column of X.
    Eigen::VectorXd forward(const Eigen::MatrixXd& X) const {
        Cache c;
        run(X, c);
        return c.A.back().row(0).transpose();
    }

    double predict(const Eigen::VectorXd& x) const { return from_scaled(forward(x)(0)); }

    Eigen::VectorXd predict_batch(const Eigen::MatrixXd& X) const {
        Eigen::VectorXd s = forward(X);
        for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = from_scaled(s(i));
        return s;
    }

    Eigen::VectorXd input_gradient(const Eigen::VectorXd& x) const {
        Cache c;
        run(x, c);
        Eigen::RowVectorXd d = Eigen::RowVectorXd::Constant(1, span() / 0.8);
        Eigen::MatrixXd dX;
        backward(c, d, nullptr, &dX);
        return dX.col(0);
    }

    // Mean squared error against scaled targets s; gradient in the flat parameter layout.
    double loss_and_grad(const Eigen::MatrixXd& X, const Eigen::VectorXd& s, Eigen::VectorXd* grad) const {
        Cache c;
        run(X, c);
        Eigen::RowVectorXd r = c.A.back().row(0) - s.transpose();
        const double B = static_cast<double>(X.cols());
        double loss = r.squaredNorm() / B;
        if (grad) backward(c, (2.0 / B) * r, grad, nullptr);
        return loss;
    }

    void save(std::ostream& os) const {
        os << "qchip-surrogate 1\n"
           << "arch " << arch_.describe() << "\n"
           << "hash " << std::hex << arch_.hash() << std::dec << "\n"
           << "target_scale " << fmt_double(target_lo) << " " << fmt_double(target_hi) << "\n"
           << "params " << total_ << "\n"
           << "end\n";
        std::vector<double> buf(w_.data(), w_.data() + w_.size());
        if constexpr (std::endian::native == std::endian::big)
            for (auto& v : buf) v = byteswap(v);
        os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(double)));
    }

    static SurrogateModel load(std::istream& is) {
        std::string line, key;
        std::getline(is, line);
        if (line != "qchip-surrogate 1") throw Error(Errc::parse_error, "not a version-1 surrogate weights file");
        std::getline(is, line);
        if (line.rfind("arch ", 0) != 0) throw Error(Errc::parse_error, "missing architecture line");
        Architecture a = Architecture::parse(line.substr(5));
        std::getline(is, line);
        std::uint64_t h = 0;
        {
            std::stringstream ss(line);
            ss >> key >> std::hex >> h;
        }
        if (key != "hash" || h != a.hash()) throw Error(Errc::parse_error, "architecture hash mismatch");
        SurrogateModel m(a);
        std::getline(is, line);
        {
            std::stringstream ss(line);
            std::string lo, hi;
            ss >> key >> lo >> hi;
            m.target_lo = std::stod(lo);
            m.target_hi = std::stod(hi);
        }
        std::getline(is, line);
        std::size_t n = 0;
        {
            std::stringstream ss(line);
            ss >> key >> n;
        }
        if (n != m.total_) throw Error(Errc::parse_error, "parameter count does not match the architecture");
        std::getline(is, line);
        if (line != "end") throw Error(Errc::parse_error, "malformed weights header");
        std::vector<double> buf(n);
        is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(double)));
        if (!is) throw Error(Errc::parse_error, "weights file truncated");
        if constexpr (std::endian::native == std::endian::big)
            for (auto& v : buf) v = byteswap(v);
        for (std::size_t i = 0; i < n; ++i) m.w_(static_cast<Eigen::Index>(i)) = buf[i];
        if (!m.w_.allFinite()) throw Error(Errc::parse_error, "weights file holds non-finite values");
        return m;
    }

private:
    struct Cache {
        std::vector<Eigen::MatrixXd> Xv, Mv, Hv;  // graph stage, per node
        std::vector<Eigen::MatrixXd> A;           // A[0] = head input
    };

    static double byteswap(double v) {
        std::uint64_t u;
        std::memcpy(&u, &v, 8);
        u = __builtin_bswap64(u);
        std::memcpy(&v, &u, 8);
        return v;
    }

    double span() const {
        double s = target_hi - target_lo;
        return s > 0 ? s : 1.0;
    }

    void layout() {
        std::size_t off = 0;
        const int E = arch_.embed, Fe = graph::kFeat;
        if (arch_.graph) {
            off_ws_ = off, off += static_cast<std::size_t>(E * Fe);
            off_wn_ = off, off += static_cast<std::size_t>(E * Fe);
            off_bg_ = off, off += static_cast<std::size_t>(E);
        }
        sizes_ = {arch_.graph ? graph::kNodes * E : arch_.in_dim};
        for (int h : arch_.hidden) {
            if (h < 1) throw Error(Errc::invalid_dimension, "hidden widths must be positive");
            sizes_.push_back(h);
        }
        sizes_.push_back(1);
        off_w_.clear();
        off_b_.clear();
        for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
            off_w_.push_back(off), off += static_cast<std::size_t>(sizes_[l + 1] * sizes_[l]);
            off_b_.push_back(off), off += static_cast<std::size_t>(sizes_[l + 1]);
        }
        total_ = off;
    }

    template <class V>
    static auto mat(V& v, std::size_t off, int r, int c) {
        return Eigen::Map<std::conditional_t<std::is_const_v<V>, const Eigen::MatrixXd, Eigen::MatrixXd>>(v.data() + off, r, c);
    }

    void run(const Eigen::MatrixXd& X, Cache& c) const {
        if (X.rows() != arch_.in_dim) throw Error(Errc::dimension_mismatch, "surrogate input has the wrong dimension");
        const Eigen::Index B = X.cols();
        Eigen::MatrixXd Xc = (2.0 * X.array() - 1.0).matrix();
        c.A.assign(1, Eigen::MatrixXd());
        if (arch_.graph) {
            const int E = arch_.embed;
            auto Ws = mat(w_, off_ws_, E, graph::kFeat), Wn = mat(w_, off_wn_, E, graph::kFeat);
            auto bg = mat(w_, off_bg_, E, 1);
            c.Xv.assign(graph::kNodes, Eigen::MatrixXd::Zero(graph::kFeat, B));
            for (int v = 0; v < graph::kNodes; ++v)
                for (int f = 0; f < graph::kFeat; ++f)
                    if (graph::slots()[v][f] >= 0) c.Xv[v].row(f) = Xc.row(graph::slots()[v][f]);
            c.Mv.assign(graph::kNodes, Eigen::MatrixXd::Zero(graph::kFeat, B));
            c.Hv.resize(graph::kNodes);
            c.A[0].resize(graph::kNodes * E, B);
            for (int v = 0; v < graph::kNodes; ++v) {
                const auto& nb = graph::neighbors()[v];
                for (int u : nb) c.Mv[v] += c.Xv[u];
                c.Mv[v] /= static_cast<double>(nb.size());
                Eigen::MatrixXd pre = Ws * c.Xv[v] + Wn * c.Mv[v];
                pre.colwise() += bg.col(0);
                c.Hv[v] = pre.array().tanh().matrix();
                c.A[0].middleRows(v * E, E) = c.Hv[v];
            }
        } else {
            c.A[0] = Xc;
        }
        for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
            auto W = mat(w_, off_w_[l], sizes_[l + 1], sizes_[l]);
            auto b = mat(w_, off_b_[l], sizes_[l + 1], 1);
            Eigen::MatrixXd pre = W * c.A[l];
            pre.colwise() += b.col(0);
            if (l + 2 == sizes_.size())
                c.A.push_back((1.0 / (1.0 + (-pre.array()).exp())).matrix());
            else
                c.A.push_back(pre.array().tanh().matrix());
        }
    }

    // dout: dL/d(sigmoid output), one entry per sample.
    void backward(const Cache& c, const Eigen::RowVectorXd& dout, Eigen::VectorXd* grad, Eigen::MatrixXd* dX) const {
        if (grad) grad->setZero(static_cast<Eigen::Index>(total_));
        const std::size_t L = sizes_.size() - 1;
        const Eigen::MatrixXd& out = c.A.back();
        Eigen::MatrixXd delta = (dout.array() * out.row(0).array() * (1.0 - out.row(0).array())).matrix();
        Eigen::MatrixXd dA;
        for (std::size_t l = L; l-- > 0;) {
            auto W = mat(w_, off_w_[l], sizes_[l + 1], sizes_[l]);
            if (grad) {
                mat(*grad, off_w_[l], sizes_[l + 1], sizes_[l]) = delta * c.A[l].transpose();
                mat(*grad, off_b_[l], sizes_[l + 1], 1) = delta.rowwise().sum();
            }
            dA = W.transpose() * delta;
            if (l > 0) delta = (dA.array() * (1.0 - c.A[l].array().square())).matrix();
        }
        const Eigen::Index B = out.cols();
        if (!arch_.graph) {
            if (dX) *dX = 2.0 * dA;
            return;
        }
        const int E = arch_.embed;
        auto Ws = mat(w_, off_ws_, E, graph::kFeat), Wn = mat(w_, off_wn_, E, graph::kFeat);
        std::vector<Eigen::MatrixXd> dXv(graph::kNodes, Eigen::MatrixXd::Zero(graph::kFeat, B));
        for (int v = 0; v < graph::kNodes; ++v) {
            Eigen::MatrixXd dP = (dA.middleRows(v * E, E).array() * (1.0 - c.Hv[v].array().square())).matrix();
            if (grad) {
                mat(*grad, off_ws_, E, graph::kFeat) += dP * c.Xv[v].transpose();
                mat(*grad, off_wn_, E, graph::kFeat) += dP * c.Mv[v].transpose();
                mat(*grad, off_bg_, E, 1) += dP.rowwise().sum();
            }
            if (dX) {
                dXv[v] += Ws.transpose() * dP;
                const auto& nb = graph::neighbors()[v];
                Eigen::MatrixXd back = Wn.transpose() * dP / static_cast<double>(nb.size());
                for (int u : nb) dXv[u] += back;
            }
        }
        if (dX) {
            dX->setZero(arch_.in_dim, B);
            for (int v = 0; v < graph::kNodes; ++v)
                for (int f = 0; f < graph::kFeat; ++f)
                    if (graph::slots()[v][f] >= 0) dX->row(graph::slots()[v][f]) += 2.0 * dXv[v].row(f);
        }
    }

    Architecture arch_;
    Eigen::VectorXd w_;
    std::size_t total_ = 0, off_ws_ = 0, off_wn_ = 0, off_bg_ = 0;
    std::vector<int> sizes_;
    std::vector<std::size_t> off_w_, off_b_;
};

// ---------------------------------------------------------------- optimizers

enum class OptimizerKind { adam, momentum, sign };

inline OptimizerKind optimizer_kind(const std::string& s) {
    if (s == "adam") return OptimizerKind::adam;
    if (s == "momentum") return OptimizerKind::momentum;
    if (s == "sign" || s == "manhattan") return OptimizerKind::sign;
    throw Error(Errc::invalid_argument, "unknown optimizer " + s);
}

inline const char* optimizer_name(OptimizerKind k) {
    switch (k) {
        case OptimizerKind::adam: return "adam";
        case OptimizerKind::momentum: return "momentum";
        case OptimizerKind::sign: return "sign";
    }
    return "?";
}

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adam;
    std::optional<double> lr;  // unset: per-kind default
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    double momentum = 0.9;

    double learning_rate() const {
        if (lr) return *lr;
        return kind == OptimizerKind::momentum ? 1e-2 : 1e-3;
    }
};

// Descent on a flat vector; per-weight accumulators live here.
class Optimizer {
public:
    explicit Optimizer(OptimizerConfig cfg = {}) : cfg_(cfg) {
        if (!(cfg_.learning_rate() > 0)) throw Error(Errc::invalid_argument, "learning rate must be positive");
        for (double b : {cfg_.beta1, cfg_.beta2, cfg_.momentum})
            if (!(b >= 0 && b < 1)) throw Error(Errc::invalid_argument, "optimizer coefficients must be in [0, 1)");
    }

    void step(Eigen::VectorXd& w, const Eigen::VectorXd& g) {
        const double lr = cfg_.learning_rate();
        if (m_.size() != w.size()) {
            m_ = Eigen::VectorXd::Zero(w.size());
            v_ = Eigen::VectorXd::Zero(w.size());
            t_ = 0;
        }
        ++t_;
        switch (cfg_.kind) {
            case OptimizerKind::adam: {
                m_ = cfg_.beta1 * m_ + (1 - cfg_.beta1) * g;
                v_ = cfg_.beta2 * v_ + (1 - cfg_.beta2) * g.cwiseAbs2();
                const double c1 = 1 - std::pow(cfg_.beta1, t_), c2 = 1 - std::pow(cfg_.beta2, t_);
                w.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.eps);
                break;
            }
            case OptimizerKind::momentum:
                m_ = cfg_.momentum * m_ - lr * g;
                w += m_;
                break;
            case OptimizerKind::sign: w.array() -= lr * g.array().sign(); break;
        }
    }

    const OptimizerConfig& config() const { return cfg_; }
    int steps() const { return t_; }

private:
    OptimizerConfig cfg_;
    Eigen::VectorXd m_, v_;
    int t_ = 0;
};

// ---------------------------------------------------------------- training

struct TrainOptions {
    OptimizerConfig opt;
    int epochs = 500;
    int batch = 64;
    std::uint64_t seed = 1;
    double val_fraction = 0.2;
};

struct LossPoint {
    int epoch;
    double train, val;
};

struct TrainResult {
    std::vector<LossPoint> curve;
    std::vector<std::size_t> train_idx, val_idx;
    double val_r2 = std::numeric_limits<double>::quiet_NaN();
};

inline void write_loss_csv(std::ostream& os, const std::vector<LossPoint>& c) {
    os << "epoch,train_loss,val_loss\n";
    for (auto& p : c) os << p.epoch << "," << fmt_double(p.train) << "," << fmt_double(p.val) << "\n";
}

inline double r_squared(const SurrogateModel& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    Eigen::VectorXd p = m.predict_batch(X);
    double mean = y.mean();
    double ss_res = (p - y).squaredNorm(), ss_tot = (y.array() - mean).square().sum();
    return ss_tot > 0 ? 1 - ss_res / ss_tot : std::numeric_limits<double>::quiet_NaN();
}

namespace detail {
inline Eigen::MatrixXd gather_cols(const Eigen::MatrixXd& X, const std::vector<std::size_t>& idx, std::size_t b, std::size_t e) {
    Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(e - b));
    for (std::size_t i = b; i < e; ++i) out.col(static_cast<Eigen::Index>(i - b)) = X.col(static_cast<Eigen::Index>(idx[i]));
    return out;
}
inline Eigen::VectorXd gather(const Eigen::VectorXd& y, const std::vector<std::size_t>& idx, std::size_t b, std::size_t e) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(e - b));
    for (std::size_t i = b; i < e; ++i) out(static_cast<Eigen::Index>(i - b)) = y(static_cast<Eigen::Index>(idx[i]));
    return out;
}
inline void shuffle(std::vector<std::size_t>& v, Rng& rng) {
    for (std::size_t i = v.size(); i-- > 1;) std::swap(v[i], v[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i + 1))]);
}
}  // namespace detail

// MSE training with a seeded 80/20 split; on a non-finite loss the last finite
// weights are restored and a divergence error is raised.
inline TrainResult train(SurrogateModel& model, const ParamDataset& data, const TrainOptions& o) {
    const std::size_t n = data.size();
    if (n < 2) throw Error(Errc::degenerate_dataset, "training needs at least two samples");
    if (o.epochs < 1 || o.batch < 1) throw Error(Errc::invalid_argument, "epochs and batch must be positive");
    if (data.X.rows() != model.arch().in_dim) throw Error(Errc::dimension_mismatch, "dataset dimension does not match the model");
    TrainResult res;
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(derive_seed(o.seed, 0));
    detail::shuffle(idx, rng);
    std::size_t n_val = static_cast<std::size_t>(std::floor(o.val_fraction * static_cast<double>(n)));
    n_val = std::min(n_val, n - 1);
    res.val_idx.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    res.train_idx.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
    Eigen::MatrixXd Xt = detail::gather_cols(data.X, res.train_idx, 0, res.train_idx.size());
    Eigen::VectorXd yt = detail::gather(data.F, res.train_idx, 0, res.train_idx.size());
    Eigen::MatrixXd Xv = detail::gather_cols(data.X, res.val_idx, 0, res.val_idx.size());
    Eigen::VectorXd yv = detail::gather(data.F, res.val_idx, 0, res.val_idx.size());
    model.target_lo = yt.minCoeff();
    model.target_hi = yt.maxCoeff();
    if (!(model.target_hi > model.target_lo)) throw Error(Errc::degenerate_dataset, "all training targets are equal");
    auto scaled = [&](const Eigen::VectorXd& y) {
        Eigen::VectorXd s(y.size());
        for (Eigen::Index i = 0; i < y.size(); ++i) s(i) = model.to_scaled(y(i));
        return s;
    };
    Eigen::VectorXd st = scaled(yt), sv = scaled(yv);
    Optimizer opt(o.opt);
    Eigen::VectorXd grad, checkpoint = model.params();
    std::vector<std::size_t> order(res.train_idx.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng erng(derive_seed(o.seed, 1));
    for (int ep = 1; ep <= o.epochs; ++ep) {
        detail::shuffle(order, erng);
        for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(o.batch)) {
            std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(o.batch));
            double l = model.loss_and_grad(detail::gather_cols(Xt, order, b, e), detail::gather(st, order, b, e), &grad);
            if (!std::isfinite(l) || !grad.allFinite()) {
                model.params() = checkpoint;
                throw Error(Errc::divergence, "training diverged at epoch " + std::to_string(ep) + "; last finite weights restored");
            }
            opt.step(model.params(), grad);
        }
        double lt = model.loss_and_grad(Xt, st, nullptr);
        double lv = sv.size() ? model.loss_and_grad(Xv, sv, nullptr) : lt;
        if (!std::isfinite(lt) || !std::isfinite(lv) || !model.params().allFinite()) {
            model.params() = checkpoint;
            throw Error(Errc::divergence, "training diverged at epoch " + std::to_string(ep) + "; last finite weights restored");
        }
        checkpoint = model.params();
        res.curve.push_back({ep, lt, lv});
    }
    if (yv.size() >= 2) res.val_r2 = r_squared(model, Xv, yv);
    return res;
}

// ---------------------------------------------------------------- surrogate-guided optimization

template <class M>
concept Surrogate = requires(const M& m, const Eigen::VectorXd& x) {
    { m.predict(x) } -> std::convertible_to<double>;
    { m.input_gradient(x) } -> std::convertible_to<Eigen::VectorXd>;
};

struct OptimizeOptions {
    OptimizerConfig opt;
    int steps = 1000;
    int reeval_every = 50;
};

struct OptimizeTracePoint {
    int step;
    double predicted;
    double simulated;  // NaN unless re-scored at this step
};

struct OptimizeResult {
    Eigen::VectorXd theta_start, theta_opt;
    double start_fidelity = 0;
    double fidelity = 0;          // simulator value at theta_opt
    bool no_improvement = false;
    int best_step = 0;
    std::string provenance = "simulator";
    std::vector<OptimizeTracePoint> trace;
    std::vector<std::string> failures;
};

inline void write_trace_csv(std::ostream& os, const std::vector<OptimizeTracePoint>& t) {
    os << "step,predicted,simulated\n";
    for (auto& p : t) os << p.step << "," << fmt_double(p.predicted) << "," << fmt_double(p.simulated) << "\n";
}

// Projected ascent on the surrogate inside [0, 1]^d; the returned fidelity always comes
// from the simulator (best re-scored candidate, or the start if nothing beat it).
template <Surrogate M>
OptimizeResult optimize(const M& model, const Eigen::VectorXd& start, const std::function<double(const Eigen::VectorXd&)>& simulator,
                        const OptimizeOptions& o = {}) {
    if (o.steps < 1 || o.reeval_every < 1) throw Error(Errc::invalid_argument, "steps and reeval_every must be positive");
    if ((start.array() < 0).any() || (start.array() > 1).any()) throw Error(Errc::invalid_argument, "start point outside the box");
    OptimizeResult r;
    r.theta_start = start;
    r.theta_opt = start;
    r.start_fidelity = simulator(start);
    r.fidelity = r.start_fidelity;
    r.trace.push_back({0, model.predict(start), r.start_fidelity});
    Optimizer opt(o.opt);
    Eigen::VectorXd x = start;
    for (int s = 1; s <= o.steps; ++s) {
        Eigen::VectorXd g = -model.input_gradient(x);
        opt.step(x, g);
        x = x.cwiseMax(0.0).cwiseMin(1.0);
        double sim = std::numeric_limits<double>::quiet_NaN();
        if (s % o.reeval_every == 0 || s == o.steps) {
            try {
                sim = simulator(x);
            } catch (const std::exception& e) {
                r.failures.push_back("step " + std::to_string(s) + ": " + e.what());
            }
            if (sim > r.fidelity) {
                r.fidelity = sim;
                r.theta_opt = x;
                r.best_step = s;
            }
        }
        r.trace.push_back({s, model.predict(x), sim});
    }
    r.no_improvement = r.best_step == 0;
    return r;
}

}  // namespace qchip

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "mghs/g3p.hpp"

namespace mghs::g3p {

namespace {
constexpr char table_magic[8] = {'M', 'G', '3', 'P', 'T', 'B', 'L', '1'};
constexpr std::uint32_t table_version = 1;

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
void read_pod(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
}

void write_cell(std::ostream& os, const CellData& c) {
    write_pod(os, c.m1);
    write_pod(os, c.s1);
    write_pod(os, c.log_cf1);
    write_pod(os, c.t1);
    write_pod(os, c.t2);
    write_pod(os, c.lap_L);
    write_pod(os, c.lap_R);
    write_pod(os, c.lap_delta);
    write_pod(os, c.lap_b);
    write_pod(os, c.lap_c);
    write_pod(os, c.laplace_ok);
}
void read_cell(std::istream& is, CellData& c) {
    read_pod(is, c.m1);
    read_pod(is, c.s1);
    read_pod(is, c.log_cf1);
    read_pod(is, c.t1);
    read_pod(is, c.t2);
    read_pod(is, c.lap_L);
    read_pod(is, c.lap_R);
    read_pod(is, c.lap_delta);
    read_pod(is, c.lap_b);
    read_pod(is, c.lap_c);
    read_pod(is, c.laplace_ok);
}
}  // namespace

std::vector<double> default_ratio_knots(int count) {
    // uniform in asinh over the exact-regime window: dense near zero where
    // the hat parameters bend fastest
    std::vector<double> knots(count);
    double lo = std::asinh(gamma_limit_ratio);
    double hi = std::asinh(normal_beta_ratio);
    for (int i = 0; i < count; ++i)
        knots[i] = std::sinh(lo + (hi - lo) * i / (count - 1));
    knots.front() = gamma_limit_ratio;
    knots.back() = normal_beta_ratio;
    return knots;
}

std::vector<int> default_gamma_knots() {
    // small orders for the local-shrinkage updates, triangular numbers
    // p(p-1)/2 so the global-shrinkage draw hits the grid for p <= 20
    return {1,  2,  3,  4,  5,  6,  7,  8,   9,   10,  15,  20,  21,  28, 30,
            36, 45, 50, 55, 66, 78, 91, 100, 105, 120, 136, 150, 153, 171, 190, 200};
}

SamplerTables SamplerTables::build(std::vector<int> gamma_knots,
                                   std::vector<double> ratio_knots) {
    if (gamma_knots.empty() || ratio_knots.size() < 2)
        throw std::invalid_argument("SamplerTables: need >= 1 gamma and >= 2 ratio knots");
    if (!std::is_sorted(gamma_knots.begin(), gamma_knots.end()) ||
        std::adjacent_find(gamma_knots.begin(), gamma_knots.end()) != gamma_knots.end())
        throw std::invalid_argument("SamplerTables: gamma knots must be strictly increasing");
    if (!std::is_sorted(ratio_knots.begin(), ratio_knots.end()) ||
        std::adjacent_find(ratio_knots.begin(), ratio_knots.end()) != ratio_knots.end())
        throw std::invalid_argument("SamplerTables: ratio knots must be strictly increasing");
    SamplerTables t;
    t.gamma_knots_ = std::move(gamma_knots);
    t.ratio_knots_ = std::move(ratio_knots);
    t.cells_.resize(t.gamma_knots_.size() * t.ratio_knots_.size());
    for (std::size_t gi = 0; gi < t.gamma_knots_.size(); ++gi)
        for (std::size_t ri = 0; ri < t.ratio_knots_.size(); ++ri)
            t.cells_[gi * t.ratio_knots_.size() + ri] =
                compute_cell(t.gamma_knots_[gi], t.ratio_knots_[ri]);
    return t;
}

SamplerTables SamplerTables::build_default() {
    return build(default_gamma_knots(), default_ratio_knots());
}

bool SamplerTables::lookup(int gamma, double rho, CellData& out) const {
    auto git = std::lower_bound(gamma_knots_.begin(), gamma_knots_.end(), gamma);
    if (git == gamma_knots_.end() || *git != gamma) return false;
    if (rho < ratio_knots_.front() || rho > ratio_knots_.back()) return false;
    std::size_t gi = static_cast<std::size_t>(git - gamma_knots_.begin());
    auto rit = std::upper_bound(ratio_knots_.begin(), ratio_knots_.end(), rho);
    std::size_t hi = std::min<std::size_t>(rit - ratio_knots_.begin(),
                                           ratio_knots_.size() - 1);
    std::size_t lo = hi == 0 ? 0 : hi - 1;
    const CellData& a = cell(gi, lo);
    const CellData& b = cell(gi, hi);
    if (lo == hi) {
        out = a;
        return true;
    }
    if (!a.laplace_ok || !b.laplace_ok) return false;  // no clean interpolation
    double w = (rho - ratio_knots_[lo]) / (ratio_knots_[hi] - ratio_knots_[lo]);
    auto lerp = [w](double x, double y) { return x + w * (y - x); };
    out.m1 = lerp(a.m1, b.m1);
    out.s1 = lerp(a.s1, b.s1);
    out.log_cf1 = lerp(a.log_cf1, b.log_cf1);
    out.t1 = lerp(a.t1, b.t1);
    out.t2 = lerp(a.t2, b.t2);
    out.lap_L = lerp(a.lap_L, b.lap_L);
    out.lap_R = lerp(a.lap_R, b.lap_R);
    out.lap_delta = lerp(a.lap_delta, b.lap_delta);
    out.lap_b = lerp(a.lap_b, b.lap_b);
    out.lap_c = lerp(a.lap_c, b.lap_c);
    out.laplace_ok = 1;
    return true;
}

void SamplerTables::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("SamplerTables::save: cannot open " + path);
    os.write(table_magic, sizeof(table_magic));
    write_pod(os, table_version);
    write_pod(os, static_cast<std::uint32_t>(gamma_knots_.size()));
    write_pod(os, static_cast<std::uint32_t>(ratio_knots_.size()));
    for (int g : gamma_knots_) write_pod(os, static_cast<std::int32_t>(g));
    for (double r : ratio_knots_) write_pod(os, r);
    for (const CellData& c : cells_) write_cell(os, c);
    if (!os) throw std::runtime_error("SamplerTables::save: write failed");
}

SamplerTables SamplerTables::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("SamplerTables::load: cannot open " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, table_magic, sizeof(magic)) != 0)
        throw std::runtime_error("SamplerTables::load: bad magic");
    std::uint32_t version = 0, ng = 0, nr = 0;
    read_pod(is, version);
    if (version != table_version)
        throw std::runtime_error("SamplerTables::load: unsupported version");
    read_pod(is, ng);
    read_pod(is, nr);
    SamplerTables t;
    t.gamma_knots_.resize(ng);
    t.ratio_knots_.resize(nr);
    t.cells_.resize(static_cast<std::size_t>(ng) * nr);
    for (auto& g : t.gamma_knots_) {
        std::int32_t v;
        read_pod(is, v);
        g = v;
    }
    for (auto& r : t.ratio_knots_) read_pod(is, r);
    for (auto& c : t.cells_) read_cell(is, c);
    if (!is) throw std::runtime_error("SamplerTables::load: truncated file");
    return t;
}

bool SamplerTables::operator==(const SamplerTables& other) const {
    if (gamma_knots_ != other.gamma_knots_) return false;
    if (ratio_knots_ != other.ratio_knots_) return false;
    if (cells_.size() != other.cells_.size()) return false;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        const CellData& a = cells_[i];
        const CellData& b = other.cells_[i];
        if (std::memcmp(&a.m1, &b.m1, sizeof(double)) != 0 ||
            std::memcmp(&a.s1, &b.s1, sizeof(double)) != 0 ||
            std::memcmp(&a.log_cf1, &b.log_cf1, sizeof(double)) != 0 ||
            std::memcmp(&a.t1, &b.t1, sizeof(double)) != 0 ||
            std::memcmp(&a.t2, &b.t2, sizeof(double)) != 0 ||
            std::memcmp(&a.lap_L, &b.lap_L, sizeof(double)) != 0 ||
            std::memcmp(&a.lap_R, &b.lap_R, sizeof(double)) != 0 ||
            std::memcmp(&a.lap_delta, &b.lap_delta, sizeof(double)) != 0 ||
            std::memcmp(&a.lap_b, &b.lap_b, sizeof(double)) != 0 ||
            std::memcmp(&a.lap_c, &b.lap_c, sizeof(double)) != 0 ||
            a.laplace_ok != b.laplace_ok)
            return false;
    }
    return true;
}

double sample_with_tables(const Params& p, const SamplerTables& tables, Rng& rng,
                          DrawStats* stats) {
    DrawStats scratch;
    DrawStats& st = stats ? *stats : scratch;
    if (p.beta != 0.0 && classify(p) == Regime::Exact &&
        p.ratio() <= table_trust_max_ratio) {
        CellData cell;
        if (tables.lookup(p.gamma, p.ratio(), cell)) {
            Sampler s(p, cell);
            return s.draw(rng, st);
        }
    }
    Sampler s(p);
    return s.draw(rng, st);
}

}  // namespace mghs::g3p

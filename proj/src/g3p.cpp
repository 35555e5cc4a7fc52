#include "mghs/g3p.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mghs/quadrature.hpp"
#include "mghs/specfun.hpp"

namespace mghs::g3p {

namespace {

constexpr double sqrt2 = 1.4142135623730951;
constexpr double log_2pi = 1.8378770664093453;

// The standardized problem at alpha = 1, beta = rho, in t = (x - m1)/s1
// coordinates. g is the standardized target, h the N(0, omega^2) proposal.
struct StdProblem {
    int gamma;
    double rho;
    double m1, s1, log_cf1;
    double omega1;  // proposal sd
    double k1;      // rho - 2 m1, negative
    double log_a;   // log r(t) = log_a + gamma log x + k1 x, x = m1 + s1 t

    static StdProblem from(int gamma, double rho, double m1, double s1,
                           double log_cf1) {
        StdProblem sp;
        sp.gamma = gamma;
        sp.rho = rho;
        sp.m1 = m1;
        sp.s1 = s1;
        sp.log_cf1 = log_cf1;
        sp.omega1 = 1.0 / (sqrt2 * s1);
        sp.k1 = rho - 2.0 * m1;
        sp.log_a = std::log(sp.omega1 * s1) + 0.5 * log_2pi + log_cf1 + m1 * m1;
        return sp;
    }

    double x_of(double t) const { return m1 + s1 * t; }

    double log_r(double t) const {
        double x = x_of(t);
        if (x <= 0.0) return -std::numeric_limits<double>::infinity();
        return log_a + gamma * std::log(x) + k1 * x;
    }

    double g(double t) const {
        double x = x_of(t);
        if (x <= 0.0) return 0.0;
        return s1 * std::exp(log_cf1 + gamma * std::log(x) - x * x + rho * x);
    }

    double h(double t) const {
        return std::exp(-0.5 * t * t / (omega1 * omega1)) /
               (omega1 * std::sqrt(2.0 * M_PI));
    }

    double d(double t) const { return g(t) - h(t); }

    double dg(double t) const {  // g'
        double x = x_of(t);
        if (x <= 0.0) return 0.0;
        return g(t) * s1 * (gamma / x - 2.0 * x + rho);
    }
    double ddg(double t) const {  // g''
        double x = x_of(t);
        if (x <= 0.0) return 0.0;
        double u = s1 * (gamma / x - 2.0 * x + rho);
        return g(t) * (u * u + s1 * s1 * (-gamma / (x * x) - 2.0));
    }
    double dh(double t) const { return -t / (omega1 * omega1) * h(t); }
    double ddh(double t) const {
        double w2 = omega1 * omega1;
        return (t * t / (w2 * w2) - 1.0 / w2) * h(t);
    }
    double dd(double t) const { return dg(t) - dh(t); }
    double ddd(double t) const { return ddg(t) - ddh(t); }

    // mode of g in t-space (stationary point of gamma log x - x^2 + rho x)
    double t_mode() const {
        double x = (rho + std::sqrt(rho * rho + 8.0 * gamma)) / 4.0;
        return (x - m1) / s1;
    }
};

StdProblem std_problem(const CellData& cell, int gamma, double rho) {
    return StdProblem::from(gamma, rho, cell.m1, cell.s1, cell.log_cf1);
}

// Dieter's two-point tangency conditions for the optimal Laplace hat:
//   d'(L) =  d(L)/delta,  d'(R) = -d(R)/delta,  delta = (R - L)/2.
// Solved by nested bisection: for fixed delta the tangency points are roots
// of the monotone log-slope (log d)' -/+ 1/delta on either side of the peak,
// and (R(delta) - L(delta))/2 - delta decreases in delta, so the outer
// problem brackets too. Newton on this system can collapse into the
// degenerate root L = R at an endpoint where d vanishes; bisection cannot.
bool solve_laplace(const StdProblem& sp, double t1, double t2, CellData& cell) {
    const double span = t2 - t1;
    const double edge = 1e-9 * span;

    // peak of d
    double t_peak = t1, d_peak = 0.0;
    for (int i = 1; i < 512; ++i) {
        double t = t1 + span * i / 512.0;
        double v = sp.d(t);
        if (v > d_peak) {
            d_peak = v;
            t_peak = t;
        }
    }
    if (!(d_peak > 0.0)) return false;
    {  // refine the peak by bisection on d'
        double lo = std::max(t1 + edge, t_peak - span / 256.0);
        double hi = std::min(t2 - edge, t_peak + span / 256.0);
        if (sp.dd(lo) > 0.0 && sp.dd(hi) < 0.0) {
            for (int it = 0; it < 80 && hi - lo > 1e-13 * span; ++it) {
                double mid = 0.5 * (lo + hi);
                (sp.dd(mid) > 0.0 ? lo : hi) = mid;
            }
            t_peak = 0.5 * (lo + hi);
        }
    }
    d_peak = sp.d(t_peak);

    // tangency point on one side: root of d'(t) * delta -/+ d(t)
    auto side_root = [&](double delta, bool left) {
        double lo = left ? t1 + edge : t_peak;
        double hi = left ? t_peak : t2 - edge;
        auto fun = [&](double t) {
            return left ? sp.dd(t) * delta - sp.d(t) : sp.dd(t) * delta + sp.d(t);
        };
        double flo = fun(lo), fhi = fun(hi);
        if (flo == 0.0) return lo;
        if (fhi == 0.0) return hi;
        if (flo * fhi > 0.0)  // no tangency on this side for this delta
            return left ? (flo > 0.0 ? t_peak : lo) : (fhi > 0.0 ? hi : t_peak);
        for (int it = 0; it < 90; ++it) {
            double mid = 0.5 * (lo + hi);
            double fm = fun(mid);
            if (fm == 0.0) return mid;
            if (flo * fm < 0.0) {
                hi = mid;
            } else {
                lo = mid;
                flo = fm;
            }
            if (hi - lo < 1e-13 * span) break;
        }
        return 0.5 * (lo + hi);
    };

    // (R(delta) - L(delta))/2 - delta: positive for small delta, negative
    // for large, decreasing
    auto mismatch = [&](double delta) {
        double L = side_root(delta, true);
        double R = side_root(delta, false);
        return 0.5 * (R - L) - delta;
    };

    double dlo = 1e-6 * span, dhi = 2.0 * span;
    double mlo = mismatch(dlo), mhi = mismatch(dhi);
    if (!(mlo > 0.0 && mhi < 0.0)) return false;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (dlo + dhi);
        double mm = mismatch(mid);
        if (mm > 0.0) {
            dlo = mid;
        } else {
            dhi = mid;
        }
        if (dhi - dlo < 1e-13 * span) break;
    }
    double delta = 0.5 * (dlo + dhi);
    double L = side_root(delta, true);
    double R = side_root(delta, false);
    if (!(t1 < L && L < R && R < t2)) return false;
    if (R - L < 1e-4 * span) return false;  // degenerate pinch

    double dL = sp.d(L), dR = sp.d(R);
    if (!(dL > 1e-12 * d_peak && dR > 1e-12 * d_peak)) return false;
    // residual check of the tangency conditions
    double res = std::abs(sp.dd(L) * delta - dL) + std::abs(sp.dd(R) * delta + dR);
    if (!(res < 1e-6 * d_peak)) return false;
    double b = 0.5 * (L + R + delta * std::log(dR / dL));
    double c = std::exp(1.0) * std::sqrt(2.0 * M_PI * dR * dL);
    // the tangency construction should dominate d on [t1, t2]; verify on a
    // grid and inflate c if roundoff left a sliver above the hat
    double max_ratio = 0.0;
    const int n_scan = 400;
    for (int i = 0; i <= n_scan; ++i) {
        double t = t1 + (t2 - t1) * i / n_scan;
        double s = c / std::sqrt(2.0 * M_PI) * std::exp(-std::abs(t - b) / delta);
        if (s > 0.0) max_ratio = std::max(max_ratio, sp.d(t) / s);
    }
    if (max_ratio > 1.0) c *= max_ratio * (1.0 + 1e-12);
    cell.lap_L = L;
    cell.lap_R = R;
    cell.lap_delta = delta;
    cell.lap_b = b;
    cell.lap_c = c;
    cell.laplace_ok = 1;
    return true;
}

}  // namespace

void Params::validate() const {
    if (gamma < 1) throw std::invalid_argument("g3p: gamma must be >= 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("g3p: alpha must be > 0");
    if (!std::isfinite(beta)) throw std::invalid_argument("g3p: beta must be finite");
}

Regime classify(const Params& p) {
    p.validate();
    double rho = p.ratio();
    if (rho <= gamma_limit_ratio) return Regime::GammaLimit;
    if (p.gamma >= normal_gamma_order) return Regime::NormalGamma;
    if (rho >= normal_beta_ratio) return Regime::NormalBeta;
    return Regime::Exact;
}

Moments moments_exact(const Params& p) {
    p.validate();
    double z = -p.beta / (p.alpha * sqrt2);
    double r1 = specfun::pcf_ratio(p.gamma + 1.0, z);
    double r2 = specfun::pcf_ratio(p.gamma + 2.0, z);
    double mean = r1 / (p.alpha * sqrt2);
    double var = r1 * r2 / (2.0 * p.alpha * p.alpha) - mean * mean;
    return {mean, var};
}

Moments normal_limit_moments(const Params& p, NormalKind kind) {
    double a2 = p.alpha * p.alpha;
    if (kind == NormalKind::Beta)
        return {p.beta / (2.0 * a2), 1.0 / (2.0 * a2)};
    // large-gamma form: both Parabolic Cylinder ratios replaced by the sharp
    // approximation (-z + sqrt(z^2 + 4 nu - 2))/2, keeping the variance
    // positive for every gamma
    double z = -p.beta / (p.alpha * sqrt2);
    double r1 = 0.5 * (std::sqrt(z * z + 4.0 * (p.gamma + 1.0) - 2.0) - z);
    double r2 = 0.5 * (std::sqrt(z * z + 4.0 * (p.gamma + 2.0) - 2.0) - z);
    double mean = r1 / (p.alpha * sqrt2);
    double var = r1 * r2 / (2.0 * a2) - mean * mean;
    return {mean, var};
}

Moments moments(const Params& p) {
    switch (classify(p)) {
        case Regime::GammaLimit: {
            double c = -p.beta;
            return {(p.gamma + 1.0) / c, (p.gamma + 1.0) / (c * c)};
        }
        case Regime::NormalBeta:
            return normal_limit_moments(p, NormalKind::Beta);
        case Regime::NormalGamma:
            return normal_limit_moments(p, NormalKind::Gamma);
        case Regime::Exact:
        default:
            return moments_exact(p);
    }
}

double log_normalizer(const Params& p) {
    p.validate();
    double a2 = p.alpha * p.alpha;
    double z = -p.beta / (p.alpha * sqrt2);
    return -p.beta * p.beta / (8.0 * a2) + 0.5 * (p.gamma + 1.0) * std::log(2.0 * a2)
           - std::lgamma(p.gamma + 1.0) - specfun::pcf_d_log(-p.gamma - 1.0, z);
}

double log_density(const Params& p, double x) {
    if (!(x > 0.0)) throw std::domain_error("g3p::log_density: x must be > 0");
    return log_normalizer(p) + p.gamma * std::log(x) - p.alpha * p.alpha * x * x
           + p.beta * x;
}

double cdf_gamma1(double alpha, double beta, double x) {
    if (!(alpha > 0.0)) throw std::invalid_argument("cdf_gamma1: alpha must be > 0");
    if (x < 0.0) throw std::domain_error("cdf_gamma1: x must be >= 0");
    if (x == 0.0) return 0.0;
    // With w(u) = alpha u + w0, w0 = -beta/(2 alpha), the upper tail mass is
    // proportional to V(w) = e^{-w^2}/2 - w0 (sqrt(pi)/2) erfc(w), and
    // F(x) = 1 - V(w(x))/V(w0).
    const double w0 = -beta / (2.0 * alpha);
    const double hsp = 0.5 * std::sqrt(M_PI);
    auto V = [&](double w) {
        if (w >= 0.0)
            return std::exp(-w * w) * (0.5 - w0 * hsp * specfun::erfcx(w));
        return 0.5 * std::exp(-w * w) - w0 * hsp * std::erfc(w);
    };
    double w1 = alpha * x + w0;
    double f = 1.0 - V(w1) / V(w0);
    return std::clamp(f, 0.0, 1.0);
}

CellData compute_cell_basic(int gamma, double rho) {
    Params unit{gamma, 1.0, rho};
    Moments m = moments_exact(unit);
    if (!(m.var > 0.0)) throw std::runtime_error("g3p: nonpositive variance");
    CellData cell;
    cell.m1 = m.mean;
    cell.s1 = std::sqrt(m.var);
    cell.log_cf1 = log_normalizer(unit);
    StdProblem sp = std_problem(cell, gamma, rho);
    if (!(sp.k1 < 0.0))
        throw std::runtime_error("g3p: beta - 2 mu alpha^2 not negative");

    // crossings of r(t) = 1: x = (gamma/k1) W((k1/gamma) e^{-log_a/gamma})
    double warg = (sp.k1 / gamma) * std::exp(-sp.log_a / gamma);
    const double min_warg = -std::exp(-1.0);
    if (warg < min_warg) {
        if (warg < min_warg * (1.0 + 1e-9))
            throw std::runtime_error("g3p: r(tmax) < 1, hat construction impossible");
        warg = min_warg;  // roundoff grazing the branch point
    }
    double xa = (gamma / sp.k1) * specfun::lambert_w(warg, specfun::WBranch::Principal);
    double xb = (gamma / sp.k1) * specfun::lambert_w(warg, specfun::WBranch::NegativeOne);
    cell.t1 = (xa - cell.m1) / cell.s1;
    cell.t2 = (xb - cell.m1) / cell.s1;
    if (!(cell.t1 < cell.t2)) throw std::runtime_error("g3p: t1 >= t2");
    cell.laplace_ok = 0;
    return cell;
}

void attach_laplace(CellData& cell, int gamma, double rho) {
    StdProblem sp = std_problem(cell, gamma, rho);
    if (!solve_laplace(sp, cell.t1, cell.t2, cell)) {
        cell.laplace_ok = 0;
        cell.lap_L = cell.lap_R = cell.lap_delta = cell.lap_b = cell.lap_c = 0.0;
    }
}

CellData compute_cell(int gamma, double rho) {
    CellData cell = compute_cell_basic(gamma, rho);
    attach_laplace(cell, gamma, rho);
    return cell;
}

Sampler::Sampler(const Params& p) : params_(p) {
    p.validate();
    beta_zero_ = (p.beta == 0.0);
    regime_ = classify(p);
    if (beta_zero_) return;
    switch (regime_) {
        case Regime::Exact:
            prepare_exact();
            break;
        case Regime::GammaLimit:
        case Regime::NormalBeta:
        case Regime::NormalGamma:
            limit_moments_ = moments(p);
            break;
    }
}

Sampler::Sampler(const Params& p, const CellData& cell) : params_(p) {
    p.validate();
    beta_zero_ = (p.beta == 0.0);
    regime_ = classify(p);
    if (beta_zero_ || regime_ != Regime::Exact) {
        if (!beta_zero_) limit_moments_ = moments(p);
        return;
    }
    from_table_ = true;
    lap_attempted_ = true;
    cell_ = cell;
    StdProblem sp = std_problem(cell_, params_.gamma, params_.ratio());
    omega1_ = sp.omega1;
    k1_ = sp.k1;
    log_a_ = sp.log_a;
    tmax_ = (-params_.gamma / k1_ - cell_.m1) / cell_.s1;
    d_max_ = sp.g(sp.t_mode());
}

void Sampler::prepare_exact() {
    cell_ = compute_cell_basic(params_.gamma, params_.ratio());
    StdProblem sp = std_problem(cell_, params_.gamma, params_.ratio());
    omega1_ = sp.omega1;
    k1_ = sp.k1;
    log_a_ = sp.log_a;
    tmax_ = (-params_.gamma / k1_ - cell_.m1) / cell_.s1;
    d_max_ = sp.g(sp.t_mode());
}

void Sampler::ensure_laplace() const {
    if (lap_attempted_) return;
    lap_attempted_ = true;
    attach_laplace(cell_, params_.gamma, params_.ratio());
}

HatParams Sampler::hat() const {
    if (regime_ != Regime::Exact || beta_zero_)
        throw std::logic_error("g3p::Sampler::hat: only defined in the exact regime");
    ensure_laplace();
    HatParams h;
    h.omega2 = omega1_ * omega1_;
    h.t1 = cell_.t1;
    h.t2 = cell_.t2;
    h.tmax = tmax_;
    h.lap_b = cell_.lap_b;
    h.lap_c = cell_.lap_c;
    h.lap_delta = cell_.lap_delta;
    h.lap_L = cell_.lap_L;
    h.lap_R = cell_.lap_R;
    h.laplace_ok = cell_.laplace_ok != 0;
    return h;
}

double Sampler::log_ratio(double t) const {
    double x = cell_.m1 + cell_.s1 * t;
    if (x <= 0.0) return -std::numeric_limits<double>::infinity();
    return log_a_ + params_.gamma * std::log(x) + k1_ * x;
}

double Sampler::diff_density(double t) const {
    StdProblem sp = std_problem(cell_, params_.gamma, params_.ratio());
    return sp.d(t);
}

double Sampler::draw(Rng& rng) const {
    DrawStats scratch;
    return draw(rng, scratch);
}

double Sampler::draw(Rng& rng, DrawStats& stats) const {
    ++stats.calls;
    if (beta_zero_) {
        // density ~ x^gamma e^{-alpha^2 x^2}: x = sqrt(G), G ~ Gamma((gamma+1)/2, alpha^2)
        ++stats.proposals;
        return std::sqrt(rng.gamma(0.5 * (params_.gamma + 1.0),
                                   params_.alpha * params_.alpha));
    }
    switch (regime_) {
        case Regime::GammaLimit:
            ++stats.proposals;
            return rng.gamma(params_.gamma + 1.0, -params_.beta);
        case Regime::NormalBeta:
        case Regime::NormalGamma: {
            double sd = std::sqrt(limit_moments_.var);
            for (;;) {
                ++stats.proposals;
                double x = rng.normal(limit_moments_.mean, sd);
                if (x > 0.0) return x;
            }
        }
        case Regime::Exact:
        default:
            return draw_exact(rng, stats);
    }
}

namespace {

// draws from the difference density via its Laplace hat; NaN once max_trials
// proposals failed
double draw_diff_laplace(const CellData& cell, const StdProblem& sp, Rng& rng,
                         DrawStats& stats, std::uint64_t max_trials) {
    for (std::uint64_t trial = 0; trial < max_trials; ++trial) {
        ++stats.inner_trials;
        ++stats.proposals;
        double tt = rng.laplace(cell.lap_b, cell.lap_delta);
        if (tt < cell.t1 || tt > cell.t2) continue;
        double s = cell.lap_c / std::sqrt(2.0 * M_PI) *
                   std::exp(-std::abs(tt - cell.lap_b) / cell.lap_delta);
        if (rng.uniform() * s <= sp.d(tt)) return tt;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

// flat envelope at the analytic max of g, which bounds d everywhere
double draw_diff_flat(const CellData& cell, const StdProblem& sp, Rng& rng,
                      DrawStats& stats) {
    const double d_max = sp.g(sp.t_mode());
    for (std::uint64_t trial = 0; trial < 100000000ULL; ++trial) {
        ++stats.inner_trials;
        ++stats.proposals;
        double tt = rng.uniform(cell.t1, cell.t2);
        if (rng.uniform() * d_max <= sp.d(tt)) return tt;
    }
    throw std::runtime_error("g3p: difference-density rejection failed to accept");
}

}  // namespace

double Sampler::draw_exact(Rng& rng, DrawStats& stats) const {
    const double inv_alpha = 1.0 / params_.alpha;
    // Step 1: Gaussian proposal, immediate accept inside [t1, t2]
    ++stats.proposals;
    double t = rng.normal(0.0, omega1_);
    if (t >= cell_.t1 && t <= cell_.t2) {
        ++stats.step1;
        return (cell_.m1 + cell_.s1 * t) * inv_alpha;
    }
    // Step 2: accept with probability r(t)
    if (std::log(rng.uniform()) <= log_ratio(t)) {
        ++stats.step2;
        return (cell_.m1 + cell_.s1 * t) * inv_alpha;
    }
    // Step 3: draw from d(t) = g - h on [t1, t2]. Interpolated parameters
    // get a short trial budget: where g and h nearly coincide the
    // interpolation error can swamp the tiny difference density, so fall
    // back to exactly recomputed parameters rather than spin.
    ensure_laplace();
    StdProblem sp = std_problem(cell_, params_.gamma, params_.ratio());
    double tt = std::numeric_limits<double>::quiet_NaN();
    if (cell_.laplace_ok)
        tt = draw_diff_laplace(cell_, sp, rng, stats,
                               from_table_ ? 64 : 100000000ULL);
    else if (!from_table_)
        tt = draw_diff_flat(cell_, sp, rng, stats);
    if (std::isnan(tt)) {
        CellData exact = compute_cell(params_.gamma, params_.ratio());
        StdProblem spe = std_problem(exact, params_.gamma, params_.ratio());
        tt = exact.laplace_ok
                 ? draw_diff_laplace(exact, spe, rng, stats, 100000000ULL)
                 : draw_diff_flat(exact, spe, rng, stats);
        if (std::isnan(tt))
            throw std::runtime_error("g3p: difference-density draw failed");
        ++stats.step3;
        return (exact.m1 + exact.s1 * tt) * inv_alpha;
    }
    ++stats.step3;
    return (cell_.m1 + cell_.s1 * tt) * inv_alpha;
}

HatParams hat_params(const Params& p, const Moments& m) {
    if (classify(p) != Regime::Exact)
        throw std::logic_error("g3p::hat_params: only defined in the exact regime");
    (void)m;  // the hat is scale-free; moments are implied by (gamma, beta/alpha)
    Sampler s(p);
    return s.hat();
}

StepProbs step_acceptance_probs(const Params& p) {
    if (classify(p) != Regime::Exact || p.beta == 0.0)
        throw std::logic_error("g3p::step_acceptance_probs: exact regime only");
    CellData cell = compute_cell(p.gamma, p.ratio());
    StdProblem sp = std_problem(cell, p.gamma, p.ratio());
    StepProbs out;
    out.p1 = specfun::normal_cdf(cell.t2 / sp.omega1) -
             specfun::normal_cdf(cell.t1 / sp.omega1);
    out.p3 = integrate_gk([&](double t) { return sp.d(t); }, cell.t1, cell.t2, 1e-10);
    out.p2 = 1.0 - out.p1 - out.p3;
    return out;
}

double sample(const Params& p, Rng& rng) {
    Sampler s(p);
    return s.draw(rng);
}

double kl_gamma_limit(const Params& p) {
    p.validate();
    Moments m = moments_exact(p);
    double d = m.mean * m.mean / m.var;
    double c = m.mean / m.var;
    double a2 = p.alpha * p.alpha;
    double z = -p.beta / (p.alpha * sqrt2);
    double log_front = 0.5 * (p.gamma + 1.0) * std::log(2.0 * a2)
                       - p.beta * p.beta / (8.0 * a2)
                       - specfun::pcf_d_log(-p.gamma - 1.0, z);
    return (p.gamma + 1.0) * std::log(c) + (d - 1.0 - p.gamma) * specfun::digamma(d)
           - d * (1.0 + p.beta / c - a2 * (d + 1.0) / (c * c))
           + std::lgamma(p.gamma + 1.0) - std::lgamma(d) - log_front;
}

KlPair kl_normal_limit(const Params& p, NormalKind kind, int grid_points) {
    p.validate();
    Moments nm = normal_limit_moments(p, kind);
    double m = nm.mean, s = std::sqrt(nm.var);
    double lo = m - 5.0 * s, hi = m + 5.0 * s;
    std::vector<double> lq, lp;
    lq.reserve(grid_points);
    lp.reserve(grid_points);
    double a2 = p.alpha * p.alpha;
    for (int i = 0; i < grid_points; ++i) {
        double x = lo + (hi - lo) * i / (grid_points - 1);
        if (x <= 0.0) continue;
        lq.push_back(p.gamma * std::log(x) - a2 * x * x + p.beta * x);
        lp.push_back(-0.5 * (x - m) * (x - m) / nm.var);
    }
    if (lq.size() < 2) throw std::runtime_error("kl_normal_limit: empty grid");
    auto normalize = [](std::vector<double>& lv) {
        double mx = *std::max_element(lv.begin(), lv.end());
        double sum = 0.0;
        for (double& v : lv) {
            v = std::exp(v - mx);
            sum += v;
        }
        for (double& v : lv) v /= sum;
    };
    normalize(lq);
    normalize(lp);
    KlPair out;
    for (std::size_t i = 0; i < lq.size(); ++i) {
        if (lq[i] > 0.0 && lp[i] > 0.0) {
            out.qp += lq[i] * (std::log(lq[i]) - std::log(lp[i]));
            out.pq += lp[i] * (std::log(lp[i]) - std::log(lq[i]));
        }
    }
    return out;
}

}  // namespace mghs::g3p

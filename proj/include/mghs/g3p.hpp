#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mghs/rng.hpp"

namespace mghs::g3p {

// Three-parameter Gamma: density proportional to x^gamma exp(-alpha^2 x^2 + beta x)
// on x > 0. alpha is the square-rooted quadratic coefficient; callers holding
// a "1/eta + w^2/(2 tau^2 mu)"-style coefficient pass its square root.
struct Params {
    int gamma = 1;       // positive integer
    double alpha = 1.0;  // > 0
    double beta = 0.0;   // any sign; 0 routes to the exact sqrt-Gamma case

    double ratio() const { return beta / alpha; }
    void validate() const;
};

struct Moments {
    double mean = 0.0;
    double var = 0.0;
};

enum class Regime { Exact, GammaLimit, NormalBeta, NormalGamma };

// Deterministic regime thresholds. The Kullback-Leibler tables show the
// limit densities are indistinguishable well inside these bounds.
Regime classify(const Params& p);

inline constexpr double gamma_limit_ratio = -20.0;   // beta/alpha below this
inline constexpr double normal_beta_ratio = 50.0;    // beta/alpha above this
inline constexpr int normal_gamma_order = 200;       // gamma at or above this

// Mean and variance. Exact regime uses the Parabolic Cylinder ratio
// formulas, limit regimes use their closed-form approximations.
Moments moments(const Params& p);

// Exact D-ratio moments regardless of regime (needs gamma below the
// pcf_ratio approximation threshold to be truly exact).
Moments moments_exact(const Params& p);

// log of the normalizing constant C_f of the density.
double log_normalizer(const Params& p);

// Normalized log-density; throws std::domain_error for x <= 0.
double log_density(const Params& p, double x);

// Closed-form CDF for gamma = 1 via the error function family.
// F(x) = int_0^x C u exp(-alpha^2 u^2 + beta u) du.
double cdf_gamma1(double alpha, double beta, double x);

// Everything the modified rejection sampler needs, in the standardized
// t = (x - mean)/sd coordinate. All fields are scale-free: they depend on
// (gamma, beta/alpha) only.
struct HatParams {
    double omega2 = 0.0;  // proposal variance 1/(2 alpha^2 sigma^2)
    double t1 = 0.0;      // lower crossing of r(t) = g(t)/h(t) with 1 (W_0)
    double t2 = 0.0;      // upper crossing (W_{-1})
    double tmax = 0.0;    // argmax of r
    // Laplace hat s(t) = (c/sqrt(2 pi)) exp(-|t - b|/delta) covering
    // d(t) = g(t) - h(t) on [t1, t2], touching at L and R
    double lap_b = 0.0;
    double lap_c = 0.0;
    double lap_delta = 0.0;
    double lap_L = 0.0;
    double lap_R = 0.0;
    bool laplace_ok = false;  // Newton converged; if false step 3 uses a
                              // flat envelope over [t1, t2] instead
};

HatParams hat_params(const Params& p, const Moments& m);

struct StepProbs {
    double p1 = 0.0;  // immediate accept
    double p2 = 0.0;  // ratio accept
    double p3 = 0.0;  // difference-distribution draw
};

// Acceptance probability of each sampler step (Exact regime only).
StepProbs step_acceptance_probs(const Params& p);

// Instrumentation counters across draw calls.
struct DrawStats {
    std::uint64_t calls = 0;
    std::uint64_t proposals = 0;      // Gaussian + Laplace + truncation draws
    std::uint64_t step1 = 0;
    std::uint64_t step2 = 0;
    std::uint64_t step3 = 0;
    std::uint64_t inner_trials = 0;   // Laplace proposals inside step 3

    double proposals_per_call() const {
        return calls ? static_cast<double>(proposals) / static_cast<double>(calls) : 0.0;
    }
};

// Scale-free per-(gamma, rho) payload shared by the direct path and the
// tabulation cache.
struct CellData {
    double m1 = 0.0;      // mean of G3p(gamma, 1, rho)
    double s1 = 0.0;      // sd of G3p(gamma, 1, rho)
    double log_cf1 = 0.0; // log normalizer at alpha = 1
    double t1 = 0.0, t2 = 0.0;
    double lap_L = 0.0, lap_R = 0.0, lap_delta = 0.0, lap_b = 0.0, lap_c = 0.0;
    std::uint8_t laplace_ok = 0;
};

// A sampler prepared once for fixed parameters; draw() is then cheap and
// exact. Parameter setup costs a few Parabolic Cylinder quadratures plus a
// Newton solve, so chains with per-edge parameters should go through
// SamplerTables instead.
class Sampler {
public:
    explicit Sampler(const Params& p);
    Sampler(const Params& p, const CellData& cell);  // table-backed

    double draw(Rng& rng) const;
    double draw(Rng& rng, DrawStats& stats) const;

    Regime regime() const { return regime_; }
    const Params& params() const { return params_; }
    HatParams hat() const;
    Moments standardized_moments() const { return {cell_.m1, cell_.s1 * cell_.s1}; }

private:
    void prepare_exact();
    double draw_exact(Rng& rng, DrawStats& stats) const;
    double log_ratio(double t) const;   // log r(t)
    double diff_density(double t) const;  // d(t) = g(t) - h(t)

    void ensure_laplace() const;

    Params params_;
    Regime regime_ = Regime::Exact;
    bool beta_zero_ = false;
    bool from_table_ = false;  // hat parameters are interpolated
    Moments limit_moments_{};  // for the limit regimes
    // Laplace-hat fields are filled on first use; the band and ratio
    // constants are eager
    mutable CellData cell_{};
    mutable bool lap_attempted_ = false;
    // derived from cell_
    double omega1_ = 0.0;  // proposal sd in t-space
    double k1_ = 0.0;      // rho - 2 m1 (< 0)
    double log_a_ = 0.0;   // log r(t) = log_a + gamma log x1 + k1 x1
    double tmax_ = 0.0;
    double d_max_ = 0.0;   // max of d(t), envelope for the fallback path

    friend CellData compute_cell(int gamma, double rho);
};

// One exact draw with throwaway preparation. Fine for one-off use.
double sample(const Params& p, Rng& rng);

// --- Kullback-Leibler diagnostics -----------------------------------------

// Closed-form KL(p||q) between the moment-matched Gamma p and the G3p q;
// goes to zero as beta/alpha -> -infinity.
double kl_gamma_limit(const Params& p);

struct KlPair {
    double qp = 0.0;  // KL(q||p), q = G3p
    double pq = 0.0;  // KL(p||q), p = Normal
};

enum class NormalKind { Beta, Gamma };  // which limit supplies the moments

// Discrete-grid KL between the G3p and its Normal approximation, evaluated
// over (m - 5s, m + 5s) restricted to x > 0 with both densities
// renormalized there.
KlPair kl_normal_limit(const Params& p, NormalKind kind, int grid_points = 10001);

// Moments of the Normal approximation used by kl_normal_limit.
Moments normal_limit_moments(const Params& p, NormalKind kind);

// --- tabulation cache -------------------------------------------------------

// Scale-free hat-parameter cache over a (gamma, beta/alpha) grid. Lookups at
// a gamma knot interpolate linearly between the bracketing ratio knots;
// anything else falls through to direct computation.
class SamplerTables {
public:
    static SamplerTables build(std::vector<int> gamma_knots,
                               std::vector<double> ratio_knots);
    static SamplerTables build_default();

    // nullptr when (gamma, rho) is off the grid.
    bool lookup(int gamma, double rho, CellData& out) const;

    const std::vector<int>& gamma_knots() const { return gamma_knots_; }
    const std::vector<double>& ratio_knots() const { return ratio_knots_; }
    const CellData& cell(std::size_t gi, std::size_t ri) const {
        return cells_[gi * ratio_knots_.size() + ri];
    }

    void save(const std::string& path) const;
    static SamplerTables load(const std::string& path);

    bool operator==(const SamplerTables& other) const;

private:
    std::vector<int> gamma_knots_;
    std::vector<double> ratio_knots_;
    std::vector<CellData> cells_;
};

// Default ratio knots: uniform in asinh between gamma_limit_ratio and
// normal_beta_ratio (dense near zero where the hat geometry bends fastest).
// The default count keeps the interpolation error of the acceptance ratio
// small even near the upper boundary where g and h nearly coincide.
std::vector<double> default_ratio_knots(int count = 192);
std::vector<int> default_gamma_knots();

// Scale-free payload for one (gamma, rho); the building block of both the
// direct Sampler and the tables.
CellData compute_cell(int gamma, double rho);
// Everything but the Laplace hat (cheap: closed forms for small gamma).
CellData compute_cell_basic(int gamma, double rho);
// Solve for the Laplace hat in place; leaves laplace_ok = 0 on failure.
void attach_laplace(CellData& cell, int gamma, double rho);

// Above this ratio the difference density g - h is so small that linear
// interpolation distorts it; lookups defer to direct computation instead.
inline constexpr double table_trust_max_ratio = 10.0;

// Draw using the tables when the parameters are on the grid (and inside the
// trusted ratio window), the direct path otherwise.
double sample_with_tables(const Params& p, const SamplerTables& tables, Rng& rng,
                          DrawStats* stats = nullptr);

}  // namespace mghs::g3p

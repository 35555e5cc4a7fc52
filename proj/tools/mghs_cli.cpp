// Command-line front end: scenario simulation, chain fitting, edge
// selection, metrics, sampler self-checks and convergence diagnostics.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "mghs/chain.hpp"
#include "mghs/diagnostics.hpp"
#include "mghs/g3p.hpp"
#include "mghs/io.hpp"
#include "mghs/metrics.hpp"
#include "mghs/selection.hpp"
#include "mghs/simulate.hpp"

using json = nlohmann::json;
using Eigen::MatrixXd;

namespace {

constexpr const char* mghs_version = "0.1.0";

struct FitOptions {
    std::string data_dir;
    std::vector<std::string> data_files;
    std::string out_dir = "fit_out";
    int chains = 1;
    int burnin = 5000;
    int iters = 10000;
    int thin = 5;
    std::uint64_t seed = 1;
    int threads = 0;  // 0 = one per chain up to hardware
    bool freeze_r = false;
    bool standardize = true;
    std::string select_mode = "cut";  // cut | mpm | none
    double a = 30.0;
    double b = 25.0;
    bool hastings_correction = false;
    bool track_omega = false;
    std::string table_cache;
};

json effective_config(const FitOptions& o) {
    return json{{"data_dir", o.data_dir},
                {"data_files", o.data_files},
                {"out_dir", o.out_dir},
                {"chains", o.chains},
                {"burnin", o.burnin},
                {"iters", o.iters},
                {"thin", o.thin},
                {"seed", o.seed},
                {"threads", o.threads},
                {"freeze_r", o.freeze_r},
                {"standardize", o.standardize},
                {"select_mode", o.select_mode},
                {"a", o.a},
                {"b", o.b},
                {"hastings_correction", o.hastings_correction},
                {"track_omega", o.track_omega},
                {"table_cache", o.table_cache}};
}

void apply_config_file(FitOptions& o, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file " + path);
    json j;
    is >> j;
    for (auto& [key, value] : j.items()) {
        if (key == "data_dir") o.data_dir = value.get<std::string>();
        else if (key == "data_files") o.data_files = value.get<std::vector<std::string>>();
        else if (key == "out_dir") o.out_dir = value.get<std::string>();
        else if (key == "chains") o.chains = value.get<int>();
        else if (key == "burnin") o.burnin = value.get<int>();
        else if (key == "iters") o.iters = value.get<int>();
        else if (key == "thin") o.thin = value.get<int>();
        else if (key == "seed") o.seed = value.get<std::uint64_t>();
        else if (key == "threads") o.threads = value.get<int>();
        else if (key == "freeze_r") o.freeze_r = value.get<bool>();
        else if (key == "standardize") o.standardize = value.get<bool>();
        else if (key == "select_mode") o.select_mode = value.get<std::string>();
        else if (key == "a") o.a = value.get<double>();
        else if (key == "b") o.b = value.get<double>();
        else if (key == "hastings_correction") o.hastings_correction = value.get<bool>();
        else if (key == "track_omega") o.track_omega = value.get<bool>();
        else if (key == "table_cache") o.table_cache = value.get<std::string>();
        else throw std::runtime_error("unknown config key: " + key);
    }
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const json& config, const std::vector<std::string>& inputs,
                    double seconds) {
    json m;
    m["command"] = command;
    m["version"] = mghs_version;
    m["config"] = config;
    json digests = json::object();
    for (const auto& path : inputs) digests[path] = mghs::io::file_digest(path);
    m["input_digests"] = digests;
    m["seconds"] = seconds;
    std::ofstream os(out_dir + "/manifest.json");
    os << m.dump(2) << "\n";
}

std::string group_path(const std::string& dir, const std::string& stem, int k) {
    return dir + "/" + stem + "_" + std::to_string(k + 1) + ".csv";
}

// ---------------------------------------------------------------------------

int cmd_simulate(const std::string& scenario, int K, int p, int n, int block_size,
                 double edge_prob, double perturb_frac, std::uint64_t seed,
                 const std::string& out_dir) {
    auto t0 = std::chrono::steady_clock::now();
    mghs::simulate::ScenarioSpec spec;
    spec.scenario = mghs::simulate::scenario_from_name(scenario);
    spec.K = K;
    spec.p = p;
    spec.n = n;
    spec.block_size = block_size;
    spec.edge_prob = edge_prob;
    spec.perturb_frac = perturb_frac;
    spec.seed = seed;
    auto data = mghs::simulate::generate_scenario(spec);

    mghs::io::ensure_directory(out_dir);
    for (int k = 0; k < K; ++k) {
        mghs::io::write_csv_matrix(group_path(out_dir, "group", k),
                                   data.observations[k]);
        mghs::io::write_csv_matrix(group_path(out_dir, "truth_omega", k),
                                   data.truth.omega[k]);
        mghs::io::write_csv_matrix(group_path(out_dir, "truth_adjacency", k),
                                   data.truth.adjacency[k]);
    }
    json cfg{{"scenario", scenario}, {"K", K},     {"p", p},
             {"n", n},               {"block_size", block_size},
             {"edge_prob", edge_prob}, {"perturb_frac", perturb_frac},
             {"seed", seed},         {"out_dir", out_dir},
             {"regenerated_blocks", data.truth.regenerated_blocks}};
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(out_dir, "simulate", cfg, {}, secs);
    std::cout << "wrote " << K << " groups (" << n << " x " << p << ") to "
              << out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

std::vector<MatrixXd> load_groups(const FitOptions& o,
                                  std::vector<std::string>& used_paths) {
    std::vector<std::string> paths = o.data_files;
    if (paths.empty() && !o.data_dir.empty())
        paths = mghs::io::list_files(o.data_dir, "group_", ".csv");
    if (paths.empty())
        throw std::runtime_error("no input data: pass --data-dir or --data");
    std::vector<MatrixXd> groups;
    for (const auto& path : paths) {
        MatrixXd y = mghs::io::read_csv_matrix(path);
        groups.push_back(o.standardize ? mghs::io::standardize_columns(y) : y);
        used_paths.push_back(path);
    }
    return groups;
}

struct ChainOutput {
    mghs::chain::ChainTrace trace;
    mghs::selection::SelectionResult selection;
    bool has_selection = false;
};

void write_chain_output(const std::string& dir, const ChainOutput& out) {
    mghs::io::ensure_directory(dir);
    const auto& tr = out.trace;
    for (int k = 0; k < tr.K; ++k) {
        mghs::io::write_csv_matrix(group_path(dir, "omega_mean", k), tr.omega_mean[k]);
        mghs::io::write_csv_matrix(group_path(dir, "sigma_mean", k), tr.sigma_mean[k]);
        mghs::io::write_csv_matrix(group_path(dir, "kappa_mean", k), tr.kappa_mean[k]);
    }
    mghs::io::write_csv_matrix(dir + "/r_mean.csv", tr.r_mean);
    // thinned scalar trace
    {
        std::ofstream os(dir + "/trace.csv");
        os << std::setprecision(17);
        os << "draw,logpost";
        for (int k = 0; k < tr.K; ++k) os << ",tau2_" << (k + 1);
        for (int k = 0; k < tr.K; ++k)
            for (int l = k + 1; l < tr.K; ++l) os << ",r_" << (k + 1) << "_" << (l + 1);
        if (out.has_selection) os << ",t_alpha";
        os << "\n";
        for (int d = 0; d < tr.n_draws; ++d) {
            os << d + 1 << "," << tr.logpost_draws[d];
            for (int k = 0; k < tr.K; ++k) os << "," << tr.tau2_draws[d][k];
            for (int k = 0; k < tr.K; ++k)
                for (int l = k + 1; l < tr.K; ++l) os << "," << tr.r_draws[d](k, l);
            if (out.has_selection) os << "," << out.selection.t_alpha_draws[d];
            os << "\n";
        }
    }
    if (!tr.omega_draws.empty()) {
        for (int k = 0; k < tr.K; ++k) {
            MatrixXd m(tr.omega_draws.size(), tr.omega_draws.front()[k].size());
            for (std::size_t d = 0; d < tr.omega_draws.size(); ++d)
                m.row(d) = tr.omega_draws[d][k];
            mghs::io::write_csv_matrix(group_path(dir, "omega_draws", k), m);
        }
    }
    if (out.has_selection) {
        for (int k = 0; k < tr.K; ++k)
            mghs::io::write_csv_matrix(group_path(dir, "z_frequency", k),
                                       out.selection.z_frequency[k]);
    }
}

int cmd_fit(const FitOptions& o) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> used_paths;
    auto groups = load_groups(o, used_paths);
    auto data = mghs::chain::GroupData::from_observations(groups);

    mghs::g3p::SamplerTables tables;
    bool loaded = false;
    if (!o.table_cache.empty() && mghs::io::file_exists(o.table_cache)) {
        tables = mghs::g3p::SamplerTables::load(o.table_cache);
        loaded = true;
    }
    if (!loaded) {
        tables = mghs::g3p::SamplerTables::build_default();
        if (!o.table_cache.empty()) tables.save(o.table_cache);
    }

    const int n_chains = std::max(1, o.chains);
    std::vector<ChainOutput> outputs(n_chains);
    std::atomic<int> next{0};
    int workers = o.threads > 0 ? o.threads
                                : std::min<int>(n_chains,
                                                std::max(1u, std::thread::hardware_concurrency()));
    auto worker = [&]() {
        for (;;) {
            int c = next.fetch_add(1);
            if (c >= n_chains) return;
            mghs::chain::ChainConfig cfg;
            cfg.burnin = o.burnin;
            cfg.iterations = o.iters;
            cfg.thin = o.thin;
            cfg.seed = o.seed;
            cfg.stream = static_cast<std::uint64_t>(c);
            cfg.freeze_r_identity = o.freeze_r;
            cfg.g3p_tables = &tables;
            cfg.track_omega = o.track_omega;
            if (o.select_mode == "cut") {
                mghs::selection::SelectionConfig scfg;
                scfg.a = o.a;
                scfg.b = o.b;
                scfg.hastings_correction = o.hastings_correction;
                scfg.seed = o.seed + 1000003ULL * (c + 1);
                mghs::selection::Runner sel(data.K, data.p, scfg);
                outputs[c].trace = mghs::chain::run_chain(
                    data, cfg,
                    [&sel](const mghs::chain::ChainState& s, int) { sel.step(s); });
                outputs[c].selection = sel.result();
                outputs[c].has_selection = true;
            } else {
                outputs[c].trace = mghs::chain::run_chain(data, cfg);
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(workers, n_chains); ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    mghs::io::ensure_directory(o.out_dir);
    for (int c = 0; c < n_chains; ++c)
        write_chain_output(o.out_dir + "/chain_" + std::to_string(c + 1), outputs[c]);

    // pooled posterior means across chains
    const int K = data.K, p = data.p;
    std::vector<MatrixXd> omega_mean(K, MatrixXd::Zero(p, p));
    std::vector<MatrixXd> kappa_mean(K, MatrixXd::Zero(p, p));
    std::vector<MatrixXd> z_freq(K, MatrixXd::Zero(p, p));
    MatrixXd r_mean = MatrixXd::Zero(K, K);
    for (int c = 0; c < n_chains; ++c) {
        for (int k = 0; k < K; ++k) {
            omega_mean[k] += outputs[c].trace.omega_mean[k] / n_chains;
            kappa_mean[k] += outputs[c].trace.kappa_mean[k] / n_chains;
            if (outputs[c].has_selection)
                z_freq[k] += outputs[c].selection.z_frequency[k] / n_chains;
        }
        r_mean += outputs[c].trace.r_mean / n_chains;
    }
    for (int k = 0; k < K; ++k) {
        mghs::io::write_csv_matrix(group_path(o.out_dir, "omega_mean", k), omega_mean[k]);
        mghs::io::write_csv_matrix(group_path(o.out_dir, "kappa_mean", k), kappa_mean[k]);
        if (o.select_mode == "cut")
            mghs::io::write_csv_matrix(group_path(o.out_dir, "z_frequency", k), z_freq[k]);
    }
    mghs::io::write_csv_matrix(o.out_dir + "/r_mean.csv", r_mean);

    json summary;
    summary["K"] = K;
    summary["p"] = p;
    summary["chains"] = n_chains;
    summary["ghs_mode"] = o.freeze_r || K == 1;
    for (int c = 0; c < n_chains; ++c) {
        json jc;
        jc["r_acceptance"] = outputs[c].trace.r_acceptance_rate();
        jc["draws"] = outputs[c].trace.n_draws;
        jc["seconds"] = outputs[c].trace.seconds;
        jc["g3p_proposals_per_call"] = outputs[c].trace.g3p_stats.proposals_per_call();
        if (outputs[c].has_selection)
            jc["t_alpha_mh_acceptance"] = outputs[c].selection.mh_acceptance;
        summary["chain_" + std::to_string(c + 1)] = jc;
    }
    if (n_chains >= 2) {
        std::vector<std::vector<double>> lp;
        for (int c = 0; c < n_chains; ++c) lp.push_back(outputs[c].trace.logpost_draws);
        summary["logpost_psrf"] = mghs::diagnostics::psrf(lp);
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    summary["seconds_total"] = secs;
    std::ofstream(o.out_dir + "/summary.json") << summary.dump(2) << "\n";

    write_manifest(o.out_dir, "fit", effective_config(o), used_paths, secs);
    std::cout << "fit complete: " << n_chains << " chain(s), " << secs << "s -> "
              << o.out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_select(const std::string& fit_dir, const std::string& mode,
               const std::string& out_file) {
    auto kappa_paths = mghs::io::list_files(fit_dir, "kappa_mean_", ".csv");
    if (kappa_paths.empty())
        throw std::runtime_error("no kappa_mean_*.csv under " + fit_dir);
    const int K = static_cast<int>(kappa_paths.size());

    std::vector<MatrixXd> score;  // frequency written to the output
    std::vector<Eigen::MatrixXi> adjacency;
    if (mode == "mpm") {
        std::vector<MatrixXd> kappa;
        for (const auto& path : kappa_paths) kappa.push_back(mghs::io::read_csv_matrix(path));
        adjacency = mghs::selection::select_mpm(kappa);
        score = kappa;
    } else if (mode == "cut") {
        auto z_paths = mghs::io::list_files(fit_dir, "z_frequency_", ".csv");
        if (static_cast<int>(z_paths.size()) != K)
            throw std::runtime_error("cut selection needs z_frequency_*.csv from a cut-mode fit");
        mghs::selection::SelectionResult res;
        for (const auto& path : z_paths) res.z_frequency.push_back(mghs::io::read_csv_matrix(path));
        adjacency = mghs::selection::select_cut(res);
        score = res.z_frequency;
    } else {
        throw std::runtime_error("select mode must be mpm or cut");
    }

    std::ofstream os(out_file);
    if (!os) throw std::runtime_error("cannot write " + out_file);
    os << "i,j,group,included,frequency\n";
    const int p = static_cast<int>(adjacency.front().rows());
    for (int k = 0; k < K; ++k)
        for (int j = 1; j < p; ++j)
            for (int i = 0; i < j; ++i)
                os << i + 1 << "," << j + 1 << "," << k + 1 << ","
                   << adjacency[k](i, j) << "," << score[k](i, j) << "\n";
    std::cout << "wrote " << out_file << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

std::vector<Eigen::MatrixXi> read_adjacency_csv(const std::string& path, int& K, int& p) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::getline(is, line);  // header
    struct Row { int i, j, k, inc; };
    std::vector<Row> rows;
    K = 0;
    p = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        Row r{};
        double freq;
        if (std::sscanf(line.c_str(), "%d,%d,%d,%d,%lf", &r.i, &r.j, &r.k, &r.inc, &freq) != 5)
            throw std::runtime_error("bad adjacency row: " + line);
        rows.push_back(r);
        K = std::max(K, r.k);
        p = std::max({p, r.i, r.j});
    }
    std::vector<Eigen::MatrixXi> adj(K, Eigen::MatrixXi::Zero(p, p));
    for (const Row& r : rows)
        if (r.inc) adj[r.k - 1](r.i - 1, r.j - 1) = adj[r.k - 1](r.j - 1, r.i - 1) = 1;
    return adj;
}

int cmd_metrics(const std::string& adjacency_file, const std::string& truth_dir,
                const std::string& fit_dir, const std::string& out_file) {
    int K = 0, p = 0;
    auto est = read_adjacency_csv(adjacency_file, K, p);

    auto truth_paths = mghs::io::list_files(truth_dir, "truth_adjacency_", ".csv");
    if (static_cast<int>(truth_paths.size()) != K)
        throw std::runtime_error("truth group count mismatch under " + truth_dir);
    std::vector<Eigen::MatrixXi> truth;
    for (const auto& path : truth_paths)
        truth.push_back(mghs::io::read_csv_matrix(path).cast<int>());

    auto pooled = mghs::metrics::confusion_metrics(est, truth);

    double auc = std::nan(""), frob = std::nan("");
    if (!fit_dir.empty()) {
        auto kappa_paths = mghs::io::list_files(fit_dir, "kappa_mean_", ".csv");
        if (static_cast<int>(kappa_paths.size()) == K) {
            std::vector<MatrixXd> kappa;
            for (const auto& path : kappa_paths)
                kappa.push_back(mghs::io::read_csv_matrix(path));
            auc = mghs::metrics::auc_edges(kappa, truth);
        }
        auto omega_paths = mghs::io::list_files(fit_dir, "omega_mean_", ".csv");
        auto truth_omega_paths = mghs::io::list_files(truth_dir, "truth_omega_", ".csv");
        if (static_cast<int>(omega_paths.size()) == K &&
            static_cast<int>(truth_omega_paths.size()) == K) {
            std::vector<MatrixXd> oe, ot;
            for (const auto& path : omega_paths) oe.push_back(mghs::io::read_csv_matrix(path));
            for (const auto& path : truth_omega_paths) ot.push_back(mghs::io::read_csv_matrix(path));
            frob = mghs::metrics::frobenius_loss(oe, ot);
        }
    }

    std::ostringstream body;
    body << "scope,acc,mcc,tpr,fpr,auc,frobenius\n";
    body << "pooled," << pooled.accuracy << "," << pooled.mcc << "," << pooled.tpr
         << "," << pooled.fpr << "," << auc << "," << frob << "\n";
    for (int k = 0; k < K; ++k) {
        auto g = mghs::metrics::confusion_metrics({est[k]}, {truth[k]});
        body << "group_" << (k + 1) << "," << g.accuracy << "," << g.mcc << ","
             << g.tpr << "," << g.fpr << ",,\n";
    }
    if (!out_file.empty()) {
        std::ofstream os(out_file);
        os << body.str();
    }
    std::cout << body.str();
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_g3p_check(bool quick) {
    using namespace mghs;
    const int N = quick ? 20000 : 100000;
    const double ks_bound = quick ? 0.02 : 0.01;
    int failures = 0;
    auto report = [&](const std::string& name, bool pass, const std::string& detail) {
        std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
        if (!pass) ++failures;
    };

    Rng rng(20240901);
    g3p::DrawStats stats;
    double worst_ks = 0.0;
    for (int gamma : {1, 3, 10, 50}) {
        for (double rho : {-5.0, -1.0, 0.5, 3.0, 8.0}) {
            for (double alpha : {0.5, 2.0}) {
                g3p::Params p{gamma, alpha, rho * alpha};
                g3p::Sampler s(p);
                std::vector<double> xs(N);
                for (int i = 0; i < N; ++i) xs[i] = s.draw(rng, stats);
                std::sort(xs.begin(), xs.end());
                // quadrature CDF on a fine grid of the unnormalized density
                auto m = g3p::moments(p);
                double xmax = m.mean + 14.0 * std::sqrt(m.var);
                const int G = 30001;
                std::vector<double> grid(G), cdf(G), lf(G);
                double lmax = -1e300;
                for (int i = 0; i < G; ++i) {
                    grid[i] = xmax * i / (G - 1);
                    lf[i] = grid[i] > 0
                                ? gamma * std::log(grid[i]) - alpha * alpha * grid[i] * grid[i] + p.beta * grid[i]
                                : -1e300;
                    lmax = std::max(lmax, lf[i]);
                }
                cdf[0] = 0.0;
                for (int i = 1; i < G; ++i)
                    cdf[i] = cdf[i - 1] + 0.5 * (std::exp(lf[i] - lmax) + std::exp(lf[i - 1] - lmax)) *
                                              (grid[i] - grid[i - 1]);
                for (int i = 0; i < G; ++i) cdf[i] /= cdf[G - 1];
                double ks = 0.0;
                for (int i = 0; i < N; ++i) {
                    auto it = std::upper_bound(grid.begin(), grid.end(), xs[i]);
                    std::size_t gi = std::min<std::size_t>(it - grid.begin(), G - 1);
                    double F = cdf[gi];
                    ks = std::max(ks, std::max(std::abs((i + 1.0) / N - F),
                                               std::abs(static_cast<double>(i) / N - F)));
                }
                worst_ks = std::max(worst_ks, ks);
            }
        }
    }
    {
        std::ostringstream d;
        d << "worst KS over the 40-cell grid = " << worst_ks << " (bound " << ks_bound << ")";
        report("g3p exactness", worst_ks < ks_bound, d.str());
    }
    {
        std::ostringstream d;
        d << "mean proposals per draw = " << stats.proposals_per_call() << " (bound 10)";
        report("g3p termination", stats.proposals_per_call() <= 10.0, d.str());
    }
    {
        auto k1 = g3p::kl_normal_limit({1, 1.0, 0.002}, g3p::NormalKind::Beta);
        std::ostringstream d;
        d << "KL(q||p) at gamma=1, ratio=0.002: " << k1.qp << " (expect 0.284 +- 0.01)";
        report("kl table beta->0", std::abs(k1.qp - 0.284) < 0.01, d.str());
        auto k2 = g3p::kl_normal_limit({100, 1.0, 8.0}, g3p::NormalKind::Beta);
        std::ostringstream d2;
        d2 << "KL(p||q) at gamma=100, ratio=8: " << k2.pq << " (expect 49.973 +- 0.5)";
        report("kl table gamma=100", std::abs(k2.pq - 49.973) < 0.5, d2.str());
        bool ok = true;
        double worst = 0.0;
        for (double rho : {0.002, 0.2, 0.5, 1.0, 3.0, 5.0, 8.0}) {
            auto k = g3p::kl_normal_limit({50, 1.0, rho}, g3p::NormalKind::Gamma);
            worst = std::max(worst, std::max(k.qp, k.pq));
            ok = ok && k.qp < 0.001 && k.pq < 0.001;
        }
        std::ostringstream d3;
        d3 << "growing-gamma row at 50: worst KL = " << worst << " (expect < 0.001)";
        report("kl table gamma=50", ok, d3.str());
    }
    return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------

int cmd_diagnose(const std::string& fit_dir, const std::string& out_file) {
    // chains live in fit_dir/chain_*/ with omega_draws_<k>.csv
    std::vector<std::string> chain_dirs;
    for (int c = 1;; ++c) {
        std::string dir = fit_dir + "/chain_" + std::to_string(c);
        if (!mghs::io::file_exists(dir)) break;
        chain_dirs.push_back(dir);
    }
    if (chain_dirs.size() < 2)
        throw std::runtime_error("diagnose needs >= 2 chain_* directories under " + fit_dir);
    auto first = mghs::io::list_files(chain_dirs.front(), "omega_draws_", ".csv");
    if (first.empty())
        throw std::runtime_error("no omega_draws_*.csv; rerun fit with --track-omega");
    const int K = static_cast<int>(first.size());

    std::ofstream os;
    if (!out_file.empty()) {
        os.open(out_file);
        os << "group,edge,psrf\n";
    }
    long total = 0, inside = 0;
    for (int k = 0; k < K; ++k) {
        std::vector<MatrixXd> per_chain;
        for (const auto& dir : chain_dirs)
            per_chain.push_back(mghs::io::read_csv_matrix(group_path(dir, "omega_draws", k)));
        Eigen::VectorXd r = mghs::diagnostics::psrf_columns(per_chain);
        for (Eigen::Index e = 0; e < r.size(); ++e) {
            ++total;
            if (r[e] >= 1.0 && r[e] <= 1.2) ++inside;
            if (os.is_open()) os << k + 1 << "," << e << "," << r[e] << "\n";
        }
    }
    double pct = 100.0 * inside / std::max(1L, total);
    std::cout << "edge-wise PSRF in [1.0, 1.2]: " << pct << "% (" << inside << "/"
              << total << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multiple Graphical Horseshoe: joint inference of correlated precision matrices"};
    app.require_subcommand(1);

    // simulate ---------------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "generate a benchmark scenario");
    std::string sim_scenario = "independent", sim_out = "sim_out";
    int sim_K = 4, sim_p = 50, sim_n = 50, sim_bs = 5;
    double sim_ep = 0.825, sim_pf = 0.25;
    std::uint64_t sim_seed = 1;
    sim->add_option("--scenario", sim_scenario,
                    "independent | coupled | p2020 | full-dependence");
    sim->add_option("--K", sim_K, "number of groups");
    sim->add_option("--p", sim_p, "variables");
    sim->add_option("--n", sim_n, "observations per group");
    sim->add_option("--block-size", sim_bs, "5 or 10");
    sim->add_option("--edge-prob", sim_ep, "within-block edge probability");
    sim->add_option("--perturb-frac", sim_pf, "edge toggles for p2020");
    sim->add_option("--seed", sim_seed);
    sim->add_option("--out-dir", sim_out);

    // fit ---------------------------------------------------------------------
    auto* fit = app.add_subcommand("fit", "run the Metropolis-within-Gibbs sampler");
    FitOptions fo;
    std::string fit_config;
    // --config applies before flag overrides; scan early
    for (int i = 1; i < argc - 1; ++i)
        if (std::string(argv[i]) == "--config") fit_config = argv[i + 1];
    if (!fit_config.empty()) {
        try {
            apply_config_file(fo, fit_config);
        } catch (const std::exception& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return 2;
        }
    }
    fit->add_option("--config", fit_config, "JSON config file (flags override)");
    fit->add_option("--data-dir", fo.data_dir, "directory with group_*.csv");
    fit->add_option("--data", fo.data_files, "explicit group CSV files");
    fit->add_option("--out-dir", fo.out_dir);
    fit->add_option("--chains", fo.chains);
    fit->add_option("--burnin", fo.burnin);
    fit->add_option("--iters", fo.iters);
    fit->add_option("--thin", fo.thin);
    fit->add_option("--seed", fo.seed);
    fit->add_option("--threads", fo.threads, "worker pool size (0 = auto)");
    fit->add_flag("--freeze-r", fo.freeze_r, "keep R at identity (GHS mode)");
    fit->add_flag("!--no-standardize", fo.standardize,
                  "skip per-column standardization");
    fit->add_option("--select-mode", fo.select_mode, "cut | mpm | none");
    fit->add_option("--a", fo.a, "Beta prior a for the selection threshold");
    fit->add_option("--b", fo.b, "Beta prior b");
    fit->add_flag("--hastings-correction", fo.hastings_correction);
    fit->add_flag("--track-omega", fo.track_omega, "store thinned omega draws");
    fit->add_option("--table-cache", fo.table_cache, "path for the sampler-table cache");

    // select -------------------------------------------------------------------
    auto* sel = app.add_subcommand("select", "posterior edge selection");
    std::string sel_fit = "fit_out", sel_mode = "cut", sel_out;
    sel->add_option("--fit-dir", sel_fit);
    sel->add_option("--select-mode", sel_mode, "mpm | cut");
    sel->add_option("--out", sel_out, "output CSV (default <fit-dir>/adjacency.csv)");

    // metrics -------------------------------------------------------------------
    auto* met = app.add_subcommand("metrics", "score estimates against ground truth");
    std::string met_adj, met_truth, met_fit, met_out;
    met->add_option("--adjacency", met_adj, "adjacency CSV from `select`")->required();
    met->add_option("--truth-dir", met_truth, "directory from `simulate`")->required();
    met->add_option("--fit-dir", met_fit, "fit directory (enables AUC and Frobenius)");
    met->add_option("--out", met_out, "metrics CSV output");

    // g3p-check -------------------------------------------------------------------
    auto* chk = app.add_subcommand("g3p-check", "sampler acceptance checks");
    bool chk_quick = false;
    chk->add_flag("--quick", chk_quick, "smaller sample sizes, looser bounds");

    // diagnose -------------------------------------------------------------------
    auto* dia = app.add_subcommand("diagnose", "PSRF convergence diagnostics");
    std::string dia_fit = "fit_out", dia_out;
    dia->add_option("--fit-dir", dia_fit);
    dia->add_option("--out", dia_out, "per-edge PSRF CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(sim_scenario, sim_K, sim_p, sim_n, sim_bs, sim_ep,
                                sim_pf, sim_seed, sim_out);
        if (fit->parsed()) return cmd_fit(fo);
        if (sel->parsed()) {
            if (sel_out.empty()) sel_out = sel_fit + "/adjacency.csv";
            return cmd_select(sel_fit, sel_mode, sel_out);
        }
        if (met->parsed()) return cmd_metrics(met_adj, met_truth, met_fit, met_out);
        if (chk->parsed()) return cmd_g3p_check(chk_quick);
        if (dia->parsed()) return cmd_diagnose(dia_fit, dia_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

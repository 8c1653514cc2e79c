// Command-line driver for the n-level density experiments.
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "nlevel/runner.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"n-level density experiments: zeros, statistics, predictions, random matrices"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out, cache;
    std::uint64_t seed = 0;
    int workers = 0;
    auto* o_config = app.add_option("--config", config_path, "experiment config file")->check(CLI::ExistingFile);
    auto* o_seed = app.add_option("--seed", seed, "random seed");
    auto* o_workers = app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    auto* o_out = app.add_option("--out", out, "output directory");
    auto* o_cache = app.add_option("--cache", cache, "zero cache directory (default NLEVEL_CACHE, then .nlevel_cache)");

    // per-run overrides of config fields
    struct Overrides {
        std::vector<std::string> family;
        std::vector<double> Q, t;
        std::vector<int> N;
        std::int64_t samples = 0, P = 1;
        double height = 0, tolerance = 0;
        int qmax = 0, k = 0, r = 0, gh_order = 0, streams = 0;
        std::string statistic;
        bool csv = false;
    } ov;
    struct Opts {
        CLI::Option *family, *Q, *t, *N, *samples, *P, *height, *tolerance, *qmax, *k, *r, *gh, *streams, *stat, *csv;
    };
    std::map<std::string, Opts> opts;
    const char* names[] = {"zeros", "empirical", "als", "predict", "rmt", "verify-explicit", "constants", "matchup"};
    const char* help[] = {"compute or extend the zero cache for the family moduli of each Q",
                          "L0/L1 statistics from cached zeros, normalised by D",
                          "exact finite-Q large-sieve sums and their ratio to the leading term",
                          "closed-form main term with per-partition breakdown",
                          "CUE Monte Carlo against the finite-N determinant formula",
                          "explicit-formula residuals for every primitive character up to qmax",
                          "arithmetic constant and Euler-product identities",
                          "comparison report: main term, RMT prediction, finite N, Monte Carlo, empirical"};
    for (int i = 0; i < 8; ++i) {
        auto* s = app.add_subcommand(names[i], help[i]);
        Opts o{};
        o.family = s->add_option("--family", ov.family, "test functions, e.g. hat:1.9 bspline:1:4");
        o.Q = s->add_option("--Q", ov.Q, "family scales");
        o.t = s->add_option("--t", ov.t, "shifts for verify-explicit");
        o.N = s->add_option("--N", ov.N, "matrix sizes");
        o.samples = s->add_option("--samples", ov.samples, "Monte Carlo samples");
        o.P = s->add_option("--P", ov.P, "squarefree P for als");
        o.height = s->add_option("--height", ov.height, "zero height T");
        o.tolerance = s->add_option("--tolerance", ov.tolerance, "tolerance target");
        o.qmax = s->add_option("--qmax", ov.qmax, "largest modulus for verify-explicit");
        o.k = s->add_option("--k", ov.k, "size of the first side for als");
        o.r = s->add_option("--r", ov.r, "size of the second side for als");
        o.gh = s->add_option("--gh-order", ov.gh_order, "Gauss-Hermite order for L1");
        o.streams = s->add_option("--streams", ov.streams, "Monte Carlo streams");
        o.stat = s->add_option("--statistic", ov.statistic, "L0 or L1");
        o.csv = s->add_flag("--csv", ov.csv, "also write a CSV of scalar fields");
        opts[names[i]] = o;
    }
    CLI11_PARSE(app, argc, argv);

    try {
        const std::string sub = app.get_subcommands().front()->get_name();
        nlevel::ExperimentConfig cfg;
        if (*o_config) {
            cfg = nlevel::load_config(config_path);
            if (!cfg.experiment.empty() && cfg.experiment != sub)
                throw nlevel::ConfigError("experiment", "config is for '" + cfg.experiment + "', not '" + sub + "'");
        }
        cfg.experiment = sub;
        const Opts& o = opts.at(sub);
        if (*o.family) cfg.family = ov.family;
        if (*o.Q) cfg.Q = ov.Q;
        if (*o.t) cfg.t = ov.t;
        if (*o.N) cfg.N = ov.N;
        if (*o.samples) cfg.samples = ov.samples;
        if (*o.P) cfg.P = ov.P;
        if (*o.height) cfg.height = ov.height;
        if (*o.tolerance) cfg.tolerance = ov.tolerance;
        if (*o.qmax) cfg.qmax = ov.qmax;
        if (*o.k) cfg.k = ov.k;
        if (*o.r) cfg.r = ov.r;
        if (*o.gh) cfg.gh_order = ov.gh_order;
        if (*o.streams) cfg.streams = ov.streams;
        if (*o.stat) cfg.statistic = ov.statistic;
        if (*o.csv) cfg.csv = true;
        if (*o_seed) cfg.seed = seed;
        if (*o_workers) cfg.workers = workers;
        if (*o_out) cfg.out = out;
        if (*o_cache) cfg.cache = cache;
        auto res = nlevel::run(cfg, std::cerr);
        return res.status;
    } catch (const nlevel::ConfigError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

// critmkt: simulate, predict, analyze, fit-kappa.
//
// Every key of a command's config is also a flag. Precedence is
// flag > --config file > built-in default.

#include "critmkt/pipeline.hpp"

#include "CLI11.hpp"

#include <functional>
#include <iostream>
#include <optional>
#include <stdexcept>

namespace {

using nlohmann::json;

// Collects the flags a user actually passed as a JSON overlay.
struct Overlay {
    std::vector<std::pair<CLI::Option*, std::function<void(json&)>>> flags;

    template <typename Cfg, typename T>
    void bind(CLI::App* app, Cfg& cli, T Cfg::*member, const std::string& key, const std::string& help) {
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        auto* opt = app->add_option(flag, cli.*member, help)->capture_default_str();
        flags.emplace_back(opt, [&cli, member, key](json& j) { j[key] = cli.*member; });
    }

    [[nodiscard]] json collect() const {
        json j = json::object();
        for (const auto& [opt, fill] : flags)
            if (opt->count() > 0) fill(j);
        return j;
    }
};

struct Common {
    std::string config;
    std::string out = ".";
    unsigned threads = 1;

    void add(CLI::App* app) {
        app->add_option("--config", config, "JSON config file (keys as listed here, underscores for dashes)");
        app->add_option("--out", out, "output directory")->capture_default_str();
        app->add_option("--threads", threads, "worker threads, 0 = all cores; never changes results")
            ->capture_default_str();
    }

    template <typename Cfg>
    Cfg resolve(Cfg cfg, const Overlay& overlay) const {
        if (!config.empty()) cfg.merge(critmkt::load_config_file(config));
        cfg.merge(overlay.collect());
        return cfg;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"critmkt: critical-market toolkit (lattice simulation, propagator theory, trend regression)"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(critmkt::version));

    // simulate
    auto* sim = app.add_subcommand("simulate", "Glauber lattice-gas simulation; writes magnetization.csv, returns.csv, params.json");
    Common sim_common;
    sim_common.add(sim);
    critmkt::SimulateConfig sim_cli;
    Overlay sim_flags;
    sim_flags.bind(sim, sim_cli, &critmkt::SimulateConfig::dims, "dims", "lattice dimension D");
    sim_flags.bind(sim, sim_cli, &critmkt::SimulateConfig::side, "side", "lattice side L");
    sim_flags.bind(sim, sim_cli, &critmkt::SimulateConfig::temperature, "temperature", "temperature (default is T_c of the 2D lattice)");
    sim_flags.bind(sim, sim_cli, &critmkt::SimulateConfig::init, "init", "initial state: random, up or down");
    sim_flags.bind(sim, sim_cli, &critmkt::SimulateConfig::sweeps, "sweeps", "total sweeps");
    sim_flags.bind(sim, sim_cli, &critmkt::SimulateConfig::burn_in, "burn_in", "sweeps discarded before recording");
    sim_flags.bind(sim, sim_cli, &critmkt::SimulateConfig::thin, "thin", "sweeps per recorded day");
    sim_flags.bind(sim, sim_cli, &critmkt::SimulateConfig::seed, "seed", "master seed");

    // predict
    auto* pred = app.add_subcommand("predict", "Theory curves over T = 2^k for a network dimension or kappa");
    Common pred_common;
    pred_common.add(pred);
    critmkt::PredictConfig pred_cli;
    Overlay pred_flags;
    double dim_flag = *pred_cli.dimension;
    double kappa_flag = 0.97;
    auto* dim_opt = pred->add_option("--dimension", dim_flag, "network dimension D in [1.5, 4] (clears kappa)")->capture_default_str();
    auto* kappa_opt = pred->add_option("--kappa", kappa_flag, "kappa in (0, 1] (clears dimension; default unset)");
    pred_flags.flags.emplace_back(dim_opt, [&](json& j) { j["dimension"] = dim_flag; });
    pred_flags.flags.emplace_back(kappa_opt, [&](json& j) { j["kappa"] = kappa_flag; });
    pred->callback([&] {
        if (dim_opt->count() && kappa_opt->count()) throw CLI::ValidationError("--dimension and --kappa are exclusive");
    });
    pred_flags.bind(pred, pred_cli, &critmkt::PredictConfig::tau, "tau", "correlation time tau");
    pred_flags.bind(pred, pred_cli, &critmkt::PredictConfig::regime, "regime", "scaling, exponential or matched (heuristic)");
    pred_flags.bind(pred, pred_cli, &critmkt::PredictConfig::knee, "knee", "t* for the matched regime");
    pred_flags.bind(pred, pred_cli, &critmkt::PredictConfig::k_min, "k_min", "smallest k");
    pred_flags.bind(pred, pred_cli, &critmkt::PredictConfig::k_max, "k_max", "largest k");
    pred_flags.bind(pred, pred_cli, &critmkt::PredictConfig::seed, "seed", "master seed (recorded only)");

    // analyze
    auto* ana = app.add_subcommand("analyze", "Empirical pipeline on daily price CSVs");
    Common ana_common;
    ana_common.add(ana);
    critmkt::AnalyzeConfig ana_cli;
    Overlay ana_flags;
    auto* inputs_opt = ana->add_option("inputs", ana_cli.inputs, "price CSV files (long: market,date,price; wide: date,<market>...)");
    ana_flags.flags.emplace_back(inputs_opt, [&](json& j) { j["inputs"] = ana_cli.inputs; });
    ana_flags.bind(ana, ana_cli, &critmkt::AnalyzeConfig::schema, "schema", "detect, long or wide");
    ana_flags.bind(ana, ana_cli, &critmkt::AnalyzeConfig::horizons, "horizons", "k values, T = 2^k days");
    ana_flags.bind(ana, ana_cli, &critmkt::AnalyzeConfig::estimator, "estimator", "trend weights: phi, psi or step");
    ana_flags.bind(ana, ana_cli, &critmkt::AnalyzeConfig::bootstrap, "bootstrap", "bootstrap resamples (0 = classical errors)");
    ana_flags.bind(ana, ana_cli, &critmkt::AnalyzeConfig::folds, "folds", "cross-validation folds (0 = classical adjusted R2)");
    ana_flags.bind(ana, ana_cli, &critmkt::AnalyzeConfig::block_length, "block_length", "bootstrap block length in days (1 = i.i.d. days)");
    ana_flags.bind(ana, ana_cli, &critmkt::AnalyzeConfig::qs, "qs", "moment orders for generalized Hurst exponents");
    ana_flags.bind(ana, ana_cli, &critmkt::AnalyzeConfig::kappa_horizons, "kappa_horizons", "k values used to fit kappa");
    ana_flags.bind(ana, ana_cli, &critmkt::AnalyzeConfig::seed, "seed", "master seed");

    // fit-kappa
    auto* fk = app.add_subcommand("fit-kappa", "kappa and network dimension from a k,var[,se] CSV");
    Common fk_common;
    fk_common.add(fk);
    critmkt::FitKappaConfig fk_cli;
    Overlay fk_flags;
    auto* fk_input = fk->add_option("input", fk_cli.input, "variance CSV with header k,var[,se]");
    fk_flags.flags.emplace_back(fk_input, [&](json& j) { j["input"] = fk_cli.input; });
    fk_flags.bind(fk, fk_cli, &critmkt::FitKappaConfig::form, "form", "log_linear or linear (valid near kappa = 1)");
    fk_flags.bind(fk, fk_cli, &critmkt::FitKappaConfig::seed, "seed", "master seed (recorded only)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "critmkt: error: " << e.what() << '\n';
        return 2;
    }

    try {
        json result;
        if (*sim) {
            result = critmkt::cmd_simulate(sim_common.resolve(critmkt::SimulateConfig{}, sim_flags), sim_common.out);
        } else if (*pred) {
            result = critmkt::cmd_predict(pred_common.resolve(critmkt::PredictConfig{}, pred_flags), pred_common.out);
        } else if (*ana) {
            const auto report = critmkt::cmd_analyze(ana_common.resolve(critmkt::AnalyzeConfig{}, ana_flags),
                                                     ana_common.out, ana_common.threads);
            result = {{"aggregated", report["aggregated"]}, {"kappa", report["kappa"]}};
        } else if (*fk) {
            result = critmkt::cmd_fit_kappa(fk_common.resolve(critmkt::FitKappaConfig{}, fk_flags), fk_common.out);
        }
        std::cout << result.dump(2) << '\n';
    } catch (const std::logic_error& e) {
        std::cerr << "critmkt: error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "critmkt: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

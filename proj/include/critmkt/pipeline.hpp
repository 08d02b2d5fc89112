#pragma once

#include "critmkt/io.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace critmkt {

/**
 * Command configurations. Each has defaults, a JSON form, and a merge from a
 * JSON object (unknown keys are rejected with std::invalid_argument). Thread
 * counts are runtime options and never change results, so they are not part
 * of the JSON form.
 */
struct SimulateConfig {
    int dims = 2;
    int side = 32;
    double temperature = 0.28364816427662774;  ///< T_c of the 2D lattice
    std::string init = "random";               ///< random | up | down
    std::size_t sweeps = 20000;
    std::size_t burn_in = 0;
    std::size_t thin = 1;  ///< sweeps per recorded day
    std::uint64_t seed = 1;

    [[nodiscard]] nlohmann::json to_json() const;
    void merge(const nlohmann::json& j);
};

struct PredictConfig {
    std::optional<double> dimension = 3.0;  ///< setting one of dimension/kappa clears the other
    std::optional<double> kappa;
    double tau = 4096.0;
    std::string regime = "scaling";
    double knee = 0.0;
    int k_min = 1;
    int k_max = 13;
    std::uint64_t seed = 1;

    [[nodiscard]] nlohmann::json to_json() const;
    void merge(const nlohmann::json& j);
};

struct AnalyzeConfig {
    std::vector<std::string> inputs;
    std::string schema = "detect";  ///< detect | long | wide
    std::vector<int> horizons{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::string estimator = "phi";  ///< phi | psi | step
    std::size_t bootstrap = 5000;
    std::size_t folds = 15;
    std::size_t block_length = 1;
    std::vector<double> qs{1.0, 2.0, 3.0, 4.0};
    std::vector<int> kappa_horizons{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::uint64_t seed = 1;

    [[nodiscard]] nlohmann::json to_json() const;
    void merge(const nlohmann::json& j);
};

struct FitKappaConfig {
    std::string input;
    std::string form = "log_linear";  ///< log_linear | linear
    std::uint64_t seed = 1;

    [[nodiscard]] nlohmann::json to_json() const;
    void merge(const nlohmann::json& j);
};

/// Reads a JSON config file (object at top level).
[[nodiscard]] nlohmann::json load_config_file(const std::filesystem::path& path);

/// Writes magnetization.csv (sweep, M, P = 1 + 2M/N), returns.csv and params.json.
nlohmann::json cmd_simulate(const SimulateConfig& config, const std::filesystem::path& out);

/// Writes autocorrelation.csv, trend_variance.csv, trend_return.csv,
/// adjacent_window.csv and predict.json over k = k_min..k_max. Points outside
/// the regime's domain are dropped with a warning.
nlohmann::json cmd_predict(const PredictConfig& config, const std::filesystem::path& out);

/// Full empirical pipeline over one or more price files. Writes report.json,
/// table2.csv, fig1d_trend_response.csv, fig6_b_by_scale.csv,
/// fig8_variance.csv and hurst.csv.
nlohmann::json cmd_analyze(const AnalyzeConfig& config, const std::filesystem::path& out, unsigned threads = 1);

/// kappa from a k,var[,se] file, and the implied network dimension.
nlohmann::json cmd_fit_kappa(const FitKappaConfig& config, const std::filesystem::path& out);

}  // namespace critmkt

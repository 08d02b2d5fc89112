#include "critmkt/pipeline.hpp"

#include "critmkt/dynamics.hpp"
#include "critmkt/rng.hpp"
#include "critmkt/stats.hpp"
#include "critmkt/theory.hpp"
#include "critmkt/trend.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

namespace critmkt {

namespace {

using nlohmann::json;

void warn(const std::string& what) { std::cerr << "critmkt: warning: " << what << '\n'; }

[[noreturn]] void unknown_key(const std::string& section, const std::string& key) {
    throw std::invalid_argument(section + " config: unknown key '" + key + "'");
}

template <typename T>
void take(const json& value, const std::string& key, T& dst) {
    try {
        dst = value.get<T>();
    } catch (const json::exception& e) {
        throw std::invalid_argument("config key '" + key + "': " + e.what());
    }
}

std::string config_hash(const json& config) { return sha256_hex(config.dump()); }

Provenance make_provenance(const std::string& command, std::uint64_t seed, const json& config) {
    Provenance p;
    p.command = command;
    p.seed = seed;
    p.config_hash = config_hash(config);
    return p;
}

json coefficient_json(const Coefficient& c) { return {{"value", c.value}, {"error", c.error}, {"t_stat", c.t_stat}}; }

json report_json(const RegressionReport& r) {
    return {{"a", coefficient_json(r.a)},
            {"b", coefficient_json(r.b)},
            {"c", coefficient_json(r.c)},
            {"r_squared", r.r_squared},
            {"r_squared_bp", r.r_squared * 1e4},
            {"r_squared_adj", r.r_squared_adj},
            {"r_squared_adj_bp", r.r_squared_adj * 1e4},
            {"r_squared_adj_method", r.r_squared_adj_method},
            {"error_method", r.error_method},
            {"skipped_resamples", r.skipped_resamples},
            {"n_obs", r.n_obs}};
}

std::size_t pow2(int k) {
    if (k < 0 || k > 40) throw std::invalid_argument("horizon exponent k must lie in [0, 40], got " + std::to_string(k));
    return std::size_t{1} << k;
}

}  // namespace

// ---- configs ---------------------------------------------------------------

json SimulateConfig::to_json() const {
    return {{"dims", dims},       {"side", side},       {"temperature", temperature}, {"init", init},
            {"sweeps", sweeps},   {"burn_in", burn_in}, {"thin", thin},               {"seed", seed}};
}

void SimulateConfig::merge(const json& j) {
    for (const auto& [key, v] : j.items()) {
        if (key == "dims") take(v, key, dims);
        else if (key == "side") take(v, key, side);
        else if (key == "temperature") take(v, key, temperature);
        else if (key == "init") take(v, key, init);
        else if (key == "sweeps") take(v, key, sweeps);
        else if (key == "burn_in") take(v, key, burn_in);
        else if (key == "thin") take(v, key, thin);
        else if (key == "seed") take(v, key, seed);
        else unknown_key("simulate", key);
    }
}

json PredictConfig::to_json() const {
    return {{"dimension", dimension ? json(*dimension) : json(nullptr)},
            {"kappa", kappa ? json(*kappa) : json(nullptr)},
            {"tau", tau},
            {"regime", regime},
            {"knee", knee},
            {"k_min", k_min},
            {"k_max", k_max},
            {"seed", seed}};
}

void PredictConfig::merge(const json& j) {
    for (const auto& [key, v] : j.items()) {
        if (key == "dimension") {
            if (v.is_null()) {
                dimension.reset();
            } else {
                double d = 0.0;
                take(v, key, d);
                dimension = d;
                kappa.reset();
            }
        } else if (key == "kappa") {
            if (v.is_null()) {
                kappa.reset();
            } else {
                double k = 0.0;
                take(v, key, k);
                kappa = k;
                dimension.reset();
            }
        } else if (key == "tau") take(v, key, tau);
        else if (key == "regime") take(v, key, regime);
        else if (key == "knee") take(v, key, knee);
        else if (key == "k_min") take(v, key, k_min);
        else if (key == "k_max") take(v, key, k_max);
        else if (key == "seed") take(v, key, seed);
        else unknown_key("predict", key);
    }
}

json AnalyzeConfig::to_json() const {
    return {{"inputs", inputs},       {"schema", schema},   {"horizons", horizons},
            {"estimator", estimator}, {"bootstrap", bootstrap}, {"folds", folds},
            {"block_length", block_length}, {"qs", qs},     {"kappa_horizons", kappa_horizons},
            {"seed", seed}};
}

void AnalyzeConfig::merge(const json& j) {
    for (const auto& [key, v] : j.items()) {
        if (key == "inputs") take(v, key, inputs);
        else if (key == "schema") take(v, key, schema);
        else if (key == "horizons") take(v, key, horizons);
        else if (key == "estimator") take(v, key, estimator);
        else if (key == "bootstrap") take(v, key, bootstrap);
        else if (key == "folds") take(v, key, folds);
        else if (key == "block_length") take(v, key, block_length);
        else if (key == "qs") take(v, key, qs);
        else if (key == "kappa_horizons") take(v, key, kappa_horizons);
        else if (key == "seed") take(v, key, seed);
        else unknown_key("analyze", key);
    }
}

json FitKappaConfig::to_json() const { return {{"input", input}, {"form", form}, {"seed", seed}}; }

void FitKappaConfig::merge(const json& j) {
    for (const auto& [key, v] : j.items()) {
        if (key == "input") take(v, key, input);
        else if (key == "form") take(v, key, form);
        else if (key == "seed") take(v, key, seed);
        else unknown_key("fit-kappa", key);
    }
}

json load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("config " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw InputError("config " + path.string() + ": top level must be an object");
    return j;
}

// ---- simulate --------------------------------------------------------------

json cmd_simulate(const SimulateConfig& config, const std::filesystem::path& out) {
    SimulationParams p;
    p.dims = config.dims;
    p.side = config.side;
    p.temperature = config.temperature;
    p.sweeps = config.sweeps;
    p.burn_in = config.burn_in;
    p.thin = config.thin;
    p.seed = config.seed;
    if (config.init == "random") p.init = LatticeInit::random(config.seed);
    else if (config.init == "up") p.init = LatticeInit::up();
    else if (config.init == "down") p.init = LatticeInit::down();
    else throw std::invalid_argument("simulate: init must be random, up or down");
    p.validate();

    const json cfg = config.to_json();
    const auto prov = make_provenance("simulate", config.seed, cfg);
    const MagnetizationSeries series = run_simulation(p);
    const auto n = static_cast<double>(series.sites);

    std::vector<std::vector<double>> mrows;
    mrows.reserve(series.values.size());
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        const double m = series.values[i];
        mrows.push_back({static_cast<double>(series.sweep_index[i]), m, 1.0 + 2.0 * m / n});
        abs_sum += std::abs(m) / n;
    }
    write_csv(out / "magnetization.csv", prov, {"sweep", "M", "P"}, mrows);

    json summary{{"sites", series.sites}, {"records", series.values.size()}};
    if (!series.values.empty()) summary["mean_abs_m_per_site"] = abs_sum / static_cast<double>(series.values.size());
    if (series.values.size() >= 100) {
        const auto b = binder_cumulant_jackknife(series.values, 50);
        summary["binder"] = {{"value", b.value}, {"error", b.error}};
    }
    if (series.values.size() >= 8) {
        try {
            const auto tau = autocorrelation_time(series.values);
            summary["tau_int"] = {{"value", tau.tau}, {"window", tau.window}, {"reliable", tau.reliable}};
        } catch (const std::domain_error&) {
            warn("magnetization is constant; no autocorrelation time");
        }
    }
    if (series.values.size() >= 3) {
        try {
            const ReturnSeries r = magnetization_to_returns(series);
            std::vector<std::vector<double>> rrows;
            for (std::size_t i = 0; i < r.size(); ++i)
                rrows.push_back({static_cast<double>(series.sweep_index[i + 1]), r.values[i]});
            write_csv(out / "returns.csv", prov, {"sweep", "R"}, rrows);
            summary["returns"] = {{"mu", r.mu}, {"sigma", r.sigma}, {"count", r.size()}};
        } catch (const std::domain_error&) {
            warn("magnetization never changed; returns.csv not written");
        }
    } else {
        warn("fewer than 3 records; returns.csv not written");
    }
    write_json(out / "params.json", prov, {{"config", cfg}, {"summary", summary}});
    return summary;
}

// ---- predict ---------------------------------------------------------------

json cmd_predict(const PredictConfig& config, const std::filesystem::path& out) {
    if (config.k_min < 0 || config.k_max < config.k_min || config.k_max > 40)
        throw std::invalid_argument("predict: need 0 <= k_min <= k_max <= 40");
    PropagatorModel model;
    model.tau = config.tau;
    model.regime = parse_regime(config.regime);
    model.knee = config.knee;
    json info;
    std::optional<ExponentTableRow> node;
    if (config.kappa) {
        model.kappa = *config.kappa;
        info["kappa"] = model.kappa;
        try {
            info["dimension"] = dimension_for_kappa(model.kappa);
        } catch (const std::domain_error&) {
            info["dimension"] = nullptr;
        }
    } else if (config.dimension) {
        const auto e = exponents_for_dimension(*config.dimension);
        model.kappa = e.kappa;
        info["dimension"] = *config.dimension;
        info["kappa"] = e.kappa;
        info["eta"] = e.eta;
        info["z"] = e.z;
        for (const auto& r : exponent_table())
            if (r.dimension == *config.dimension) node = r;
        if (node) info["kappa_table"] = node->kappa_printed;
    } else {
        throw std::invalid_argument("predict: set dimension or kappa");
    }
    model.validate();
    info["hurst"] = model.kappa / 2.0;
    info["regime"] = config.regime;
    info["heuristic"] = is_heuristic(model.regime);
    info["tau"] = model.tau;
    if (model.regime == Regime::matched) info["knee"] = model.knee;

    const json cfg = config.to_json();
    auto prov = make_provenance("predict", config.seed, cfg);
    prov.notes.emplace_back("kappa", format_double(model.kappa));
    if (node) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%.3f", node->kappa_printed);
        prov.notes.emplace_back("kappa_table", buf);
    }
    if (info["dimension"].is_number()) prov.notes.emplace_back("dimension", format_double(info["dimension"].get<double>()));
    prov.notes.emplace_back("regime", config.regime);
    prov.notes.emplace_back("tau", format_double(model.tau));
    prov.notes.emplace_back("hurst", format_double(model.kappa / 2.0));

    std::vector<std::vector<double>> acf, var, tr, adj;
    std::size_t dropped = 0;
    auto attempt = [&](const char* what, int k, auto&& fn) {
        try {
            fn();
        } catch (const std::domain_error& e) {
            ++dropped;
            warn(std::string(what) + " at k = " + std::to_string(k) + " dropped: " + e.what());
        }
    };
    for (int k = config.k_min; k <= config.k_max; ++k) {
        const auto t = static_cast<double>(pow2(k));
        attempt("autocorrelation", k, [&] { acf.push_back({double(k), t, predicted_return_autocorrelation(model, t)}); });
        attempt("trend variance", k, [&] {
            const double phi = predicted_trend_variance(model, t, TrendEstimator::phi);
            const double tilde = predicted_trend_variance(model, t, TrendEstimator::tilde);
            var.push_back({double(k), t, phi, tilde, predicted_second_moment_ratio(model, t)});
        });
        attempt("trend/return correlation", k,
                [&] { tr.push_back({double(k), t, 2.0 / t, predicted_trend_return_correlation(model, 2.0 / t)}); });
        attempt("adjacent-window correlation", k,
                [&] { adj.push_back({double(k), t, predicted_adjacent_window_correlation(model, t)}); });
    }
    write_csv(out / "autocorrelation.csv", prov, {"k", "t", "return_autocorrelation"}, acf);
    write_csv(out / "trend_variance.csv", prov, {"k", "T", "var_phi", "var_tilde", "K2"}, var);
    write_csv(out / "trend_return.csv", prov, {"k", "T", "omega", "correlation"}, tr);
    write_csv(out / "adjacent_window.csv", prov, {"k", "T", "correlation"}, adj);
    info["dropped_points"] = dropped;
    write_json(out / "predict.json", prov, {{"config", cfg}, {"model", info}});
    return info;
}

// ---- analyze ---------------------------------------------------------------

namespace {

struct Market {
    std::string name;
    ReturnSeries returns;
    std::vector<std::int64_t> days;
    std::vector<double> excess;
    std::vector<double> path;  ///< cumulative excess returns, starting at 0
};

struct HorizonResult {
    int k = 0;
    RegressionSample sample;
    double var_phi = 0.0;
    std::size_t markets = 0;
};

CsvSchema parse_schema(const std::string& s) {
    if (s == "detect") return CsvSchema::detect;
    if (s == "long") return CsvSchema::long_format;
    if (s == "wide") return CsvSchema::wide;
    throw std::invalid_argument("analyze: schema must be detect, long or wide");
}

}  // namespace

json cmd_analyze(const AnalyzeConfig& config, const std::filesystem::path& out, unsigned threads) {
    if (config.inputs.empty()) throw std::invalid_argument("analyze: no input files");
    if (config.horizons.empty()) throw std::invalid_argument("analyze: no horizons");
    const WeightKind kind = parse_weight_kind(config.estimator);
    const CsvSchema schema = parse_schema(config.schema);
    for (const int k : config.horizons) (void)pow2(k);
    for (const int k : config.kappa_horizons) (void)pow2(k);

    const json cfg = config.to_json();
    auto prov = make_provenance("analyze", config.seed, cfg);

    std::vector<Market> markets;
    json market_info = json::array();
    std::set<std::string> names;
    for (const auto& file : config.inputs) {
        prov.input_hashes[file] = sha256_file(file);
        const PriceTable table = load_price_csv(file, schema);
        for (const auto& s : table.markets) {
            if (!names.insert(s.market).second) throw InputError("market '" + s.market + "' appears in more than one input");
            if (s.size() < 3) {
                warn("market " + s.market + " has fewer than 3 prices; skipped");
                continue;
            }
            Market m;
            m.name = s.market;
            m.returns = normalize_returns(s.prices);
            m.days.assign(s.days.begin() + 1, s.days.end());
            m.excess = m.returns.excess();
            m.path.assign(m.excess.size() + 1, 0.0);
            for (std::size_t i = 0; i < m.excess.size(); ++i) m.path[i + 1] = m.path[i] + m.excess[i];
            market_info.push_back({{"market", s.market},
                                   {"prices", s.size()},
                                   {"first_date", s.dates.front()},
                                   {"last_date", s.dates.back()},
                                   {"gaps", s.gaps},
                                   {"mu", m.returns.mu},
                                   {"sigma", m.returns.sigma},
                                   {"premium", m.returns.premium()}});
            markets.push_back(std::move(m));
        }
    }
    if (markets.empty()) throw std::invalid_argument("analyze: no usable markets");

    const std::size_t min_obs = std::max<std::size_t>(100, config.folds * 30);
    RegressionOptions ropt;
    ropt.bootstrap_samples = config.bootstrap;
    ropt.folds = config.folds;
    ropt.threads = threads;
    ropt.block_length = config.block_length;

    std::vector<HorizonResult> horizons;
    json dropped = json::array();
    for (const int k : config.horizons) {
        const auto t = static_cast<double>(pow2(k));
        const WeightFunction w = make_weights(kind, t);
        HorizonResult h;
        h.k = k;
        double sq = 0.0, cnt = 0.0;
        std::vector<RegressionSample> parts;
        for (const auto& m : markets) {
            const TrendSeries tr = kind == WeightKind::step ? trend_strength(m.excess, w)
                                                            : trend_strength_recursive(m.excess, t, kind);
            if (m.returns.size() < tr.warmup + 30) continue;
            parts.push_back(make_regression_sample(tr, m.returns, w, m.days));
            for (std::size_t i = tr.warmup; i < tr.size(); ++i) {
                sq += tr.values[i] * tr.values[i];
                cnt += 1.0;
            }
        }
        h.sample = pool_samples(parts);
        h.markets = parts.size();
        if (h.sample.size() < min_obs) {
            warn("horizon k = " + std::to_string(k) + " dropped: insufficient history (" +
                 std::to_string(h.sample.size()) + " observations)");
            dropped.push_back(k);
            continue;
        }
        h.var_phi = sq / cnt;
        horizons.push_back(std::move(h));
    }
    if (horizons.empty()) throw std::invalid_argument("analyze: every horizon lacks history");

    json per_horizon = json::array();
    std::vector<ScalePoint> b_pts, c_pts;
    std::vector<RegressionReport> reports;
    for (const auto& h : horizons) {
        ropt.seed = derive_seed(config.seed, 100 + static_cast<std::uint64_t>(h.k));
        const RegressionReport r = regression_report(h.sample, ropt);
        reports.push_back(r);
        json j = report_json(r);
        j["k"] = h.k;
        j["T"] = pow2(h.k);
        j["markets"] = h.markets;
        per_horizon.push_back(j);
        b_pts.push_back({double(h.k), r.b.value});
        c_pts.push_back({double(h.k), r.c.value});
    }

    std::vector<RegressionSample> all;
    for (const auto& h : horizons) all.push_back(h.sample);
    const RegressionSample pooled = pool_samples(all);
    ropt.seed = derive_seed(config.seed, 0);
    const RegressionReport agg = regression_report(pooled, ropt);

    json report{{"config", cfg},
                {"markets", market_info},
                {"horizons", config.horizons},
                {"dropped_horizons", dropped},
                {"per_horizon", per_horizon},
                {"aggregated", report_json(agg)}};

    write_csv_cells(out / "table2.csv", prov, {"Coefficient", "Value", "Error", "t-statistics"},
                    {{"a", format_double(agg.a.value), format_double(agg.a.error), format_double(agg.a.t_stat)},
                     {"b", format_double(agg.b.value), format_double(agg.b.error), format_double(agg.b.t_stat)},
                     {"c", format_double(agg.c.value), format_double(agg.c.error), format_double(agg.c.t_stat)},
                     {"R2 (bp)", format_double(agg.r_squared * 1e4), "", ""},
                     {"R2_adj (bp)", format_double(agg.r_squared_adj * 1e4), "", ""}});

    // Binned mean next-day return against trend strength, all horizons pooled.
    {
        constexpr double lo = -4.0, width = 0.25;
        constexpr int bins = 32;
        std::vector<double> s(bins, 0.0), s2(bins, 0.0), c(bins, 0.0);
        for (std::size_t i = 0; i < pooled.size(); ++i) {
            const int b = static_cast<int>(std::floor((pooled.trend[i] - lo) / width));
            if (b < 0 || b >= bins) continue;
            s[b] += pooled.target[i];
            s2[b] += pooled.target[i] * pooled.target[i];
            c[b] += 1.0;
        }
        std::vector<std::vector<double>> rows;
        for (int b = 0; b < bins; ++b) {
            if (c[b] == 0.0) continue;
            const double x = lo + (b + 0.5) * width;
            const double mean = s[b] / c[b];
            const double se = c[b] > 1.0 ? std::sqrt(std::max(0.0, s2[b] / c[b] - mean * mean) / (c[b] - 1.0)) : 0.0;
            rows.push_back({x, c[b], mean, se, agg.a.value + agg.b.value * x + agg.c.value * x * x * x});
        }
        write_csv(out / "fig1d_trend_response.csv", prov, {"phi", "count", "mean_next_return", "se", "cubic_fit"}, rows);
    }

    // b(k), c(k) with the parabolic fit.
    json para = nullptr;
    std::optional<ParabolicFit> pfit;
    if (b_pts.size() >= 4) {
        try {
            pfit = fit_parabolic_b(b_pts, c_pts);
            para = {{"amplitude", pfit->amplitude}, {"amplitude_se", pfit->amplitude_se}, {"k0", pfit->k0},
                    {"k0_se", pfit->k0_se},         {"delta_k", pfit->degenerate ? json(nullptr) : json(pfit->delta_k)},
                    {"delta_k_se", pfit->delta_k_se}, {"c_const", pfit->c_const}, {"c_const_se", pfit->c_const_se},
                    {"degenerate", pfit->degenerate}, {"residuals", pfit->residuals}};
        } catch (const std::exception& e) {
            warn(std::string("parabolic fit failed: ") + e.what());
        }
    } else {
        warn("parabolic fit needs at least 4 horizons");
    }
    report["parabolic"] = para;
    {
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < horizons.size(); ++i) {
            const double k = horizons[i].k;
            double fitted = std::nan("");
            if (pfit && !pfit->degenerate)
                fitted = pfit->amplitude * (1.0 - (k - pfit->k0) * (k - pfit->k0) / (pfit->delta_k * pfit->delta_k));
            rows.push_back({k, static_cast<double>(pow2(horizons[i].k)), reports[i].b.value, reports[i].b.error,
                            reports[i].c.value, reports[i].c.error, fitted});
        }
        write_csv(out / "fig6_b_by_scale.csv", prov, {"k", "T", "b", "b_error", "c", "c_error", "b_parabola"}, rows);
    }

    // Trend variances and adjacent-window correlation by scale; kappa fit.
    std::set<int> ks(config.horizons.begin(), config.horizons.end());
    ks.insert(config.kappa_horizons.begin(), config.kappa_horizons.end());
    std::map<int, double> var_phi;
    for (const auto& h : horizons) var_phi[h.k] = h.var_phi;
    std::vector<std::vector<double>> vrows;
    std::vector<VariancePoint> kappa_pts;
    const std::set<int> kappa_ks(config.kappa_horizons.begin(), config.kappa_horizons.end());
    for (const int k : ks) {
        const std::size_t t = pow2(k);
        std::vector<std::vector<double>> paths;
        for (const auto& m : markets)
            if (m.path.size() > 4 * t) paths.push_back(m.path);
        if (paths.empty()) {
            warn("variance at k = " + std::to_string(k) + " dropped: insufficient history");
            continue;
        }
        const int one[] = {k};
        const VariancePoint vp = tilde_variance_curve(paths, one).front();
        std::vector<WindowPair> pairs;
        for (const auto& m : markets) {
            if (m.returns.size() < 2 * t) continue;
            const auto p = adjacent_window_trends(m.returns, t);
            pairs.insert(pairs.end(), p.begin(), p.end());
        }
        const double adj = pairs.size() >= 3 ? pair_correlation(pairs) : std::nan("");
        const double vphi = var_phi.count(k) ? var_phi[k] : std::nan("");
        vrows.push_back({double(k), double(t), vp.var, vp.se, vphi, adj, static_cast<double>(pairs.size())});
        if (kappa_ks.count(k)) kappa_pts.push_back(vp);
    }
    write_csv(out / "fig8_variance.csv", prov,
              {"k", "T", "var_tilde", "var_tilde_se", "var_phi", "adjacent_correlation", "pairs"}, vrows);
    json kappa_json = nullptr;
    if (kappa_pts.size() >= 3) {
        const ScalingFit kf = fit_kappa(kappa_pts);
        kappa_json = {{"kappa", kf.exponent}, {"se", kf.exponent_se}, {"points", kappa_pts.size()},
                      {"residual_rms", kf.residual_rms}};
        try {
            kappa_json["dimension"] = dimension_for_kappa(kf.exponent);
        } catch (const std::domain_error& e) {
            kappa_json["dimension"] = nullptr;
            warn(std::string("no network dimension for this kappa: ") + e.what());
        }
    } else {
        warn("kappa fit needs at least 3 variance points");
    }
    report["kappa"] = kappa_json;

    // Generalized Hurst exponents per market.
    std::vector<std::vector<std::string>> hrows;
    json hurst = json::array();
    std::map<double, std::pair<double, double>> hsum;
    for (const auto& m : markets) {
        std::vector<std::size_t> hz;
        for (std::size_t t = 1; 10 * t <= m.path.size(); t *= 2) hz.push_back(t);
        if (hz.size() < 3) {
            warn("market " + m.name + " too short for Hurst exponents");
            continue;
        }
        const auto fits = moment_scaling(m.path, config.qs, hz);
        json mj{{"market", m.name}, {"horizons", hz}, {"H", json::array()}};
        for (const auto& f : fits) {
            hrows.push_back({m.name, format_double(f.q), format_double(f.exponent), format_double(f.exponent_se)});
            mj["H"].push_back({{"q", f.q}, {"value", f.exponent}, {"se", f.exponent_se}});
            hsum[f.q].first += f.exponent;
            hsum[f.q].second += 1.0;
        }
        hurst.push_back(mj);
    }
    write_csv_cells(out / "hurst.csv", prov, {"market", "q", "H", "H_se"}, hrows);
    json hmean = json::array();
    for (const auto& [q, acc] : hsum) hmean.push_back({{"q", q}, {"mean_H", acc.first / acc.second}});
    report["hurst"] = {{"per_market", hurst}, {"mean", hmean}};

    write_json(out / "report.json", prov, report);
    return report;
}

// ---- fit-kappa -------------------------------------------------------------

json cmd_fit_kappa(const FitKappaConfig& config, const std::filesystem::path& out) {
    if (config.input.empty()) throw std::invalid_argument("fit-kappa: no input file");
    KappaForm form = KappaForm::log_linear;
    if (config.form == "linear") form = KappaForm::linear;
    else if (config.form != "log_linear") throw std::invalid_argument("fit-kappa: form must be log_linear or linear");

    const json cfg = config.to_json();
    auto prov = make_provenance("fit-kappa", config.seed, cfg);
    prov.input_hashes[config.input] = sha256_file(config.input);
    const auto rows = load_variance_csv(config.input);
    std::vector<VariancePoint> pts;
    for (const auto& r : rows) pts.push_back({r.k, r.var, r.se});
    const ScalingFit fit = fit_kappa(pts, form);

    json result{{"kappa", fit.exponent},
                {"se", fit.exponent_se},
                {"slope", fit.slope},
                {"intercept", fit.intercept},
                {"residual_rms", fit.residual_rms},
                {"points", pts.size()},
                {"form", config.form}};
    const double lo_k = exponents_for_dimension(min_table_dimension).kappa;
    auto dim = [&](double kappa) { return dimension_for_kappa(std::clamp(kappa, lo_k, 1.0)); };
    if (fit.exponent >= lo_k && fit.exponent <= 1.0) {
        result["dimension"] = dimension_for_kappa(fit.exponent);
    } else {
        result["dimension"] = nullptr;
        warn("kappa " + format_double(fit.exponent) + " lies outside the tabulated range; no dimension");
    }
    result["dimension_range"] = {dim(fit.exponent - fit.exponent_se), dim(fit.exponent + fit.exponent_se)};
    write_json(out / "kappa.json", prov, {{"config", cfg}, {"result", result}});
    return result;
}

}  // namespace critmkt

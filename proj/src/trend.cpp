#include "critmkt/trend.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace critmkt {

std::vector<double> ReturnSeries::excess(double prem) const {
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), [prem](double r) { return r - prem; });
    return out;
}

std::vector<double> log_returns(std::span<const double> prices) {
    std::vector<double> r;
    if (prices.empty()) return r;
    for (std::size_t i = 0; i < prices.size(); ++i)
        if (!(prices[i] > 0.0) || !std::isfinite(prices[i]))
            throw std::invalid_argument("log_returns: non-positive or non-finite price at index " + std::to_string(i));
    r.reserve(prices.size() - 1);
    for (std::size_t i = 1; i < prices.size(); ++i) r.push_back(std::log(prices[i] / prices[i - 1]));
    return r;
}

ReturnSeries normalize_increments(std::span<const double> raw) {
    if (raw.size() < 2) throw std::invalid_argument("normalize_increments: need at least 2 increments");
    const auto n = static_cast<double>(raw.size());
    const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / n;
    double ss = 0.0;
    for (const double r : raw) ss += (r - mean) * (r - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 0.0) || !std::isfinite(sd)) throw std::domain_error("normalize_increments: zero variance");
    ReturnSeries out;
    out.mu = mean;
    out.sigma = sd;
    out.values.resize(raw.size());
    std::transform(raw.begin(), raw.end(), out.values.begin(), [sd](double r) { return r / sd; });
    return out;
}

ReturnSeries normalize_returns(std::span<const double> prices) {
    if (prices.size() < 3) throw std::invalid_argument("normalize_returns: need at least 3 prices");
    return normalize_increments(log_returns(prices));
}

std::string_view to_string(WeightKind kind) noexcept {
    switch (kind) {
        case WeightKind::step: return "step";
        case WeightKind::psi: return "psi";
        case WeightKind::phi: return "phi";
    }
    return "?";
}

WeightKind parse_weight_kind(std::string_view name) {
    if (name == "step" || name == "tilde") return WeightKind::step;
    if (name == "psi") return WeightKind::psi;
    if (name == "phi") return WeightKind::phi;
    throw std::invalid_argument("unknown weight kind '" + std::string(name) + "' (expected step, psi or phi)");
}

double WeightFunction::sum_squares() const {
    double s = 0.0;
    for (const double w : weights) s += w * w;
    return s;
}

double WeightFunction::average_lookback() const {
    double num = 0.0, den = 0.0;
    for (std::size_t n = 0; n < weights.size(); ++n) {
        num += static_cast<double>(n + 1) * weights[n];
        den += weights[n];
    }
    return num / den;
}

std::size_t WeightFunction::peak() const {
    return static_cast<std::size_t>(std::distance(weights.begin(), std::max_element(weights.begin(), weights.end())));
}

std::size_t WeightFunction::warmup(double mass) const {
    double acc = 0.0;
    for (std::size_t n = 0; n < weights.size(); ++n) {
        if (acc >= mass) return n;
        acc += weights[n] * weights[n];
    }
    return weights.size();
}

double psi_normalization(double horizon) {
    return std::sqrt(-std::expm1(-4.0 / horizon));
}

double phi_normalization(double horizon) {
    const double a = -std::expm1(-4.0 / horizon);
    return a * a / std::sqrt(-std::expm1(-8.0 / horizon));
}

WeightFunction weight_step(std::size_t horizon) {
    if (horizon < 1) throw std::invalid_argument("weight_step: horizon must be >= 1");
    return {WeightKind::step, static_cast<double>(horizon),
            std::vector<double>(horizon, 1.0 / std::sqrt(static_cast<double>(horizon)))};
}

namespace {

template <typename Shape>
WeightFunction exponential_kernel(WeightKind kind, double horizon, double cutoff, Shape shape) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("weights: horizon must be > 0");
    if (!(cutoff > 0.0 && cutoff < 1.0)) throw std::invalid_argument("weights: cutoff must lie in (0, 1)");
    WeightFunction wf{kind, horizon, {}};
    double peak = 0.0;
    for (std::size_t n = 0;; ++n) {
        const double w = shape(static_cast<double>(n));
        wf.weights.push_back(w);
        if (w >= peak) {
            peak = w;
        } else if (w < cutoff * peak) {
            break;
        }
    }
    const double scale = 1.0 / std::sqrt(wf.sum_squares());
    for (auto& w : wf.weights) w *= scale;
    return wf;
}

}  // namespace

WeightFunction weight_psi(double horizon, double cutoff) {
    const double m = psi_normalization(horizon);
    return exponential_kernel(WeightKind::psi, horizon, cutoff,
                              [=](double n) { return m * std::exp(-2.0 * n / horizon); });
}

WeightFunction weight_phi(double horizon, double cutoff) {
    const double nt = phi_normalization(horizon);
    return exponential_kernel(WeightKind::phi, horizon, cutoff,
                              [=](double n) { return nt * (n + 1.0) * std::exp(-2.0 * n / horizon); });
}

WeightFunction make_weights(WeightKind kind, double horizon) {
    switch (kind) {
        case WeightKind::step: {
            const double r = std::round(horizon);
            if (r < 1.0 || std::abs(r - horizon) > 1e-9) throw std::invalid_argument("step weights need an integer horizon >= 1");
            return weight_step(static_cast<std::size_t>(r));
        }
        case WeightKind::psi: return weight_psi(horizon);
        case WeightKind::phi: return weight_phi(horizon);
    }
    throw std::invalid_argument("make_weights: unknown kind");
}

TrendSeries trend_strength(std::span<const double> excess, const WeightFunction& weights) {
    TrendSeries out{std::vector<double>(excess.size(), 0.0), weights.kind, weights.horizon, weights.warmup()};
    const auto& w = weights.weights;
    for (std::size_t t = 0; t < excess.size(); ++t) {
        const std::size_t depth = std::min(t + 1, w.size());
        double acc = 0.0;
        for (std::size_t n = 0; n < depth; ++n) acc += w[n] * excess[t - n];
        out.values[t] = acc;
    }
    return out;
}

TrendSeries trend_strength(const ReturnSeries& returns, const WeightFunction& weights) {
    return trend_strength(returns.excess(), weights);
}

TrendSeries trend_strength_recursive(std::span<const double> excess, double horizon, WeightKind kind) {
    if (kind == WeightKind::step) throw std::invalid_argument("trend_strength_recursive: step weights have no recursion");
    if (!(horizon > 0.0)) throw std::invalid_argument("trend_strength_recursive: horizon must be > 0");
    const double x = std::exp(-2.0 / horizon);
    TrendSeries out{std::vector<double>(excess.size(), 0.0), kind, horizon, make_weights(kind, horizon).warmup()};
    double a = 0.0, b = 0.0;
    if (kind == WeightKind::psi) {
        const double m = psi_normalization(horizon);
        for (std::size_t t = 0; t < excess.size(); ++t) {
            a = x * a + excess[t];
            out.values[t] = m * a;
        }
    } else {
        const double nt = phi_normalization(horizon);
        for (std::size_t t = 0; t < excess.size(); ++t) {
            b = x * (b + a);
            a = x * a + excess[t];
            out.values[t] = nt * (a + b);
        }
    }
    return out;
}

TrendSeries trend_strength_recursive(const ReturnSeries& returns, double horizon, WeightKind kind) {
    return trend_strength_recursive(returns.excess(), horizon, kind);
}

std::vector<WindowPair> adjacent_window_trends(const ReturnSeries& returns, std::size_t horizon) {
    if (horizon < 1) throw std::invalid_argument("adjacent_window_trends: horizon must be >= 1");
    const std::size_t n = returns.size();
    if (n < 2 * horizon)
        throw std::invalid_argument("adjacent_window_trends: need at least 2T = " + std::to_string(2 * horizon) +
                                    " returns, got " + std::to_string(n));
    const std::size_t windows = n / horizon;
    const std::size_t start = n - windows * horizon;
    const double prem = returns.premium();
    const double scale = 1.0 / std::sqrt(static_cast<double>(horizon));
    std::vector<double> trend(windows);
    for (std::size_t j = 0; j < windows; ++j) {
        double acc = 0.0;
        for (std::size_t i = start + j * horizon; i < start + (j + 1) * horizon; ++i) acc += returns.values[i] - prem;
        trend[j] = scale * acc;
    }
    std::vector<WindowPair> pairs;
    pairs.reserve(windows - 1);
    for (std::size_t j = 1; j < windows; ++j) pairs.push_back({trend[j], trend[j - 1]});
    return pairs;
}

double pair_correlation(std::span<const WindowPair> pairs) {
    if (pairs.size() < 2) throw std::invalid_argument("pair_correlation: need at least 2 pairs");
    const auto n = static_cast<double>(pairs.size());
    double mx = 0.0, my = 0.0;
    for (const auto& p : pairs) {
        mx += p.current;
        my += p.previous;
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (const auto& p : pairs) {
        sxy += (p.current - mx) * (p.previous - my);
        sxx += (p.current - mx) * (p.current - mx);
        syy += (p.previous - my) * (p.previous - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace critmkt

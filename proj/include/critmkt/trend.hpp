#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace critmkt {

/**
 * Normalized returns R(t) = r(t) / sigma.
 *
 * `mu` and `sigma` are the sample mean and standard deviation (n - 1
 * denominator) of the raw increments r. The risk premium in normalized units
 * is mu / sigma and the excess returns are R - mu / sigma.
 */
struct ReturnSeries {
    std::vector<double> values;
    double mu = 0.0;
    double sigma = 1.0;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] double premium() const noexcept { return mu / sigma; }
    /// R - premium; pass another premium for train-only estimates.
    [[nodiscard]] std::vector<double> excess() const { return excess(premium()); }
    [[nodiscard]] std::vector<double> excess(double premium) const;
};

/// r(t) = ln(P(t) / P(t-1)). Throws std::invalid_argument on P <= 0.
[[nodiscard]] std::vector<double> log_returns(std::span<const double> prices);

/// Normalize raw increments to unit sample variance.
/// Throws std::invalid_argument for fewer than 2 values and
/// std::domain_error on zero variance.
[[nodiscard]] ReturnSeries normalize_increments(std::span<const double> raw);

/// log_returns followed by normalize_increments; needs >= 3 prices.
[[nodiscard]] ReturnSeries normalize_returns(std::span<const double> prices);

enum class WeightKind { step, psi, phi };

[[nodiscard]] std::string_view to_string(WeightKind kind) noexcept;
/// Parses "step", "psi" or "phi" (also "tilde" for step).
[[nodiscard]] WeightKind parse_weight_kind(std::string_view name);

/// Relative weight below which the exponential kernels are truncated (see
/// weight_psi). Small enough that the truncated filter agrees with the
/// infinite recursion to ~1e-12.
inline constexpr double default_weight_cutoff = 1e-12;

/// Captured squared-weight mass that ends the warm-up window.
inline constexpr double default_warmup_mass = 0.99;

/**
 * Causal trend weights w(n), n = 0..n_max, with sum w^2 = 1.
 */
struct WeightFunction {
    WeightKind kind = WeightKind::psi;
    double horizon = 1.0;
    std::vector<double> weights;

    [[nodiscard]] std::size_t n_max() const noexcept { return weights.empty() ? 0 : weights.size() - 1; }
    [[nodiscard]] double sum_squares() const;
    /// E[n + 1] with the weights normalized to unit sum.
    [[nodiscard]] double average_lookback() const;
    [[nodiscard]] std::size_t peak() const;
    /// Smallest m with sum_{n<m} w(n)^2 >= mass.
    [[nodiscard]] std::size_t warmup(double mass = default_warmup_mass) const;
};

/// w(n) = T^{-1/2} for n < T.
[[nodiscard]] WeightFunction weight_step(std::size_t horizon);

/// w(n) = M_T exp(-2n/T), M_T = sqrt(1 - exp(-4/T)); truncated after the
/// first n with w(n) < cutoff * max w, then renormalized.
[[nodiscard]] WeightFunction weight_psi(double horizon, double cutoff = default_weight_cutoff);

/// w(n) = N_T (n+1) exp(-2n/T), N_T = (1 - e^{-4/T})^2 / sqrt(1 - e^{-8/T});
/// same truncation policy as weight_psi.
[[nodiscard]] WeightFunction weight_phi(double horizon, double cutoff = default_weight_cutoff);

/// Dispatch on kind; step requires an integral horizon.
[[nodiscard]] WeightFunction make_weights(WeightKind kind, double horizon);

/// Exact closed-form normalizers.
[[nodiscard]] double psi_normalization(double horizon);
[[nodiscard]] double phi_normalization(double horizon);

struct TrendSeries {
    std::vector<double> values;  ///< phi(t) from excess returns at t, t-1, ..., t-n_max
    WeightKind kind = WeightKind::psi;
    double horizon = 1.0;
    std::size_t warmup = 0;  ///< values before this index have incomplete history

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

/// Direct causal convolution of the excess returns with the weights.
[[nodiscard]] TrendSeries trend_strength(const ReturnSeries& returns, const WeightFunction& weights);
[[nodiscard]] TrendSeries trend_strength(std::span<const double> excess, const WeightFunction& weights);

/**
 * Recursive (infinite-memory) evaluation, x = exp(-2/T):
 *   psi: A(t) = x A(t-1) + R(t);                      psi = M_T A
 *   phi: A as above, B(t) = x (B(t-1) + A(t-1));      phi = N_T (A + B)
 * Throws std::invalid_argument for WeightKind::step.
 */
[[nodiscard]] TrendSeries trend_strength_recursive(const ReturnSeries& returns, double horizon, WeightKind kind);
[[nodiscard]] TrendSeries trend_strength_recursive(std::span<const double> excess, double horizon, WeightKind kind);

struct WindowPair {
    double current = 0.0;   ///< step trend over window j
    double previous = 0.0;  ///< step trend over window j - 1
};

/// Non-overlapping windows of length T laid from the end of the series;
/// floor(n/T) windows give floor(n/T) - 1 adjacent pairs. Each window's trend
/// is T^{-1/2} times the sum of its excess returns. Throws
/// std::invalid_argument if n < 2T.
[[nodiscard]] std::vector<WindowPair> adjacent_window_trends(const ReturnSeries& returns, std::size_t horizon);

/// Sample Pearson correlation of the pairs.
[[nodiscard]] double pair_correlation(std::span<const WindowPair> pairs);

}  // namespace critmkt

#pragma once

#include "critmkt/theory.hpp"
#include "critmkt/trend.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace critmkt {

/// Thrown when a design matrix or moment matrix has lost rank.
class RankDeficient : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Aligned observations (phi(t), R(t+1)) for the next-day regression,
 * possibly pooled over markets and horizons.
 *
 * `weight_mass` holds sum_{n <= min(t, n_max)} w(n) so that a trend computed
 * with the full-sample premium can be re-centred on any other premium:
 * phi'(t) = phi(t) + (m_full - m') * weight_mass(t).
 */
struct RegressionSample {
    std::vector<double> trend;
    std::vector<double> target;
    std::vector<double> weight_mass;
    std::vector<std::int64_t> day;      ///< calendar index of t, shared across markets
    std::vector<std::uint32_t> market;  ///< index into `premium`
    std::vector<double> premium;        ///< full-sample premium per market

    [[nodiscard]] std::size_t size() const noexcept { return trend.size(); }
    void append(const RegressionSample& other);
};

/// Pairs phi(t) with R(t+1) for t >= trend.warmup. `days` (optional) gives the
/// calendar index of each return; defaults to 0, 1, 2, ...
[[nodiscard]] RegressionSample make_regression_sample(const TrendSeries& trend, const ReturnSeries& returns,
                                                      const WeightFunction& weights,
                                                      std::span<const std::int64_t> days = {});

/// Concatenate samples; market ids of later samples are offset so that every
/// input keeps its own premium.
[[nodiscard]] RegressionSample pool_samples(std::span<const RegressionSample> samples);

struct Coefficient {
    double value = 0.0;
    double error = 0.0;
    double t_stat = 0.0;
};

/// R(t+1) = a + b phi(t) + c phi(t)^3.
struct RegressionReport {
    Coefficient a, b, c;
    double r_squared = 0.0;
    double r_squared_adj = 0.0;
    std::string r_squared_adj_method = "classical";  ///< or "cv-<folds>"
    std::string error_method = "classical";          ///< or "bootstrap-<n>"
    std::size_t n_obs = 0;
    std::size_t skipped_resamples = 0;
};

/// OLS on (1, phi, phi^3) via pivoted QR of the normal equations, classical
/// standard errors. Needs >= 100 observations. Throws RankDeficient.
[[nodiscard]] RegressionReport fit_cubic(const RegressionSample& sample);
[[nodiscard]] RegressionReport fit_cubic(const TrendSeries& trend, const ReturnSeries& returns);

/// (beta, gamma) from [<phi^2> <phi^4>; <phi^4> <phi^6>] (beta, gamma)^T =
/// (<phi R>, <phi^3 R>)^T.
struct LangevinPair {
    double beta = 0.0;
    double gamma = 0.0;
};
[[nodiscard]] LangevinPair fit_langevin_pair(const RegressionSample& sample);
[[nodiscard]] LangevinPair fit_langevin_pair(const TrendSeries& trend, const ReturnSeries& returns);

struct BootstrapOptions {
    std::size_t samples = 5000;
    std::uint64_t seed = 1;
    unsigned threads = 1;           ///< 0 = hardware concurrency
    std::size_t block_length = 1;   ///< > 1 switches to circular block resampling of days
};

struct BootstrapResult {
    std::array<double, 3> se{};           ///< a, b, c
    std::array<double, 3> lower{};        ///< 2.5% percentile
    std::array<double, 3> upper{};        ///< 97.5% percentile
    std::vector<std::array<double, 3>> draws;  ///< accepted resamples, in resample order
    std::size_t skipped = 0;
};

/// Resamples days with replacement (all observations of a drawn day come
/// along) and refits. Resample r uses make_rng(seed, r), so the result does not
/// depend on the thread count.
[[nodiscard]] BootstrapResult bootstrap_errors(const RegressionSample& sample, const BootstrapOptions& options);

enum class FoldLayout { contiguous, shuffled };

/// Mean out-of-sample R^2 over `folds` day-block folds. Premiums are
/// re-estimated on the training folds. `seed` only matters for
/// FoldLayout::shuffled. Needs n >= 30 folds and folds >= 2.
[[nodiscard]] double cross_validate(const RegressionSample& sample, std::size_t folds, std::uint64_t seed = 1,
                                    FoldLayout layout = FoldLayout::contiguous);

struct RegressionOptions {
    std::size_t bootstrap_samples = 5000;  ///< 0 keeps classical errors
    std::size_t folds = 15;                ///< 0 keeps classical adjusted R^2
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::size_t block_length = 1;
};

/// fit_cubic, then bootstrap errors and cross-validated R^2_adj when enabled.
[[nodiscard]] RegressionReport regression_report(const RegressionSample& sample, const RegressionOptions& options);

/// b(k) = A (1 - (k - k0)^2 / dk^2), c(k) = const.
struct ParabolicFit {
    double amplitude = 0.0;
    double k0 = 0.0;
    double delta_k = 0.0;
    double c_const = 0.0;
    double amplitude_se = 0.0;
    double k0_se = 0.0;
    double delta_k_se = 0.0;
    double c_const_se = 0.0;
    std::vector<double> residuals;  ///< b_k minus fit, input order
    bool degenerate = false;        ///< no finite curvature; delta_k is +inf
};

struct ScalePoint {
    double k = 0.0;
    double value = 0.0;
};

/// Least squares in the equivalent form b = alpha + beta k + gamma k^2; errors by
/// the delta method. Needs >= 4 scales. c_const is the mean of c_by_scale.
[[nodiscard]] ParabolicFit fit_parabolic_b(std::span<const ScalePoint> b_by_scale, std::span<const ScalePoint> c_by_scale);

struct ScalingPoint {
    double x = 0.0;      ///< regressor (ln T, or k)
    double value = 0.0;  ///< statistic, before taking logs
    double se = 0.0;     ///< standard error of value (0 = unknown)
};

struct ScalingFit {
    std::vector<ScalingPoint> points;
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double exponent = 0.0;
    double exponent_se = 0.0;
    double q = 0.0;                  ///< moment order (moment_scaling only)
    std::vector<double> residuals;   ///< in the fitted (log) space
    double residual_rms = 0.0;
};

/**
 * M_q(T) = <|pi(t+T) - pi(t)|^q> over all t (overlapping windows), fitted as
 * ln M_q = intercept + slope ln T with weights n_eff = (n - T)/T. H_q = slope/q.
 * `path` is the cumulative process; use moment_scaling_increments for returns.
 * Needs >= 3 horizons and path length >= 10 max T.
 */
[[nodiscard]] std::vector<ScalingFit> moment_scaling(std::span<const double> path, std::span<const double> qs,
                                                     std::span<const std::size_t> horizons);
[[nodiscard]] std::vector<ScalingFit> moment_scaling_increments(std::span<const double> increments,
                                                                std::span<const double> qs,
                                                                std::span<const std::size_t> horizons);

enum class KappaForm {
    log_linear,  ///< ln var = c + (kappa - 1) k ln 2
    linear,      ///< var = c - (1 - kappa) ln2 k, valid for kappa near 1
};

struct VariancePoint {
    double k = 0.0;
    double var = 0.0;
    double se = 0.0;  ///< 0 = unweighted
};

/// kappa from trend variances at T = 2^k. Weighted when every point has se > 0.
/// Needs >= 3 points; throws std::domain_error on non-positive variances.
[[nodiscard]] ScalingFit fit_kappa(std::span<const VariancePoint> points, KappaForm form = KappaForm::log_linear);

/**
 * Variance of phi~_T(t) = T^{-1/2} (pi(t) - pi(t-T)) over all t, T = 2^k, as a
 * raw second moment (zero-mean process). se uses n_eff = (n - T)/T.
 * Averaged over paths when several are given.
 */
[[nodiscard]] std::vector<VariancePoint> tilde_variance_curve(std::span<const std::vector<double>> paths,
                                                              std::span<const int> ks);

/// Covariance sequence c(k) = Delta(k), k = 0..n-1; zero beyond tau in the
/// scaling regime.
[[nodiscard]] std::vector<double> propagator_covariance(const PropagatorModel& model, std::size_t n);

/**
 * Zero-mean stationary Gaussian vector with autocovariance c(0..n-1).
 * Circulant embedding (FFT) first; eigenvalues down to -1e-10 c(0) are clipped
 * to zero. If the embedding is indefinite beyond that and n <= 4096 the dense
 * covariance is factorized instead. Throws std::domain_error otherwise.
 */
[[nodiscard]] std::vector<double> sample_stationary_gaussian(std::span<const double> autocovariance, std::uint64_t seed);

/// pi(0..n-1) with <pi(i) pi(j)> = Delta(|i - j|).
[[nodiscard]] std::vector<double> gaussian_process_from_propagator(const PropagatorModel& model, std::size_t n,
                                                                   std::uint64_t seed);

/// Sample autocorrelation at `lag` (mean removed, biased normalization).
[[nodiscard]] double sample_autocorrelation(std::span<const double> x, std::size_t lag);

}  // namespace critmkt

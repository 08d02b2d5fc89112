#pragma once

#include <optional>
#include <string_view>
#include <vector>

namespace critmkt {

/// Static and dynamic critical exponents of the Ising (Z2) class at
/// dimension D. `kappa` is always (2 - eta) / z evaluated exactly.
struct CriticalExponents {
    double dimension = 0.0;
    double eta = 0.0;
    double z = 2.0;
    double kappa = 1.0;
    std::optional<double> beta;
    std::optional<double> nu;
};

/// A row of the published exponent table, numbers as printed.
struct ExponentTableRow {
    double dimension;
    double eta;
    double z;
    double kappa_printed;  ///< rounded to 3 decimals in the source table
};

/// The six published rows, D = 4, 3.5, 3, 2.5, 2, 1.5.
[[nodiscard]] const std::vector<ExponentTableRow>& exponent_table();

/// Table rows as CriticalExponents (kappa recomputed from eta and z).
[[nodiscard]] std::vector<CriticalExponents> table1_exponents();

inline constexpr double min_table_dimension = 1.5;
inline constexpr double max_table_dimension = 4.0;
/// c in z = 2 + c * eta, the relation behind the table's z column.
inline constexpr double dynamic_eta_coefficient = 2.0 / 3.0;

/// eta(D) and z(D) by monotone piecewise-cubic (PCHIP) interpolation through
/// the table nodes (exact at nodes); kappa = (2 - eta) / z. Throws
/// std::domain_error for D outside [1.5, 4].
[[nodiscard]] CriticalExponents exponents_for_dimension(double dimension);

/// Inverse of D -> kappa(D). Throws std::domain_error outside
/// [kappa(1.5), 1].
[[nodiscard]] double dimension_for_kappa(double kappa);

/// eta = 2 beta / nu + 2 - D.
[[nodiscard]] double eta_from_beta_nu(double beta, double nu, double dimension);

/// Hurst exponent H = kappa(D) / 2 of the mono-scaling critical process.
[[nodiscard]] double predicted_hurst(double dimension);

enum class Regime {
    scaling,      ///< Delta = (tau^kappa - |t|^kappa) / 2, |t| <= tau
    exponential,  ///< Delta = (tau^kappa / 2) exp(-|t| / tau)
    matched,      ///< heuristic: scaling up to a knee t*, exponential tail rescaled for continuity
};

[[nodiscard]] std::string_view to_string(Regime regime) noexcept;
[[nodiscard]] Regime parse_regime(std::string_view name);
[[nodiscard]] constexpr bool is_heuristic(Regime r) noexcept { return r == Regime::matched; }

/// Two-point function of the zero mode, Delta(t) = <pi(0) pi(t)>.
struct PropagatorModel {
    double tau = 1.0;    ///< correlation time
    double kappa = 1.0;  ///< (2 - eta) / z, in (0, 1]
    Regime regime = Regime::scaling;
    double knee = 0.0;   ///< t* for Regime::matched, in (0, tau]

    [[nodiscard]] static PropagatorModel scaling(double tau, double kappa) { return {tau, kappa, Regime::scaling, 0.0}; }
    [[nodiscard]] static PropagatorModel exponential(double tau, double kappa) { return {tau, kappa, Regime::exponential, 0.0}; }
    [[nodiscard]] static PropagatorModel matched(double tau, double kappa, double knee) { return {tau, kappa, Regime::matched, knee}; }

    void validate() const;
};

/// Throws std::domain_error in the scaling regime when |t| > tau.
[[nodiscard]] double propagator(const PropagatorModel& model, double t);

struct PropagatorDerivatives {
    double first = 0.0;
    double second = 0.0;
};

/// dDelta/dt and d2Delta/dt2 for t > 0 (t < tau in the scaling regime).
[[nodiscard]] PropagatorDerivatives propagator_derivatives(const PropagatorModel& model, double t);

/// <R(0) R(t)> = -Delta''(t), proportionality constant taken as 1.
[[nodiscard]] double predicted_return_autocorrelation(const PropagatorModel& model, double t);

/**
 * Trend/next-return correlation
 *   <phi_w, R> = -2 w^{3/2} int_0^inf zeta e^{-w zeta} Delta''(zeta) dzeta.
 *
 * Closed forms: scaling -2 w^{3/2} (kappa(1-kappa)/2) Gamma(kappa) w^{-kappa}
 * (requires T = 2/w <= tau/4); exponential
 * -2 w^{3/2} (tau^{kappa-2}/2) / (w + 1/tau)^2. The matched regime is
 * integrated numerically.
 */
[[nodiscard]] double predicted_trend_return_correlation(const PropagatorModel& model, double omega);
/// Same quantity by adaptive quadrature in every regime (relative tolerance 1e-10).
[[nodiscard]] double predicted_trend_return_correlation_quadrature(const PropagatorModel& model, double omega);

enum class TrendEstimator { phi, tilde };

[[nodiscard]] std::string_view to_string(TrendEstimator e) noexcept;

/**
 * Variance of the unit-normalized trend strength at horizon T.
 *   tilde: (2/T) (Delta(0) - Delta(T))
 *   phi:   -2 w^3 int_0^inf du e^{-w u} int_0^u dv v Delta'(v),  w = 2/T
 * phi uses closed forms in the scaling (kappa Gamma(kappa+1) w^{1-kappa}) and
 * exponential (w^2/(w+1/tau)^2 tau^{kappa-1}) regimes and quadrature in the
 * matched regime. Scaling regime requires T <= tau/4.
 */
[[nodiscard]] double predicted_trend_variance(const PropagatorModel& model, double horizon, TrendEstimator estimator);
/// phi variance by quadrature (any regime), the double integral reduced to
/// (1/w) int_0^inf v Delta'(v) e^{-w v} dv by exchanging the order.
[[nodiscard]] double predicted_trend_variance_quadrature(const PropagatorModel& model, double horizon);

/// <phi~_T(t) phi~_T(t-T)> = -(1/T) [Delta(0) - 2 Delta(T) + Delta(2T)].
[[nodiscard]] double predicted_adjacent_window_correlation(const PropagatorModel& model, double horizon);

/// K_2(T) = 2 - 2 Delta(T) / Delta(0).
[[nodiscard]] double predicted_second_moment_ratio(const PropagatorModel& model, double horizon);

}  // namespace critmkt

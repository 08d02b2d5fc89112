#include "critmkt/theory.hpp"

#include <boost/math/special_functions/fpclassify.hpp>  // must precede pchip.hpp
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace critmkt {

const std::vector<ExponentTableRow>& exponent_table() {
    static const std::vector<ExponentTableRow> rows{
        {4.0, 0.00, 2.000, 1.000},  {3.5, 0.002, 2.001, 0.998}, {3.0, 0.036, 2.024, 0.970},
        {2.5, 0.106, 2.071, 0.915}, {2.0, 0.250, 2.167, 0.808}, {1.5, 0.523, 2.352, 0.628},
    };
    return rows;
}

std::vector<CriticalExponents> table1_exponents() {
    std::vector<CriticalExponents> out;
    for (const auto& r : exponent_table()) out.push_back({r.dimension, r.eta, r.z, (2.0 - r.eta) / r.z, {}, {}});
    return out;
}

namespace {

using Pchip = boost::math::interpolators::pchip<std::vector<double>>;

// PCHIP through the table nodes in ascending D; `pick` selects the column.
template <typename Pick>
Pchip table_interpolant(Pick pick) {
    std::vector<double> d, y;
    const auto& rows = exponent_table();
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        d.push_back(it->dimension);
        y.push_back(pick(*it));
    }
    return Pchip(std::move(d), std::move(y));
}

const Pchip& eta_interpolant() {
    static const Pchip interp = table_interpolant([](const ExponentTableRow& r) { return r.eta; });
    return interp;
}

const Pchip& z_interpolant() {
    static const Pchip interp = table_interpolant([](const ExponentTableRow& r) { return r.z; });
    return interp;
}

double kappa_of_dimension(double dimension) {
    return exponents_for_dimension(dimension).kappa;
}

}  // namespace

CriticalExponents exponents_for_dimension(double dimension) {
    if (!(dimension >= min_table_dimension && dimension <= max_table_dimension))
        throw std::domain_error("exponents_for_dimension: D = " + std::to_string(dimension) + " outside [1.5, 4]");
    CriticalExponents e;
    e.dimension = dimension;
    e.eta = eta_interpolant()(dimension);
    e.z = z_interpolant()(dimension);
    for (const auto& r : exponent_table())
        if (r.dimension == dimension) {
            e.eta = r.eta;
            e.z = r.z;
        }
    e.kappa = (2.0 - e.eta) / e.z;
    return e;
}

double dimension_for_kappa(double kappa) {
    const double lo_kappa = kappa_of_dimension(min_table_dimension);
    const double hi_kappa = kappa_of_dimension(max_table_dimension);
    if (!(kappa >= lo_kappa && kappa <= hi_kappa))
        throw std::domain_error("dimension_for_kappa: kappa = " + std::to_string(kappa) + " outside [" +
                                std::to_string(lo_kappa) + ", " + std::to_string(hi_kappa) + "]");
    if (kappa == hi_kappa) return max_table_dimension;
    if (kappa == lo_kappa) return min_table_dimension;
    auto f = [kappa](double d) { return kappa_of_dimension(d) - kappa; };
    std::uintmax_t iterations = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(f, min_table_dimension, max_table_dimension,
                                                          boost::math::tools::eps_tolerance<double>(48), iterations);
    return 0.5 * (a + b);
}

double eta_from_beta_nu(double beta, double nu, double dimension) {
    if (!(nu > 0.0)) throw std::invalid_argument("eta_from_beta_nu: nu must be > 0");
    return 2.0 * beta / nu + 2.0 - dimension;
}

double predicted_hurst(double dimension) {
    return exponents_for_dimension(dimension).kappa / 2.0;
}

std::string_view to_string(Regime regime) noexcept {
    switch (regime) {
        case Regime::scaling: return "scaling";
        case Regime::exponential: return "exponential";
        case Regime::matched: return "matched";
    }
    return "?";
}

Regime parse_regime(std::string_view name) {
    if (name == "scaling") return Regime::scaling;
    if (name == "exponential") return Regime::exponential;
    if (name == "matched") return Regime::matched;
    throw std::invalid_argument("unknown regime '" + std::string(name) + "' (expected scaling, exponential or matched)");
}

std::string_view to_string(TrendEstimator e) noexcept {
    return e == TrendEstimator::phi ? "phi" : "tilde";
}

void PropagatorModel::validate() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("propagator: tau must be finite and > 0");
    if (!(kappa > 0.0 && kappa <= 1.0)) throw std::invalid_argument("propagator: kappa must lie in (0, 1]");
    if (regime == Regime::matched && !(knee > 0.0 && knee <= tau))
        throw std::invalid_argument("propagator: matched regime needs 0 < knee <= tau");
}

namespace {

double scaling_value(double tau, double kappa, double t) {
    return 0.5 * (std::pow(tau, kappa) - std::pow(t, kappa));
}

// Pure power-law pieces, used unchecked inside quadratures.
double scaling_first(double kappa, double t) { return -0.5 * kappa * std::pow(t, kappa - 1.0); }
double scaling_second(double kappa, double t) { return 0.5 * kappa * (1.0 - kappa) * std::pow(t, kappa - 2.0); }

// Matched tail amplitude A with Delta(t) = A exp(-(t - t*) / tau) for t > t*.
double matched_amplitude(const PropagatorModel& m) { return scaling_value(m.tau, m.kappa, m.knee); }

PropagatorDerivatives unchecked_derivatives(const PropagatorModel& m, double t) {
    switch (m.regime) {
        case Regime::scaling: return {scaling_first(m.kappa, t), scaling_second(m.kappa, t)};
        case Regime::exponential: {
            const double e = std::exp(-t / m.tau);
            return {-0.5 * std::pow(m.tau, m.kappa - 1.0) * e, 0.5 * std::pow(m.tau, m.kappa - 2.0) * e};
        }
        case Regime::matched: {
            if (t <= m.knee) return {scaling_first(m.kappa, t), scaling_second(m.kappa, t)};
            const double v = matched_amplitude(m) * std::exp(-(t - m.knee) / m.tau);
            return {-v / m.tau, v / (m.tau * m.tau)};
        }
    }
    return {};
}

void require_scaling_horizon(const PropagatorModel& m, double horizon, const char* what) {
    if (m.regime == Regime::scaling && horizon > m.tau / 4.0)
        throw std::domain_error(std::string(what) + ": scaling regime needs T <= tau/4 (T = " + std::to_string(horizon) +
                                ", tau = " + std::to_string(m.tau) + ")");
}

constexpr double quad_tol = 1e-10;

void check_converged(double q, double error, double l1) {
    if (!std::isfinite(q) || (error > 1e-6 * l1 && error > 1e-300))
        throw std::runtime_error("quadrature did not converge (error estimate " + std::to_string(error) + ")");
}

template <typename F>
double integrate_half_line(F f, double from) {
    thread_local boost::math::quadrature::exp_sinh<double> integrator;
    double error = 0.0, l1 = 0.0;
    const double q = integrator.integrate(
        [&](double x) { return f(x); }, from, std::numeric_limits<double>::infinity(), quad_tol, &error, &l1);
    check_converged(q, error, l1);
    return q;
}

template <typename F>
double integrate_interval(F f, double a, double b) {
    if (b <= a) return 0.0;
    thread_local boost::math::quadrature::tanh_sinh<double> integrator;
    double error = 0.0, l1 = 0.0;
    const double q = integrator.integrate([&](double x) { return f(x); }, a, b, quad_tol, &error, &l1);
    check_converged(q, error, l1);
    return q;
}

}  // namespace

double propagator(const PropagatorModel& model, double t) {
    model.validate();
    const double at = std::abs(t);
    switch (model.regime) {
        case Regime::scaling:
            if (at > model.tau)
                throw std::domain_error("propagator: scaling regime needs |t| <= tau (t = " + std::to_string(t) + ")");
            return scaling_value(model.tau, model.kappa, at);
        case Regime::exponential: return 0.5 * std::pow(model.tau, model.kappa) * std::exp(-at / model.tau);
        case Regime::matched:
            if (at <= model.knee) return scaling_value(model.tau, model.kappa, at);
            return matched_amplitude(model) * std::exp(-(at - model.knee) / model.tau);
    }
    return 0.0;
}

PropagatorDerivatives propagator_derivatives(const PropagatorModel& model, double t) {
    model.validate();
    if (!(t > 0.0)) throw std::domain_error("propagator_derivatives: t must be > 0");
    if (model.regime == Regime::scaling && t >= model.tau)
        throw std::domain_error("propagator_derivatives: scaling regime needs t < tau");
    return unchecked_derivatives(model, t);
}

double predicted_return_autocorrelation(const PropagatorModel& model, double t) {
    return -propagator_derivatives(model, t).second;
}

double predicted_trend_return_correlation(const PropagatorModel& model, double omega) {
    model.validate();
    if (!(omega > 0.0)) throw std::domain_error("predicted_trend_return_correlation: omega must be > 0");
    require_scaling_horizon(model, 2.0 / omega, "predicted_trend_return_correlation");
    const double k = model.kappa;
    switch (model.regime) {
        case Regime::scaling:
            return -2.0 * std::pow(omega, 1.5) * (0.5 * k * (1.0 - k)) * std::tgamma(k) * std::pow(omega, -k);
        case Regime::exponential: {
            const double s = omega + 1.0 / model.tau;
            return -2.0 * std::pow(omega, 1.5) * 0.5 * std::pow(model.tau, k - 2.0) / (s * s);
        }
        case Regime::matched: return predicted_trend_return_correlation_quadrature(model, omega);
    }
    return 0.0;
}

double predicted_trend_return_correlation_quadrature(const PropagatorModel& model, double omega) {
    model.validate();
    if (!(omega > 0.0)) throw std::domain_error("predicted_trend_return_correlation: omega must be > 0");
    require_scaling_horizon(model, 2.0 / omega, "predicted_trend_return_correlation");
    if (model.regime == Regime::scaling && model.kappa == 1.0) return 0.0;
    auto integrand = [&](double zeta) {
        return zeta * std::exp(-omega * zeta) * unchecked_derivatives(model, zeta).second;
    };
    double integral = 0.0;
    if (model.regime == Regime::matched) {
        integral = integrate_interval(integrand, 0.0, model.knee) + integrate_half_line(integrand, model.knee);
    } else {
        integral = integrate_half_line(integrand, 0.0);
    }
    return -2.0 * std::pow(omega, 1.5) * integral;
}

double predicted_trend_variance(const PropagatorModel& model, double horizon, TrendEstimator estimator) {
    model.validate();
    if (!(horizon > 0.0)) throw std::domain_error("predicted_trend_variance: horizon must be > 0");
    require_scaling_horizon(model, horizon, "predicted_trend_variance");
    if (estimator == TrendEstimator::tilde)
        return 2.0 / horizon * (propagator(model, 0.0) - propagator(model, horizon));

    const double omega = 2.0 / horizon;
    const double k = model.kappa;
    switch (model.regime) {
        case Regime::scaling: return k * std::tgamma(k + 1.0) * std::pow(omega, 1.0 - k);
        case Regime::exponential: {
            const double s = omega + 1.0 / model.tau;
            return omega * omega / (s * s) * std::pow(model.tau, k - 1.0);
        }
        case Regime::matched: return predicted_trend_variance_quadrature(model, horizon);
    }
    return 0.0;
}

double predicted_trend_variance_quadrature(const PropagatorModel& model, double horizon) {
    model.validate();
    if (!(horizon > 0.0)) throw std::domain_error("predicted_trend_variance: horizon must be > 0");
    require_scaling_horizon(model, horizon, "predicted_trend_variance");
    const double omega = 2.0 / horizon;
    // int_0^inf du e^{-w u} int_0^u dv g(v) = (1/w) int_0^inf dv g(v) e^{-w v}
    auto integrand = [&](double v) { return v * std::exp(-omega * v) * unchecked_derivatives(model, v).first; };
    double integral = 0.0;
    if (model.regime == Regime::matched) {
        integral = integrate_interval(integrand, 0.0, model.knee) + integrate_half_line(integrand, model.knee);
    } else {
        integral = integrate_half_line(integrand, 0.0);
    }
    return -2.0 * omega * omega * integral;
}

double predicted_adjacent_window_correlation(const PropagatorModel& model, double horizon) {
    model.validate();
    if (!(horizon > 0.0)) throw std::domain_error("predicted_adjacent_window_correlation: horizon must be > 0");
    if (model.regime == Regime::scaling && 2.0 * horizon > model.tau)
        throw std::domain_error("predicted_adjacent_window_correlation: scaling regime needs 2T <= tau");
    return -(propagator(model, 0.0) - 2.0 * propagator(model, horizon) + propagator(model, 2.0 * horizon)) / horizon;
}

double predicted_second_moment_ratio(const PropagatorModel& model, double horizon) {
    return 2.0 - 2.0 * propagator(model, horizon) / propagator(model, 0.0);
}

}  // namespace critmkt

#include "critmkt/stats.hpp"

#include "critmkt/rng.hpp"
#include "parallel.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace critmkt {

void RegressionSample::append(const RegressionSample& other) {
    const auto offset = static_cast<std::uint32_t>(premium.size());
    trend.insert(trend.end(), other.trend.begin(), other.trend.end());
    target.insert(target.end(), other.target.begin(), other.target.end());
    weight_mass.insert(weight_mass.end(), other.weight_mass.begin(), other.weight_mass.end());
    day.insert(day.end(), other.day.begin(), other.day.end());
    for (const auto m : other.market) market.push_back(m + offset);
    premium.insert(premium.end(), other.premium.begin(), other.premium.end());
}

namespace {

RegressionSample pair_up(const TrendSeries& trend, const ReturnSeries& returns, const std::vector<double>* prefix,
                         std::span<const std::int64_t> days) {
    if (trend.size() != returns.size())
        throw std::invalid_argument("regression sample: trend and returns differ in length");
    if (!days.empty() && days.size() != returns.size())
        throw std::invalid_argument("regression sample: day index differs in length from returns");
    RegressionSample s;
    s.premium.push_back(returns.premium());
    for (std::size_t t = trend.warmup; t + 1 < returns.size(); ++t) {
        s.trend.push_back(trend.values[t]);
        s.target.push_back(returns.values[t + 1]);
        s.weight_mass.push_back(prefix ? (*prefix)[std::min(t, prefix->size() - 1)] : 0.0);
        s.day.push_back(days.empty() ? static_cast<std::int64_t>(t) : days[t]);
        s.market.push_back(0);
    }
    return s;
}

}  // namespace

RegressionSample make_regression_sample(const TrendSeries& trend, const ReturnSeries& returns,
                                        const WeightFunction& weights, std::span<const std::int64_t> days) {
    std::vector<double> prefix(weights.weights.size());
    std::partial_sum(weights.weights.begin(), weights.weights.end(), prefix.begin());
    if (prefix.empty()) prefix.push_back(0.0);
    return pair_up(trend, returns, &prefix, days);
}

RegressionSample pool_samples(std::span<const RegressionSample> samples) {
    RegressionSample out;
    for (const auto& s : samples) out.append(s);
    return out;
}

namespace {

constexpr std::size_t min_regression_obs = 100;

struct Normal3 {
    Eigen::Matrix3d gram = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
};

void add(Normal3& ne, double phi, double y, double weight) {
    const Eigen::Vector3d x(1.0, phi, phi * phi * phi);
    ne.gram.noalias() += weight * x * x.transpose();
    ne.rhs.noalias() += weight * y * x;
}

Eigen::Vector3d solve(const Normal3& ne) {
    Eigen::ColPivHouseholderQR<Eigen::Matrix3d> qr(ne.gram);
    qr.setThreshold(1e-12);
    if (qr.rank() < 3) throw RankDeficient("cubic regression: design matrix is rank deficient (rank " +
                                           std::to_string(qr.rank()) + ")");
    return qr.solve(ne.rhs);
}

double cubic(const Eigen::Vector3d& th, double phi) { return th[0] + th[1] * phi + th[2] * phi * phi * phi; }

void set_t_stats(RegressionReport& r) {
    for (Coefficient* c : {&r.a, &r.b, &r.c}) c->t_stat = c->value / c->error;
}

}  // namespace

RegressionReport fit_cubic(const RegressionSample& sample) {
    const std::size_t n = sample.size();
    if (n < min_regression_obs)
        throw std::invalid_argument("fit_cubic: need at least 100 observations, got " + std::to_string(n));
    Normal3 ne;
    for (std::size_t i = 0; i < n; ++i) add(ne, sample.trend[i], sample.target[i], 1.0);
    const Eigen::Vector3d th = solve(ne);

    const double ybar = std::accumulate(sample.target.begin(), sample.target.end(), 0.0) / static_cast<double>(n);
    double rss = 0.0, tss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = sample.target[i] - cubic(th, sample.trend[i]);
        rss += e * e;
        tss += (sample.target[i] - ybar) * (sample.target[i] - ybar);
    }
    const auto dn = static_cast<double>(n);
    const double s2 = rss / (dn - 3.0);
    const Eigen::Matrix3d cov = s2 * ne.gram.inverse();

    RegressionReport r;
    r.a = {th[0], std::sqrt(std::max(cov(0, 0), 0.0)), 0.0};
    r.b = {th[1], std::sqrt(std::max(cov(1, 1), 0.0)), 0.0};
    r.c = {th[2], std::sqrt(std::max(cov(2, 2), 0.0)), 0.0};
    set_t_stats(r);
    r.r_squared = tss > 0.0 ? 1.0 - rss / tss : 1.0;
    r.r_squared_adj = 1.0 - (1.0 - r.r_squared) * (dn - 1.0) / (dn - 3.0);
    r.n_obs = n;
    return r;
}

RegressionReport fit_cubic(const TrendSeries& trend, const ReturnSeries& returns) {
    return fit_cubic(pair_up(trend, returns, nullptr, {}));
}

LangevinPair fit_langevin_pair(const RegressionSample& sample) {
    const std::size_t n = sample.size();
    if (n < min_regression_obs)
        throw std::invalid_argument("fit_langevin_pair: need at least 100 observations, got " + std::to_string(n));
    double m2 = 0.0, m4 = 0.0, m6 = 0.0, r1 = 0.0, r3 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = sample.trend[i];
        const double p2 = p * p;
        m2 += p2;
        m4 += p2 * p2;
        m6 += p2 * p2 * p2;
        r1 += p * sample.target[i];
        r3 += p2 * p * sample.target[i];
    }
    Eigen::Matrix2d m;
    m << m2, m4, m4, m6;
    Eigen::FullPivLU<Eigen::Matrix2d> lu(m);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) throw RankDeficient("fit_langevin_pair: singular moment matrix");
    const Eigen::Vector2d sol = lu.solve(Eigen::Vector2d(r1, r3));
    return {sol[0], sol[1]};
}

LangevinPair fit_langevin_pair(const TrendSeries& trend, const ReturnSeries& returns) {
    return fit_langevin_pair(pair_up(trend, returns, nullptr, {}));
}

namespace {

// Position of each observation's day in the sorted list of distinct days.
struct DayIndex {
    std::vector<std::int64_t> days;
    std::vector<std::size_t> slot;
};

DayIndex index_days(const RegressionSample& s) {
    DayIndex idx;
    idx.days = s.day;
    std::sort(idx.days.begin(), idx.days.end());
    idx.days.erase(std::unique(idx.days.begin(), idx.days.end()), idx.days.end());
    idx.slot.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        idx.slot[i] = static_cast<std::size_t>(std::lower_bound(idx.days.begin(), idx.days.end(), s.day[i]) -
                                               idx.days.begin());
    return idx;
}

double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

BootstrapResult bootstrap_errors(const RegressionSample& sample, const BootstrapOptions& options) {
    if (options.samples < 100) throw std::invalid_argument("bootstrap_errors: need at least 100 resamples");
    if (options.block_length == 0) throw std::invalid_argument("bootstrap_errors: block_length must be >= 1");
    if (sample.size() < min_regression_obs)
        throw std::invalid_argument("bootstrap_errors: need at least 100 observations");
    const DayIndex idx = index_days(sample);
    const std::size_t days = idx.days.size();

    std::vector<std::array<double, 3>> draws(options.samples);
    std::vector<char> ok(options.samples, 0);
    detail::parallel_for(options.samples, options.threads, [&](std::size_t r) {
        Rng rng = make_rng(options.seed, r);
        std::vector<double> count(days, 0.0);
        if (options.block_length == 1) {
            std::uniform_int_distribution<std::size_t> pick(0, days - 1);
            for (std::size_t k = 0; k < days; ++k) count[pick(rng)] += 1.0;
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, days - 1);
            const std::size_t blocks = (days + options.block_length - 1) / options.block_length;
            std::size_t taken = 0;
            for (std::size_t b = 0; b < blocks; ++b) {
                const std::size_t start = pick(rng);
                for (std::size_t j = 0; j < options.block_length && taken < days; ++j, ++taken)
                    count[(start + j) % days] += 1.0;
            }
        }
        Normal3 ne;
        for (std::size_t i = 0; i < sample.size(); ++i) {
            const double w = count[idx.slot[i]];
            if (w > 0.0) add(ne, sample.trend[i], sample.target[i], w);
        }
        try {
            const Eigen::Vector3d th = solve(ne);
            draws[r] = {th[0], th[1], th[2]};
            ok[r] = 1;
        } catch (const RankDeficient&) {
        }
    });

    BootstrapResult out;
    for (std::size_t r = 0; r < options.samples; ++r) {
        if (ok[r]) {
            out.draws.push_back(draws[r]);
        } else {
            ++out.skipped;
        }
    }
    if (out.draws.size() < 2) throw RankDeficient("bootstrap_errors: every resample was rank deficient");
    const auto m = static_cast<double>(out.draws.size());
    for (std::size_t j = 0; j < 3; ++j) {
        std::vector<double> col(out.draws.size());
        for (std::size_t r = 0; r < out.draws.size(); ++r) col[r] = out.draws[r][j];
        const double mean = std::accumulate(col.begin(), col.end(), 0.0) / m;
        double ss = 0.0;
        for (const double v : col) ss += (v - mean) * (v - mean);
        out.se[j] = std::sqrt(ss / (m - 1.0));
        out.lower[j] = quantile(col, 0.025);
        out.upper[j] = quantile(col, 0.975);
    }
    return out;
}

double cross_validate(const RegressionSample& sample, std::size_t folds, std::uint64_t seed, FoldLayout layout) {
    if (folds < 2) throw std::invalid_argument("cross_validate: need at least 2 folds");
    if (sample.size() < folds * 30)
        throw std::invalid_argument("cross_validate: need at least 30 observations per fold (n = " +
                                    std::to_string(sample.size()) + ", folds = " + std::to_string(folds) + ")");
    const DayIndex idx = index_days(sample);
    const std::size_t days = idx.days.size();
    if (days < folds) throw std::invalid_argument("cross_validate: fewer distinct days than folds");

    std::vector<std::size_t> order(days);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (layout == FoldLayout::shuffled) {
        Rng rng = make_rng(seed, 0);
        std::shuffle(order.begin(), order.end(), rng);
    }
    std::vector<std::size_t> fold_of_day(days);
    for (std::size_t j = 0; j < days; ++j) fold_of_day[order[j]] = j * folds / days;

    const std::size_t markets = sample.premium.size();
    std::vector<double> scores(folds);
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<double> sum(markets, 0.0), cnt(markets, 0.0);
        double ysum = 0.0, yn = 0.0;
        for (std::size_t i = 0; i < sample.size(); ++i) {
            if (fold_of_day[idx.slot[i]] == f) continue;
            sum[sample.market[i]] += sample.target[i];
            cnt[sample.market[i]] += 1.0;
            ysum += sample.target[i];
            yn += 1.0;
        }
        std::vector<double> shift(markets, 0.0);
        for (std::size_t m = 0; m < markets; ++m)
            if (cnt[m] > 0.0) shift[m] = sample.premium[m] - sum[m] / cnt[m];
        auto phi = [&](std::size_t i) { return sample.trend[i] + shift[sample.market[i]] * sample.weight_mass[i]; };

        Normal3 ne;
        for (std::size_t i = 0; i < sample.size(); ++i)
            if (fold_of_day[idx.slot[i]] != f) add(ne, phi(i), sample.target[i], 1.0);
        const Eigen::Vector3d th = solve(ne);
        const double ybar = ysum / yn;
        double sse = 0.0, sst = 0.0;
        for (std::size_t i = 0; i < sample.size(); ++i) {
            if (fold_of_day[idx.slot[i]] != f) continue;
            const double e = sample.target[i] - cubic(th, phi(i));
            sse += e * e;
            sst += (sample.target[i] - ybar) * (sample.target[i] - ybar);
        }
        scores[f] = sst > 0.0 ? 1.0 - sse / sst : (sse == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity());
    }
    return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(folds);
}

RegressionReport regression_report(const RegressionSample& sample, const RegressionOptions& options) {
    RegressionReport r = fit_cubic(sample);
    if (options.bootstrap_samples > 0) {
        const BootstrapResult boot = bootstrap_errors(
            sample, {options.bootstrap_samples, options.seed, options.threads, options.block_length});
        r.a.error = boot.se[0];
        r.b.error = boot.se[1];
        r.c.error = boot.se[2];
        set_t_stats(r);
        r.error_method = "bootstrap-" + std::to_string(options.bootstrap_samples);
        r.skipped_resamples = boot.skipped;
    }
    if (options.folds > 0) {
        r.r_squared_adj = cross_validate(sample, options.folds, options.seed);
        r.r_squared_adj_method = "cv-" + std::to_string(options.folds);
    }
    return r;
}

ParabolicFit fit_parabolic_b(std::span<const ScalePoint> b_by_scale, std::span<const ScalePoint> c_by_scale) {
    const std::size_t n = b_by_scale.size();
    if (n < 4) throw std::invalid_argument("fit_parabolic_b: need at least 4 scales");
    if (c_by_scale.empty()) throw std::invalid_argument("fit_parabolic_b: need at least one c value");
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 3);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double k = b_by_scale[i].k;
        const auto r = static_cast<Eigen::Index>(i);
        x(r, 0) = 1.0;
        x(r, 1) = k;
        x(r, 2) = k * k;
        y[r] = b_by_scale[i].value;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < 3) throw RankDeficient("fit_parabolic_b: need at least 3 distinct scales");
    const Eigen::Vector3d th = qr.solve(y);
    const Eigen::VectorXd resid = y - x * th;

    ParabolicFit fit;
    fit.residuals.assign(resid.data(), resid.data() + resid.size());
    double c_sum = 0.0;
    for (const auto& p : c_by_scale) c_sum += p.value;
    fit.c_const = c_sum / static_cast<double>(c_by_scale.size());
    if (c_by_scale.size() > 1) {
        double ss = 0.0;
        for (const auto& p : c_by_scale) ss += (p.value - fit.c_const) * (p.value - fit.c_const);
        const auto m = static_cast<double>(c_by_scale.size());
        fit.c_const_se = std::sqrt(ss / (m - 1.0) / m);
    }

    const double alpha = th[0], beta = th[1], gamma = th[2];
    const double scale = std::abs(alpha) + std::abs(beta) + std::abs(gamma);
    const double k0 = gamma != 0.0 ? -beta / (2.0 * gamma) : 0.0;
    const double amp = gamma != 0.0 ? alpha - beta * beta / (4.0 * gamma) : alpha;
    const double q = gamma != 0.0 ? -amp / gamma : 0.0;
    if (std::abs(gamma) <= 1e-10 * scale || !(q > 0.0)) {
        fit.degenerate = true;
        fit.amplitude = amp;
        fit.k0 = k0;
        fit.delta_k = std::numeric_limits<double>::infinity();
        return fit;
    }
    fit.amplitude = amp;
    fit.k0 = k0;
    fit.delta_k = std::sqrt(q);

    const double s2 = n > 3 ? resid.squaredNorm() / static_cast<double>(n - 3) : 0.0;
    const Eigen::Matrix3d cov = s2 * (x.transpose() * x).inverse();
    const Eigen::Vector3d g_k0(0.0, -1.0 / (2.0 * gamma), beta / (2.0 * gamma * gamma));
    const Eigen::Vector3d g_amp(1.0, -beta / (2.0 * gamma), beta * beta / (4.0 * gamma * gamma));
    const Eigen::Vector3d g_q(-1.0 / gamma, beta / (2.0 * gamma * gamma),
                              -beta * beta / (4.0 * gamma * gamma * gamma) + amp / (gamma * gamma));
    const Eigen::Vector3d g_dk = g_q / (2.0 * fit.delta_k);
    fit.k0_se = std::sqrt(std::max(0.0, g_k0.dot(cov * g_k0)));
    fit.amplitude_se = std::sqrt(std::max(0.0, g_amp.dot(cov * g_amp)));
    fit.delta_k_se = std::sqrt(std::max(0.0, g_dk.dot(cov * g_dk)));
    return fit;
}

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    std::vector<double> residuals;
    double rms = 0.0;
};

// Weighted least squares y = intercept + slope x; slope_se scaled by the
// weighted residual variance.
LineFit fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
    const std::size_t n = x.size();
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double xm = sx / sw, ym = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += w[i] * (x[i] - xm) * (x[i] - xm);
        sxy += w[i] * (x[i] - xm) * (y[i] - ym);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("scaling fit: regressor has no spread");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = ym - f.slope * xm;
    double wrss = 0.0, rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        f.residuals.push_back(r);
        wrss += w[i] * r * r;
        rss += r * r;
    }
    f.rms = std::sqrt(rss / static_cast<double>(n));
    f.slope_se = n > 2 ? std::sqrt(wrss / static_cast<double>(n - 2) / sxx) : 0.0;
    return f;
}

}  // namespace

std::vector<ScalingFit> moment_scaling(std::span<const double> path, std::span<const double> qs,
                                       std::span<const std::size_t> horizons) {
    if (horizons.size() < 3) throw std::invalid_argument("moment_scaling: need at least 3 horizons");
    if (qs.empty()) throw std::invalid_argument("moment_scaling: need at least one q");
    for (const double q : qs)
        if (!(q > 0.0)) throw std::invalid_argument("moment_scaling: q must be > 0");
    std::size_t max_t = 0;
    for (const auto t : horizons) {
        if (t == 0) throw std::invalid_argument("moment_scaling: horizons must be >= 1");
        max_t = std::max(max_t, t);
    }
    const std::size_t n = path.size();
    if (n < 10 * max_t)
        throw std::invalid_argument("moment_scaling: series length " + std::to_string(n) + " < 10 * max horizon " +
                                    std::to_string(max_t));

    std::vector<ScalingFit> fits(qs.size());
    std::vector<double> x, w;
    std::vector<std::vector<double>> y(qs.size());
    for (const auto t : horizons) {
        const std::size_t m = n - t;
        const double n_eff = static_cast<double>(m) / static_cast<double>(t);
        x.push_back(std::log(static_cast<double>(t)));
        w.push_back(n_eff);
        for (std::size_t j = 0; j < qs.size(); ++j) {
            double s = 0.0, s2 = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                const double v = std::pow(std::abs(path[i + t] - path[i]), qs[j]);
                s += v;
                s2 += v * v;
            }
            const double mean = s / static_cast<double>(m);
            if (!(mean > 0.0)) throw std::domain_error("moment_scaling: zero moment at T = " + std::to_string(t));
            const double var = std::max(0.0, s2 / static_cast<double>(m) - mean * mean);
            fits[j].points.push_back({x.back(), mean, std::sqrt(var / n_eff)});
            y[j].push_back(std::log(mean));
        }
    }
    for (std::size_t j = 0; j < qs.size(); ++j) {
        const LineFit lf = fit_line(x, y[j], w);
        auto& f = fits[j];
        f.q = qs[j];
        f.slope = lf.slope;
        f.intercept = lf.intercept;
        f.slope_se = lf.slope_se;
        f.exponent = lf.slope / qs[j];
        f.exponent_se = lf.slope_se / qs[j];
        f.residuals = lf.residuals;
        f.residual_rms = lf.rms;
    }
    return fits;
}

std::vector<ScalingFit> moment_scaling_increments(std::span<const double> increments, std::span<const double> qs,
                                                  std::span<const std::size_t> horizons) {
    std::vector<double> path(increments.size() + 1, 0.0);
    std::partial_sum(increments.begin(), increments.end(), path.begin() + 1);
    return moment_scaling(path, qs, horizons);
}

ScalingFit fit_kappa(std::span<const VariancePoint> points, KappaForm form) {
    if (points.size() < 3) throw std::invalid_argument("fit_kappa: need at least 3 scaling-regime points");
    const bool weighted = std::all_of(points.begin(), points.end(), [](const auto& p) { return p.se > 0.0; });
    std::vector<double> x, y, w;
    ScalingFit fit;
    for (const auto& p : points) {
        if (!(p.var > 0.0) || !std::isfinite(p.var))
            throw std::domain_error("fit_kappa: non-positive variance at k = " + std::to_string(p.k));
        fit.points.push_back({p.k, p.var, p.se});
        if (form == KappaForm::log_linear) {
            x.push_back(p.k * std::numbers::ln2);
            y.push_back(std::log(p.var));
            w.push_back(weighted ? (p.var / p.se) * (p.var / p.se) : 1.0);
        } else {
            x.push_back(p.k);
            y.push_back(p.var);
            w.push_back(weighted ? 1.0 / (p.se * p.se) : 1.0);
        }
    }
    const LineFit lf = fit_line(x, y, w);
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.slope_se = lf.slope_se;
    fit.residuals = lf.residuals;
    fit.residual_rms = lf.rms;
    if (form == KappaForm::log_linear) {
        fit.exponent = 1.0 + lf.slope;
        fit.exponent_se = lf.slope_se;
    } else {
        fit.exponent = 1.0 + lf.slope / std::numbers::ln2;
        fit.exponent_se = lf.slope_se / std::numbers::ln2;
    }
    return fit;
}

std::vector<VariancePoint> tilde_variance_curve(std::span<const std::vector<double>> paths, std::span<const int> ks) {
    if (paths.empty()) throw std::invalid_argument("tilde_variance_curve: no paths");
    std::vector<VariancePoint> out;
    for (const int k : ks) {
        if (k < 0 || k > 40) throw std::invalid_argument("tilde_variance_curve: k out of range");
        const std::size_t t = std::size_t{1} << k;
        double sum = 0.0, count = 0.0, n_eff = 0.0;
        for (const auto& p : paths) {
            if (p.size() <= t) throw std::invalid_argument("tilde_variance_curve: path shorter than T = " + std::to_string(t));
            for (std::size_t i = t; i < p.size(); ++i) {
                const double d = p[i] - p[i - t];
                sum += d * d;
            }
            count += static_cast<double>(p.size() - t);
            n_eff += static_cast<double>(p.size() - t) / static_cast<double>(t);
        }
        const double var = sum / count / static_cast<double>(t);
        out.push_back({static_cast<double>(k), var, var * std::sqrt(2.0 / n_eff)});
    }
    return out;
}

std::vector<double> propagator_covariance(const PropagatorModel& model, std::size_t n) {
    model.validate();
    std::vector<double> c(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto t = static_cast<double>(k);
        c[k] = (model.regime == Regime::scaling && t > model.tau) ? 0.0 : propagator(model, t);
    }
    return c;
}

namespace {

constexpr double clip_tolerance = 1e-10;
constexpr std::size_t dense_fallback_limit = 4096;

std::vector<double> dense_gaussian(std::span<const double> c, std::size_t n, Rng& rng) {
    const auto dim = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd cov(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) cov(i, j) = c[static_cast<std::size_t>(std::abs(i - j))];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw std::runtime_error("gaussian sampler: eigendecomposition failed");
    Eigen::VectorXd lambda = es.eigenvalues();
    const double floor = -clip_tolerance * c[0];
    if (lambda.minCoeff() < floor)
        throw std::domain_error("gaussian sampler: covariance is indefinite (min eigenvalue " +
                                std::to_string(lambda.minCoeff()) + ")");
    lambda = lambda.cwiseMax(0.0).cwiseSqrt();
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd z(dim);
    for (Eigen::Index i = 0; i < dim; ++i) z[i] = gauss(rng);
    const Eigen::VectorXd x = es.eigenvectors() * lambda.cwiseProduct(z);
    return {x.data(), x.data() + x.size()};
}

}  // namespace

std::vector<double> sample_stationary_gaussian(std::span<const double> c, std::uint64_t seed) {
    const std::size_t n = c.size();
    if (n == 0) throw std::invalid_argument("gaussian sampler: empty covariance");
    if (!(c[0] > 0.0)) throw std::domain_error("gaussian sampler: c(0) must be > 0");
    Rng rng = make_rng(seed, 3);
    if (n == 1) {
        std::normal_distribution<double> gauss(0.0, std::sqrt(c[0]));
        return {gauss(rng)};
    }
    const std::size_t m = 2 * (n - 1);
    std::vector<double> row(m);
    for (std::size_t k = 0; k < m; ++k) row[k] = c[std::min(k, m - k)];
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, row);
    double min_lambda = std::numeric_limits<double>::infinity();
    for (const auto& s : spec) min_lambda = std::min(min_lambda, s.real());
    if (min_lambda < -clip_tolerance * c[0]) {
        if (n <= dense_fallback_limit) return dense_gaussian(c, n, rng);
        throw std::domain_error("gaussian sampler: circulant embedding is indefinite (min eigenvalue " +
                                std::to_string(min_lambda) + ") and n exceeds the dense limit");
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto dm = static_cast<double>(m);
    std::vector<std::complex<double>> w(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double a = std::sqrt(std::max(spec[j].real(), 0.0) / dm);
        const double re = gauss(rng);
        const double im = gauss(rng);
        w[j] = {a * re, a * im};
    }
    std::vector<std::complex<double>> y;
    fft.fwd(y, w);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = y[i].real();
    return out;
}

std::vector<double> gaussian_process_from_propagator(const PropagatorModel& model, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("gaussian_process_from_propagator: n must be > 0");
    // Embed into a power-of-two circle: covariance to lag m/2 with m >= 2(n - 1).
    std::size_t m = 2;
    while (m < 2 * (n - 1)) m <<= 1;
    auto c = propagator_covariance(model, m / 2 + 1);
    auto path = sample_stationary_gaussian(c, seed);
    path.resize(n);
    return path;
}

double sample_autocorrelation(std::span<const double> x, std::size_t lag) {
    if (x.size() <= lag + 1) throw std::invalid_argument("sample_autocorrelation: series too short for lag");
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        den += (x[i] - mean) * (x[i] - mean);
        if (i + lag < x.size()) num += (x[i] - mean) * (x[i + lag] - mean);
    }
    if (!(den > 0.0)) throw std::domain_error("sample_autocorrelation: zero variance");
    return num / den;
}

}  // namespace critmkt

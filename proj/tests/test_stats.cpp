#include "doctest.h"
#include "oracles.hpp"

#include "critmkt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace critmkt;

namespace {

constexpr double table_a = 0.0133;
constexpr double table_b = 0.0129;
constexpr double table_c = -0.0062;

RegressionSample synthetic(std::size_t n, double a, double b, double c, double noise, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    RegressionSample s;
    s.premium = {0.0};
    for (std::size_t i = 0; i < n; ++i) {
        const double phi = g(rng);
        s.trend.push_back(phi);
        s.target.push_back(a + b * phi + c * phi * phi * phi + noise * g(rng));
        s.weight_mass.push_back(0.0);
        s.day.push_back(static_cast<std::int64_t>(i));
        s.market.push_back(0);
    }
    return s;
}

Eigen::VectorXd oracle_fit(const RegressionSample& s, bool intercept) {
    const auto n = static_cast<Eigen::Index>(s.size());
    Eigen::MatrixXd x(n, intercept ? 3 : 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double p = s.trend[static_cast<std::size_t>(i)];
        Eigen::Index col = 0;
        if (intercept) x(i, col++) = 1.0;
        x(i, col++) = p;
        x(i, col) = p * p * p;
        y(i) = s.target[static_cast<std::size_t>(i)];
    }
    return oracle::ols(x, y);
}

}  // namespace

TEST_CASE("regression sample alignment") {
    ReturnSeries r;
    r.values = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    r.mu = 0.0;
    const auto w = weight_step(2);
    const auto tr = trend_strength(r, w);
    const auto s = make_regression_sample(tr, r, w);
    REQUIRE(s.size() == r.size() - 1 - tr.warmup);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const std::size_t t = tr.warmup + i;
        CHECK(s.trend[i] == tr.values[t]);
        CHECK(s.target[i] == r.values[t + 1]);
        CHECK(s.day[i] == static_cast<std::int64_t>(t));
    }

    const auto s2 = make_regression_sample(tr, r, w);
    const std::vector<RegressionSample> both{s, s2};
    const auto pooled = pool_samples(both);
    CHECK(pooled.size() == 2 * s.size());
    CHECK(pooled.market.back() == 1);
    CHECK(pooled.premium.size() == 2);
}

TEST_CASE("noiseless cubic is recovered exactly") {
    const auto s = synthetic(1000, table_a, table_b, table_c, 0.0, 1);
    const auto rep = fit_cubic(s);
    CHECK(std::abs(rep.a.value - table_a) < 1e-10);
    CHECK(std::abs(rep.b.value - table_b) < 1e-10);
    CHECK(std::abs(rep.c.value - table_c) < 1e-10);
    CHECK(rep.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.n_obs == 1000);
}

TEST_CASE("cubic fit matches a QR oracle; t = value / error") {
    const auto s = synthetic(5000, 0.1, 0.2, -0.05, 1.0, 2);
    const auto rep = fit_cubic(s);
    const auto ref = oracle_fit(s, true);
    CHECK(rep.a.value == doctest::Approx(ref(0)).epsilon(1e-10));
    CHECK(rep.b.value == doctest::Approx(ref(1)).epsilon(1e-10));
    CHECK(rep.c.value == doctest::Approx(ref(2)).epsilon(1e-10));
    for (const auto& co : {rep.a, rep.b, rep.c}) CHECK(co.t_stat == doctest::Approx(co.value / co.error).epsilon(1e-9));
}

TEST_CASE("null model: coefficients within 3 SE of zero") {
    const auto s = synthetic(20000, 0.0, 0.0, 0.0, 1.0, 3);
    const auto rep = fit_cubic(s);
    for (const auto& co : {rep.a, rep.b, rep.c}) CHECK(std::abs(co.t_stat) < 3.0);
}

TEST_CASE("rank deficiency and size checks") {
    auto s = synthetic(500, 0.0, 1.0, 0.0, 0.1, 4);
    std::fill(s.trend.begin(), s.trend.end(), 0.7);
    CHECK_THROWS_AS((void)fit_cubic(s), RankDeficient);
    CHECK_THROWS_AS((void)fit_cubic(synthetic(99, 0.0, 1.0, 0.0, 0.1, 4)), std::invalid_argument);
}

TEST_CASE("Langevin pair") {
    auto cube = synthetic(1000, 0.0, 0.0, 1.0, 0.0, 5);
    const auto lp = fit_langevin_pair(cube);
    CHECK(std::abs(lp.beta) < 1e-12);
    CHECK(lp.gamma == doctest::Approx(1.0).epsilon(1e-12));

    const auto s = synthetic(50000, 0.0, 0.01, 0.0, 1.0, 6);
    const auto p = fit_langevin_pair(s);
    const auto ref = oracle_fit(s, false);
    CHECK(p.beta == doctest::Approx(ref(0)).epsilon(1e-10));
    CHECK(p.gamma == doctest::Approx(ref(1)).epsilon(1e-10));
    // Classical standard errors of the no-intercept fit.
    Eigen::Matrix2d m;
    double m2 = 0, m4 = 0, m6 = 0;
    for (const double v : s.trend) {
        m2 += v * v;
        m4 += v * v * v * v;
        m6 += std::pow(v, 6);
    }
    m << m2, m4, m4, m6;
    const Eigen::Matrix2d cov = m.inverse();
    CHECK(std::abs(p.beta - 0.01) < 3.0 * std::sqrt(cov(0, 0)));
    CHECK(std::abs(p.gamma) < 3.0 * std::sqrt(cov(1, 1)));
}

TEST_CASE("bootstrap: determinism, thread independence, zero noise") {
    const auto s = synthetic(2000, 0.01, 0.02, -0.01, 1.0, 7);
    BootstrapOptions opt;
    opt.samples = 200;
    opt.seed = 42;
    const auto a = bootstrap_errors(s, opt);
    const auto b = bootstrap_errors(s, opt);
    opt.threads = 3;
    const auto c = bootstrap_errors(s, opt);
    CHECK(a.se == b.se);
    CHECK(a.se == c.se);
    CHECK(a.draws == c.draws);
    CHECK(a.draws.size() == 200);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(a.lower[j] < a.upper[j]);
        CHECK(a.se[j] > 0.0);
    }
    opt.seed = 43;
    CHECK(bootstrap_errors(s, opt).se != a.se);

    const auto exact = synthetic(2000, 0.01, 0.02, -0.01, 0.0, 8);
    opt.seed = 1;
    const auto z = bootstrap_errors(exact, opt);
    for (const double se : z.se) CHECK(se < 1e-12);

    opt.samples = 99;
    CHECK_THROWS_AS((void)bootstrap_errors(s, opt), std::invalid_argument);
}

TEST_CASE("bootstrap SE tracks the classical SE for homoscedastic noise") {
    const auto s = synthetic(20000, table_a, table_b, table_c, 1.0, 9);
    const auto rep = fit_cubic(s);
    BootstrapOptions opt;
    opt.samples = 400;
    const auto bs = bootstrap_errors(s, opt);
    CHECK(bs.se[0] == doctest::Approx(rep.a.error).epsilon(0.15));
    CHECK(bs.se[1] == doctest::Approx(rep.b.error).epsilon(0.15));
    CHECK(bs.se[2] == doctest::Approx(rep.c.error).epsilon(0.15));
}

TEST_CASE("block bootstrap runs and differs from day resampling") {
    const auto s = synthetic(3000, 0.0, 0.1, 0.0, 1.0, 10);
    BootstrapOptions opt;
    opt.samples = 100;
    const auto iid = bootstrap_errors(s, opt);
    opt.block_length = 20;
    const auto blk = bootstrap_errors(s, opt);
    CHECK(blk.draws.size() == 100);
    CHECK(blk.se != iid.se);
}

TEST_CASE("cross validation") {
    const auto exact = synthetic(3000, 0.01, 0.5, -0.1, 0.0, 11);
    CHECK(cross_validate(exact, 15) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS((void)cross_validate(exact, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)cross_validate(synthetic(400, 0, 1, 0, 1, 1), 15), std::invalid_argument);

    double mean_r2 = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) mean_r2 += cross_validate(synthetic(3000, 0.0, 0.0, 0.0, 1.0, 100 + seed), 15);
    CHECK(mean_r2 / 20.0 <= 0.0);

    const auto noisy = synthetic(3000, 0.0, 0.3, 0.0, 1.0, 12);
    const double contiguous = cross_validate(noisy, 10);
    CHECK(contiguous > 0.0);
    CHECK(cross_validate(noisy, 10, 5, FoldLayout::shuffled) == cross_validate(noisy, 10, 5, FoldLayout::shuffled));
}

TEST_CASE("cross validation re-estimates the premium on training folds") {
    // Build a sample from a real return series with a drift so that the
    // premium correction is active.
    std::mt19937_64 rng(13);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> raw(4000);
    for (auto& v : raw) v = 0.3 + g(rng);
    const auto r = normalize_increments(raw);
    const auto w = weight_psi(8.0);
    const auto tr = trend_strength(r, w);
    const auto s = make_regression_sample(tr, r, w);
    CHECK(s.weight_mass.back() == doctest::Approx(std::accumulate(w.weights.begin(), w.weights.end(), 0.0)).epsilon(1e-12));
    const double r2 = cross_validate(s, 10);
    CHECK(std::isfinite(r2));
    CHECK(r2 < 0.01);
}

TEST_CASE("regression report labels its methods") {
    const auto s = synthetic(3000, 0.01, 0.1, -0.02, 1.0, 14);
    RegressionOptions opt;
    opt.bootstrap_samples = 100;
    opt.folds = 10;
    const auto rep = regression_report(s, opt);
    CHECK(rep.error_method == "bootstrap-100");
    CHECK(rep.r_squared_adj_method == "cv-10");
    for (const auto& co : {rep.a, rep.b, rep.c}) CHECK(co.t_stat == doctest::Approx(co.value / co.error).epsilon(1e-9));
    opt.bootstrap_samples = 0;
    opt.folds = 0;
    const auto cl = regression_report(s, opt);
    CHECK(cl.error_method == "classical");
    CHECK(cl.r_squared_adj_method == "classical");
    CHECK(cl.r_squared_adj == doctest::Approx(1.0 - (1.0 - cl.r_squared) * 2999.0 / 2997.0).epsilon(1e-12));
}

TEST_CASE("parabolic fit") {
    std::vector<ScalePoint> b, c;
    for (int k = 1; k <= 10; ++k) {
        b.push_back({double(k), 0.02 * (1.0 - (k - 6.0) * (k - 6.0) / 25.0)});
        c.push_back({double(k), -0.006});
    }
    const auto fit = fit_parabolic_b(b, c);
    CHECK_FALSE(fit.degenerate);
    CHECK(fit.amplitude == doctest::Approx(0.02).epsilon(1e-10));
    CHECK(fit.k0 == doctest::Approx(6.0).epsilon(1e-10));
    CHECK(fit.delta_k == doctest::Approx(5.0).epsilon(1e-10));
    CHECK(fit.c_const == doctest::Approx(-0.006).epsilon(1e-12));
    for (const double r : fit.residuals) CHECK(std::abs(r) < 1e-12);

    std::vector<ScalePoint> flat;
    for (int k = 1; k <= 10; ++k) flat.push_back({double(k), 0.01});
    const auto deg = fit_parabolic_b(flat, c);
    CHECK(deg.degenerate);
    CHECK(std::isinf(deg.delta_k));

    CHECK_THROWS_AS((void)fit_parabolic_b(std::span(b).first(3), c), std::invalid_argument);

    // Noisy parabola: the delta-method intervals cover the truth.
    std::mt19937_64 rng(15);
    std::normal_distribution<double> g(0.0, 0.005);
    int covered_a = 0, covered_k0 = 0, trials = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ScalePoint> noisy = b;
        for (auto& p : noisy) p.value += g(rng);
        const auto f = fit_parabolic_b(noisy, c);
        if (f.degenerate) continue;
        ++trials;
        covered_a += std::abs(f.amplitude - 0.02) < 3.0 * f.amplitude_se;
        covered_k0 += std::abs(f.k0 - 6.0) < 3.0 * f.k0_se;
    }
    CHECK(trials > 150);
    CHECK(covered_a >= 0.9 * trials);
    CHECK(covered_k0 >= 0.9 * trials);
}

TEST_CASE("moment scaling: Brownian, fractional and permuted") {
    const std::vector<double> qs{1, 2, 3, 4};
    std::vector<std::size_t> horizons;
    for (std::size_t t = 1; t <= 512; t *= 2) horizons.push_back(t);

    std::mt19937_64 rng(16);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> iid(100000);
    for (auto& v : iid) v = g(rng);
    for (const auto& f : moment_scaling_increments(iid, qs, horizons)) {
        CHECK(f.exponent == doctest::Approx(0.5).epsilon(0.02 / 0.5));
        CHECK(f.points.size() == horizons.size());
    }

    auto frac = oracle::fgn(1 << 17, 0.7, 17);
    const auto h = moment_scaling_increments(frac, qs, horizons);
    CHECK(h[1].q == 2.0);
    CHECK(h[1].exponent == doctest::Approx(0.7).epsilon(0.03 / 0.7));

    std::shuffle(frac.begin(), frac.end(), rng);
    for (const auto& f : moment_scaling_increments(frac, qs, horizons)) CHECK(f.exponent == doctest::Approx(0.5).epsilon(0.02 / 0.5));

    CHECK_THROWS_AS((void)moment_scaling_increments(std::span(iid).first(5000), qs, horizons), std::invalid_argument);
    const std::vector<std::size_t> two{1, 2};
    CHECK_THROWS_AS((void)moment_scaling_increments(iid, qs, two), std::invalid_argument);
}

TEST_CASE("fit_kappa") {
    std::vector<VariancePoint> exact;
    for (int k = 1; k <= 10; ++k) exact.push_back({double(k), std::pow(std::ldexp(1.0, k), 0.9 - 1.0), 0.0});
    const auto f = fit_kappa(exact);
    CHECK(f.exponent == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(f.slope == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(f.exponent_se < 1e-12);

    // Closed loop with the theory module.
    for (const double kappa : {0.6, 0.808, 0.97, 1.0}) {
        const auto model = PropagatorModel::scaling(8192.0, kappa);
        std::vector<VariancePoint> pts;
        for (int k = 1; k <= 11; ++k)
            pts.push_back({double(k), predicted_trend_variance(model, std::ldexp(1.0, k), TrendEstimator::tilde), 0.01});
        CHECK(fit_kappa(pts).exponent == doctest::Approx(kappa).epsilon(1e-9));
    }

    // Linear form near kappa = 1.
    std::vector<VariancePoint> lin;
    for (int k = 1; k <= 10; ++k) lin.push_back({double(k), 1.0 - 0.04 * std::log(2.0) * k, 0.0});
    CHECK(fit_kappa(lin, KappaForm::linear).exponent == doctest::Approx(0.96).epsilon(1e-12));

    exact[3].var = 0.0;
    CHECK_THROWS_AS((void)fit_kappa(exact), std::domain_error);
    CHECK_THROWS_AS((void)fit_kappa(std::span(exact).first(2)), std::invalid_argument);
}

TEST_CASE("tilde variance curve on Brownian paths") {
    std::mt19937_64 rng(18);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<std::vector<double>> paths(4, std::vector<double>(20000));
    for (auto& p : paths) {
        double x = 0.0;
        for (auto& v : p) v = (x += g(rng));
    }
    const std::vector<int> ks{1, 2, 3, 4, 5, 6};
    const auto curve = tilde_variance_curve(paths, ks);
    REQUIRE(curve.size() == ks.size());
    for (const auto& p : curve) CHECK(std::abs(p.var - 1.0) < 4.0 * p.se);
    CHECK(fit_kappa(curve).exponent == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("Gaussian process: covariance matches the propagator") {
    for (const auto& model : {PropagatorModel::exponential(64.0, 0.9), PropagatorModel::scaling(256.0, 0.9)}) {
        const std::size_t n = 4096;
        const std::vector<std::size_t> lags{0, 1, 4, 16};
        std::vector<double> acc(lags.size(), 0.0);
        std::vector<double> count(lags.size(), 0.0);
        for (std::uint64_t seed = 1; seed <= 200; ++seed) {
            const auto x = gaussian_process_from_propagator(model, n, seed);
            REQUIRE(x.size() == n);
            for (std::size_t j = 0; j < lags.size(); ++j) {
                for (std::size_t i = 0; i + lags[j] < n; ++i) acc[j] += x[i] * x[i + lags[j]];
                count[j] += static_cast<double>(n - lags[j]);
            }
        }
        for (std::size_t j = 0; j < lags.size(); ++j)
            CHECK(acc[j] / count[j] == doctest::Approx(propagator(model, static_cast<double>(lags[j]))).epsilon(0.05));
    }
    CHECK(gaussian_process_from_propagator(PropagatorModel::scaling(64.0, 0.9), 1000, 3) ==
          gaussian_process_from_propagator(PropagatorModel::scaling(64.0, 0.9), 1000, 3));
}

TEST_CASE("Gaussian process: OU limit and negative increment correlation") {
    const double tau = 16.0;
    double rho = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
        rho += sample_autocorrelation(gaussian_process_from_propagator(PropagatorModel::exponential(tau, 1.0), 1 << 15, seed), 1);
    CHECK(rho / 20.0 == doctest::Approx(std::exp(-1.0 / tau)).epsilon(0.01));

    const auto path = gaussian_process_from_propagator(PropagatorModel::scaling(4096.0, 0.8), 1 << 15, 5);
    std::vector<double> inc(path.size() - 1);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) inc[i] = path[i + 1] - path[i];
    const double r1 = sample_autocorrelation(inc, 1);
    CHECK(r1 < -2.576 / std::sqrt(static_cast<double>(inc.size())));
    CHECK(r1 == doctest::Approx(std::pow(2.0, 0.8) / 2.0 - 1.0).epsilon(0.1));
}

TEST_CASE("stationary Gaussian sampler rejects indefinite covariances") {
    // Lag-1 correlation above 1 cannot be a covariance.
    std::vector<double> bad(5000, 0.0);
    bad[0] = 1.0;
    bad[1] = 0.9;
    bad[2] = -0.9;
    CHECK_THROWS_AS((void)sample_stationary_gaussian(bad, 1), std::domain_error);
    const std::vector<double> white{1.0, 0.0, 0.0, 0.0};
    CHECK(sample_stationary_gaussian(white, 2).size() == 4);
}

TEST_CASE("sample autocorrelation") {
    const std::vector<double> alt{1, -1, 1, -1, 1, -1, 1, -1};
    CHECK(sample_autocorrelation(alt, 0) == doctest::Approx(1.0));
    CHECK(sample_autocorrelation(alt, 1) == doctest::Approx(-7.0 / 8.0));
}

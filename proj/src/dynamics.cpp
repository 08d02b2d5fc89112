#include "critmkt/dynamics.hpp"

#include "critmkt/trend.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <string>
#include <thread>

namespace critmkt {

double glauber_flip_probability(double delta_e, double temperature) {
    if (!(temperature > 0.0)) throw std::invalid_argument("glauber_flip_probability: temperature must be > 0");
    const double x = delta_e / temperature;
    if (x > 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

void sweep(SpinLattice& lattice, double temperature, Rng& rng) {
    const int D = lattice.dims();
    const int z = 2 * D;
    // p[bit][up_neighbours]; dE = (2/D) s (up - D) with s = bit - 1/2.
    std::array<std::array<double, 17>, 2> p{};
    if (z + 1 > static_cast<int>(p[0].size())) throw std::invalid_argument("sweep: dims > 8 not supported");
    for (int bit = 0; bit < 2; ++bit) {
        const double s = bit ? 0.5 : -0.5;
        for (int up = 0; up <= z; ++up)
            p[static_cast<std::size_t>(bit)][static_cast<std::size_t>(up)] =
                glauber_flip_probability(2.0 / D * s * (up - D), temperature);
    }
    std::uniform_int_distribution<std::size_t> pick(0, lattice.size() - 1);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (std::size_t k = 0; k < lattice.size(); ++k) {
        const std::size_t site = pick(rng);
        const double u = coin(rng);
        const auto up = static_cast<std::size_t>(lattice.up_neighbors(site));
        if (u < p[lattice.bit(site)][up]) lattice.toggle(site);
    }
}

void SimulationParams::validate() const {
    if (dims < 1 || side < 2) throw std::invalid_argument("simulation: need dims >= 1 and side >= 2");
    if (!(temperature > 0.0) || !std::isfinite(temperature))
        throw std::invalid_argument("simulation: temperature must be finite and > 0");
    if (sweeps == 0) throw std::invalid_argument("simulation: sweeps must be > 0");
    if (thin == 0) throw std::invalid_argument("simulation: thin must be > 0");
    if (burn_in >= sweeps) throw std::invalid_argument("simulation: burn_in must be < sweeps");
}

std::size_t default_burn_in(int side, double z) {
    return static_cast<std::size_t>(std::ceil(10.0 * std::pow(static_cast<double>(side), z)));
}

SimulationRun run_simulation_with_state(const SimulationParams& params) {
    params.validate();
    SimulationRun run{{}, SpinLattice(params.dims, params.side, params.init)};
    auto& series = run.series;
    series.params = params;
    series.sites = run.lattice.size();
    const std::size_t recorded = (params.sweeps - params.burn_in) / params.thin;
    series.values.reserve(recorded);
    series.sweep_index.reserve(recorded);

    Rng rng = make_rng(params.seed, 1);
    for (std::size_t s = 1; s <= params.burn_in; ++s) sweep(run.lattice, params.temperature, rng);
    for (std::size_t k = 0; k < recorded; ++k) {
        for (std::size_t j = 0; j < params.thin; ++j) sweep(run.lattice, params.temperature, rng);
        series.values.push_back(magnetization(run.lattice));
        series.sweep_index.push_back(params.burn_in + (k + 1) * params.thin);
    }
    return run;
}

MagnetizationSeries run_simulation(const SimulationParams& params) {
    return run_simulation_with_state(params).series;
}

std::vector<MagnetizationSeries> run_replicas(const SimulationParams& params, std::size_t replicas, unsigned threads) {
    params.validate();
    std::vector<MagnetizationSeries> out(replicas);
    if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(replicas, 1)));

    auto worker = [&](unsigned w) {
        for (std::size_t r = w; r < replicas; r += threads) {
            SimulationParams p = params;
            p.seed = derive_seed(params.seed, r);
            if (p.init.kind == InitKind::random) p.init.seed = p.seed;
            out[r] = run_simulation(p);
        }
    };
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < threads; ++w) pool.emplace_back(worker, w);
    worker(0);
    return out;
}

std::vector<double> first_differences(std::span<const double> x) {
    std::vector<double> d;
    if (x.size() < 2) return d;
    d.reserve(x.size() - 1);
    for (std::size_t i = 1; i < x.size(); ++i) d.push_back(x[i] - x[i - 1]);
    return d;
}

ReturnSeries magnetization_to_returns(const MagnetizationSeries& series) {
    if (series.values.size() < 3)
        throw std::invalid_argument("magnetization_to_returns: need at least 3 magnetization values");
    return normalize_increments(first_differences(series.values));
}

double binder_cumulant(std::span<const double> m_samples) {
    if (m_samples.size() < 100) throw std::invalid_argument("binder_cumulant: need at least 100 samples");
    double m2 = 0.0, m4 = 0.0;
    for (const double m : m_samples) {
        const double sq = m * m;
        m2 += sq;
        m4 += sq * sq;
    }
    const auto n = static_cast<double>(m_samples.size());
    m2 /= n;
    m4 /= n;
    if (m2 == 0.0) throw std::domain_error("binder_cumulant: <M^2> is zero");
    return 1.0 - m4 / (3.0 * m2 * m2);
}

BinderEstimate binder_cumulant_jackknife(std::span<const double> m_samples, std::size_t blocks) {
    const double full = binder_cumulant(m_samples);
    if (blocks < 2 || m_samples.size() < blocks) throw std::invalid_argument("binder_cumulant_jackknife: bad block count");
    const std::size_t len = m_samples.size() / blocks;
    std::vector<double> s2(blocks, 0.0), s4(blocks, 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t i = b * len; i < (b + 1) * len; ++i) {
            const double sq = m_samples[i] * m_samples[i];
            s2[b] += sq;
            s4[b] += sq * sq;
        }
    }
    const double t2 = std::accumulate(s2.begin(), s2.end(), 0.0);
    const double t4 = std::accumulate(s4.begin(), s4.end(), 0.0);
    const auto used = static_cast<double>(len * (blocks - 1));
    std::vector<double> loo(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
        const double m2 = (t2 - s2[b]) / used;
        const double m4 = (t4 - s4[b]) / used;
        loo[b] = 1.0 - m4 / (3.0 * m2 * m2);
    }
    const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / static_cast<double>(blocks);
    double ss = 0.0;
    for (const double u : loo) ss += (u - mean) * (u - mean);
    const auto B = static_cast<double>(blocks);
    return {full, std::sqrt((B - 1.0) / B * ss)};
}

AutocorrelationTime autocorrelation_time(std::span<const double> series) {
    const std::size_t n = series.size();
    if (n < 8) throw std::invalid_argument("autocorrelation_time: series too short");
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);

    // Autocovariance by zero-padded FFT.
    std::size_t m = 1;
    while (m < 2 * n) m <<= 1;
    std::vector<double> padded(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) padded[i] = series[i] - mean;
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, padded);
    for (auto& c : spec) c = std::norm(c);
    std::vector<double> acov;
    fft.inv(acov, spec);
    const double c0 = acov[0];
    if (!(c0 > 0.0)) throw std::domain_error("autocorrelation_time: series has zero variance");

    AutocorrelationTime out;
    double tau = 0.5;
    std::size_t w = 1;
    bool converged = false;
    for (; w < n / 2; ++w) {
        tau += acov[w] / c0;
        if (static_cast<double>(w) >= 6.0 * tau) {
            converged = true;
            break;
        }
    }
    out.tau = tau;
    out.window = w;
    out.reliable = converged && static_cast<double>(n) >= 50.0 * tau;
    return out;
}

double ZeroModeParams::max_stable_dt() const {
    return 0.1 / std::max({1.0, std::abs(r), g});
}

void ZeroModeParams::validate() const {
    if (!(g >= 0.0)) throw std::invalid_argument("zero mode: g must be >= 0");
    if (!(dt > 0.0)) throw std::invalid_argument("zero mode: dt must be > 0");
    if (dt > max_stable_dt())
        throw std::invalid_argument("zero mode: dt exceeds stability bound 0.1/max(1,|r|,g) = " +
                                    std::to_string(max_stable_dt()));
    if (steps == 0) throw std::invalid_argument("zero mode: steps must be > 0");
}

ZeroModeDivergence::ZeroModeDivergence(std::size_t step, double value)
    : std::runtime_error("zero mode diverged at step " + std::to_string(step) + " (pi = " + std::to_string(value) + ")"),
      step_(step) {}

std::vector<double> integrate_zero_mode(const ZeroModeParams& params) {
    params.validate();
    constexpr double overflow_guard = 1e100;
    Rng rng = make_rng(params.seed, 2);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double sq = std::sqrt(params.dt);
    std::vector<double> path;
    path.reserve(params.steps + 1);
    double pi = params.pi0;
    path.push_back(pi);
    for (std::size_t k = 1; k <= params.steps; ++k) {
        const double force = params.drift - 0.5 * params.r * pi - params.g / 12.0 * pi * pi * pi;
        pi += force * params.dt + sq * gauss(rng);
        if (!std::isfinite(pi) || std::abs(pi) > overflow_guard) throw ZeroModeDivergence(k, pi);
        path.push_back(pi);
    }
    return path;
}

}  // namespace critmkt

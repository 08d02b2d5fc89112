#pragma once

#include "critmkt/lattice.hpp"
#include "critmkt/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace critmkt {

struct ReturnSeries;

/// 2D critical temperature in this model's units (k = 1). Spins +-1/2 with
/// coupling 1/D give J_eff = 1/(4D) = 1/8 in standard Ising units, so
/// T_c = (1/8) * 2 / ln(1 + sqrt 2).
inline constexpr double critical_temperature_2d = 0.28364816427662774;

/// Heat-bath acceptance 1 / (1 + exp(dE / T)); saturates to 0 or 1.
[[nodiscard]] double glauber_flip_probability(double delta_e, double temperature);

/**
 * One Monte Carlo sweep: N single-site Glauber updates at uniformly random
 * sites. One sweep is one unit of Model-A time.
 *
 * The update at a site draws u ~ U[0,1) and flips iff u < p(dE). Because dE is
 * invariant under the global flip, the same RNG stream drives a mirrored
 * configuration through the mirrored trajectory.
 */
void sweep(SpinLattice& lattice, double temperature, Rng& rng);

struct SimulationParams {
    int dims = 2;
    int side = 32;
    LatticeInit init = LatticeInit::up();
    double temperature = critical_temperature_2d;
    std::size_t sweeps = 10'000;
    std::size_t burn_in = 0;
    std::size_t thin = 1;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument on T <= 0, sweeps == 0, thin == 0 or
    /// burn_in >= sweeps.
    void validate() const;
};

/// Heuristic burn-in of 10 * L^z sweeps with z = 2.17 (2D Model A).
[[nodiscard]] std::size_t default_burn_in(int side, double z = 2.17);

struct MagnetizationSeries {
    std::vector<double> values;  ///< M(t), one per recorded sweep
    std::vector<std::size_t> sweep_index;  ///< 1-based sweep count of each record
    std::size_t sites = 0;
    SimulationParams params;
};

/// Burn in, then record M every `thin` sweeps;
/// length = floor((sweeps - burn_in) / thin).
[[nodiscard]] MagnetizationSeries run_simulation(const SimulationParams& params);

/// Final lattice alongside the series, for snapshots.
struct SimulationRun {
    MagnetizationSeries series;
    SpinLattice lattice;
};
[[nodiscard]] SimulationRun run_simulation_with_state(const SimulationParams& params);

/// R independent replicas; replica r uses seed derive_seed(params.seed, r)
/// for both its random init (if any) and its dynamics. Runs on up to
/// `threads` workers (0 = hardware concurrency); results are independent of
/// the thread count.
[[nodiscard]] std::vector<MagnetizationSeries> run_replicas(const SimulationParams& params, std::size_t replicas,
                                                            unsigned threads = 0);

/// First differences x(t) - x(t-1).
[[nodiscard]] std::vector<double> first_differences(std::span<const double> x);

/// Returns R = dM / sigma with mu, sigma the sample mean / std (n-1) of dM.
/// Throws std::domain_error on zero variance, std::invalid_argument if fewer
/// than 2 values (fewer than 3 are rejected too: a single difference has no
/// variance).
[[nodiscard]] ReturnSeries magnetization_to_returns(const MagnetizationSeries& series);

/// 1 - <M^4> / (3 <M^2>^2). Needs >= 100 samples.
[[nodiscard]] double binder_cumulant(std::span<const double> m_samples);

struct BinderEstimate {
    double value = 0.0;
    double error = 0.0;  ///< jackknife standard error over contiguous blocks
};
[[nodiscard]] BinderEstimate binder_cumulant_jackknife(std::span<const double> m_samples, std::size_t blocks = 50);

struct AutocorrelationTime {
    double tau = 0.0;  ///< 1/2 + sum_{t=1}^{W} rho(t)
    std::size_t window = 0;
    bool reliable = false;  ///< false if the series is shorter than 50 * tau
};

/// Integrated autocorrelation time with self-consistent window W >= 6 tau.
[[nodiscard]] AutocorrelationTime autocorrelation_time(std::span<const double> series);
[[nodiscard]] inline AutocorrelationTime autocorrelation_time(const MagnetizationSeries& series) {
    return autocorrelation_time(series.values);
}

/// Zero-mode Langevin equation
///   d pi = (a - (r/2) pi - (g/12) pi^3) dt + dW,  <dW^2> = dt.
struct ZeroModeParams {
    double r = 1.0;
    double g = 0.0;
    double drift = 0.0;  ///< a, the risk premium
    double dt = 0.01;
    std::size_t steps = 1000;
    double pi0 = 0.0;
    std::uint64_t seed = 1;

    [[nodiscard]] double max_stable_dt() const;
    void validate() const;
};

class ZeroModeDivergence : public std::runtime_error {
public:
    ZeroModeDivergence(std::size_t step, double value);
    [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Euler-Maruyama path pi(0..steps), steps + 1 values starting at pi0.
[[nodiscard]] std::vector<double> integrate_zero_mode(const ZeroModeParams& params);

}  // namespace critmkt

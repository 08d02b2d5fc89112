#pragma once

// Reference values and generators used only by the tests. Nothing here calls
// into the library's numerical code.

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

// Frozen with mpmath at 50 digits.
inline constexpr double glauber_p_de1_t025 = 0.017986209962091558;     // 1/(1+e^4)
inline constexpr double tc_2d = 0.28364816427662774;                  // (1/8) 2/ln(1+sqrt2)
inline constexpr double psi_norm_t2 = 0.9298734950321937;             // sqrt(1-e^-2)
inline constexpr double propagator_2048_097_64 = 786.3828634837358;   // (2048^.97 - 64^.97)/2
inline constexpr double adjacent_097_64 = -0.018165764982789671;      // (64^-.03/2)(2^.97-2)
inline constexpr double trend_return_scaling_09_025 = -0.041863289336297078;
inline constexpr double phi_variance_scaling_09_025 = 0.75353920805334740;
inline constexpr double ar1_tau_int_theta01 = 10.00833194477505;      // 1/2 + 1/(e^0.1 - 1)
inline constexpr double eta_from_033_063_d3 = 0.047619047619047616;

// Exhaustive energies on tiny periodic 2D lattices, computed by brute force
// from the site grid (not the library's neighbour table).
inline double brute_spin_energy(const std::vector<int>& bits, int side) {
    double e = 0.0;
    auto s = [&](int r, int c) { return bits[static_cast<std::size_t>(((r + side) % side) * side + (c + side) % side)] - 0.5; };
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) e -= 0.5 * (s(r, c) * s(r, c + 1) + s(r, c) * s(r + 1, c));
    return e;
}

// Fractional Gaussian noise by Davies-Harte with a plain power-of-two embedding.
inline std::vector<double> fgn(std::size_t n, double hurst, std::uint64_t seed) {
    auto gamma = [hurst](double k) {
        return 0.5 * (std::pow(std::abs(k + 1), 2 * hurst) - 2 * std::pow(std::abs(k), 2 * hurst) +
                      std::pow(std::abs(k - 1), 2 * hurst));
    };
    std::size_t m = 1;
    while (m < 2 * n) m <<= 1;
    std::vector<std::complex<double>> row(m);
    for (std::size_t k = 0; k < m; ++k) row[k] = gamma(static_cast<double>(std::min(k, m - k)));
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> lam;
    fft.fwd(lam, row);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<std::complex<double>> w(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double a = std::sqrt(std::max(lam[j].real(), 0.0) / static_cast<double>(m));
        const double x = g(rng);
        const double y = g(rng);
        w[j] = {a * x, a * y};
    }
    std::vector<std::complex<double>> out;
    fft.fwd(out, w);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = out[i].real();
    return x;
}

// Least squares through a thin QR of the full design matrix.
inline Eigen::VectorXd ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    return x.householderQr().solve(y);
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double stddev(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (const double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace oracle

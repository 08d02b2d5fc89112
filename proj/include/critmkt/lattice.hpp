#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace critmkt {

/// Initial spin configuration for a new lattice.
enum class InitKind { all_up, all_down, random };

struct LatticeInit {
    InitKind kind = InitKind::all_up;
    std::uint64_t seed = 0;  // used by InitKind::random only

    static LatticeInit up() { return {InitKind::all_up, 0}; }
    static LatticeInit down() { return {InitKind::all_down, 0}; }
    static LatticeInit random(std::uint64_t seed) { return {InitKind::random, seed}; }
};

/// Raised when L^D overflows the supported site count.
class LatticeOverflow : public std::length_error {
public:
    using std::length_error::length_error;
};

/**
 * D-dimensional periodic hypercubic lattice of binary spins.
 *
 * Each site holds a bit b_i; the spin is s_i = b_i - 1/2 in {+1/2, -1/2} and
 * the occupation number (shares held by the investor) is n_i = b_i. Sites are
 * indexed row-major, the last axis fastest. Every site has 2D neighbours and
 * the lattice carries D*N links, each link counted once (site -> forward
 * neighbour on every axis). For side 2 the forward and backward neighbour
 * coincide, so each pair is joined by two links.
 */
class SpinLattice {
public:
    static constexpr std::size_t max_sites = std::size_t{1} << 30;

    SpinLattice(int dims, int side, LatticeInit init = LatticeInit::up());

    [[nodiscard]] int dims() const noexcept { return dims_; }
    [[nodiscard]] int side() const noexcept { return side_; }
    [[nodiscard]] std::size_t size() const noexcept { return bits_.size(); }
    [[nodiscard]] std::size_t link_count() const noexcept { return size() * static_cast<std::size_t>(dims_); }
    /// Seed recorded at construction (0 unless random init).
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    void set_seed(std::uint64_t seed) noexcept { seed_ = seed; }

    [[nodiscard]] bool is_up(std::size_t site) const { return bits_.at(site) != 0; }
    [[nodiscard]] double spin(std::size_t site) const { return is_up(site) ? 0.5 : -0.5; }
    [[nodiscard]] int occupation(std::size_t site) const { return is_up(site) ? 1 : 0; }

    void set_up(std::size_t site, bool up) { bits_.at(site) = up ? 1 : 0; }
    void flip(std::size_t site) { bits_.at(site) ^= 1; }
    /// Global Z2 flip s -> -s.
    void flip_all() noexcept;

    /// Unchecked hot-path accessors.
    [[nodiscard]] std::uint8_t bit(std::size_t site) const noexcept { return bits_[site]; }
    void toggle(std::size_t site) noexcept { bits_[site] ^= 1; }

    /// Neighbour on `axis` in direction +1 (`forward`) or -1.
    [[nodiscard]] std::size_t neighbor(std::size_t site, int axis, bool forward) const noexcept {
        return neighbors_[site * 2 * static_cast<std::size_t>(dims_) + 2 * static_cast<std::size_t>(axis) + (forward ? 0 : 1)];
    }
    /// All 2D neighbours of `site`.
    [[nodiscard]] std::span<const std::uint32_t> neighbors(std::size_t site) const noexcept {
        const std::size_t z = 2 * static_cast<std::size_t>(dims_);
        return {neighbors_.data() + site * z, z};
    }
    /// Number of up spins among the neighbours of `site`.
    [[nodiscard]] int up_neighbors(std::size_t site) const noexcept;

    /// Number of occupied sites n = sum_i n_i.
    [[nodiscard]] std::size_t occupied() const noexcept;

    [[nodiscard]] std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    friend bool operator==(const SpinLattice& a, const SpinLattice& b) noexcept {
        return a.dims_ == b.dims_ && a.side_ == b.side_ && a.bits_ == b.bits_;
    }

private:
    int dims_;
    int side_;
    std::uint64_t seed_ = 0;
    std::vector<std::uint8_t> bits_;
    std::vector<std::uint32_t> neighbors_;
};

/// -(1/D) sum_links n_i n_j + mu sum_i n_i. With mu = 0 this is the plain
/// lattice-gas energy.
[[nodiscard]] double occupation_energy(const SpinLattice& lattice, double mu = 1.0);

/// -(1/D) sum_links s_i s_j.
[[nodiscard]] double spin_energy(const SpinLattice& lattice);

/// Energy change of flipping one spin, from its 2D neighbours only:
/// dE = (2/D) s_site sum_nb s_j. Throws std::out_of_range for a bad site.
[[nodiscard]] double flip_delta_energy(const SpinLattice& lattice, std::size_t site);

/// M = sum_i s_i = n - N/2.
[[nodiscard]] double magnetization(const SpinLattice& lattice) noexcept;

/// P = n / n0 with n0 = N/2, i.e. 1 + 2M/N.
[[nodiscard]] double implied_price(const SpinLattice& lattice) noexcept;

/// Text snapshot: one header line "critmkt-lattice 1 <D> <L> <seed>", then the
/// N spin bits in site order as '0'/'1' characters on a single line.
void write_snapshot(std::ostream& os, const SpinLattice& lattice);
[[nodiscard]] SpinLattice read_snapshot(std::istream& is);

}  // namespace critmkt

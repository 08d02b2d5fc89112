#include "critmkt/lattice.hpp"

#include "critmkt/rng.hpp"

#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace critmkt {

namespace {

std::size_t checked_site_count(int dims, int side) {
    if (dims < 1) throw std::invalid_argument("lattice: dims must be >= 1");
    if (side < 2) throw std::invalid_argument("lattice: side must be >= 2");
    std::size_t n = 1;
    for (int d = 0; d < dims; ++d) {
        if (n > SpinLattice::max_sites / static_cast<std::size_t>(side))
            throw LatticeOverflow("lattice: side^dims exceeds " + std::to_string(SpinLattice::max_sites) + " sites");
        n *= static_cast<std::size_t>(side);
    }
    return n;
}

}  // namespace

SpinLattice::SpinLattice(int dims, int side, LatticeInit init)
    : dims_(dims), side_(side) {
    const std::size_t n = checked_site_count(dims, side);
    bits_.assign(n, init.kind == InitKind::all_down ? 0 : 1);
    if (init.kind == InitKind::random) {
        seed_ = init.seed;
        Rng rng = make_rng(init.seed);
        std::bernoulli_distribution coin(0.5);
        for (auto& b : bits_) b = coin(rng) ? 1 : 0;
    }

    // Row-major strides, last axis fastest.
    const auto L = static_cast<std::size_t>(side);
    std::vector<std::size_t> stride(static_cast<std::size_t>(dims));
    std::size_t s = 1;
    for (int a = dims - 1; a >= 0; --a) {
        stride[static_cast<std::size_t>(a)] = s;
        s *= L;
    }
    const std::size_t z = 2 * static_cast<std::size_t>(dims);
    neighbors_.resize(n * z);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < static_cast<std::size_t>(dims); ++a) {
            const std::size_t coord = (i / stride[a]) % L;
            const std::size_t base = i - coord * stride[a];
            const std::size_t fwd = base + ((coord + 1) % L) * stride[a];
            const std::size_t bwd = base + ((coord + L - 1) % L) * stride[a];
            neighbors_[i * z + 2 * a] = static_cast<std::uint32_t>(fwd);
            neighbors_[i * z + 2 * a + 1] = static_cast<std::uint32_t>(bwd);
        }
    }
}

void SpinLattice::flip_all() noexcept {
    for (auto& b : bits_) b ^= 1;
}

int SpinLattice::up_neighbors(std::size_t site) const noexcept {
    int up = 0;
    for (const auto j : neighbors(site)) up += bits_[j];
    return up;
}

std::size_t SpinLattice::occupied() const noexcept {
    return std::accumulate(bits_.begin(), bits_.end(), std::size_t{0});
}

double occupation_energy(const SpinLattice& lattice, double mu) {
    std::size_t occupied_links = 0;
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        if (!lattice.bit(i)) continue;
        for (int a = 0; a < lattice.dims(); ++a) occupied_links += lattice.bit(lattice.neighbor(i, a, true));
    }
    return -static_cast<double>(occupied_links) / lattice.dims() + mu * static_cast<double>(lattice.occupied());
}

double spin_energy(const SpinLattice& lattice) {
    // s_i s_j = +1/4 on aligned links, -1/4 otherwise.
    long long aligned_minus_anti = 0;
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        for (int a = 0; a < lattice.dims(); ++a)
            aligned_minus_anti += lattice.bit(i) == lattice.bit(lattice.neighbor(i, a, true)) ? 1 : -1;
    }
    return -0.25 * static_cast<double>(aligned_minus_anti) / lattice.dims();
}

double flip_delta_energy(const SpinLattice& lattice, std::size_t site) {
    if (site >= lattice.size()) throw std::out_of_range("flip_delta_energy: site " + std::to_string(site) + " out of range");
    const int z = 2 * lattice.dims();
    const double nb_sum = 0.5 * (2 * lattice.up_neighbors(site) - z);
    return 2.0 / lattice.dims() * lattice.spin(site) * nb_sum;
}

double magnetization(const SpinLattice& lattice) noexcept {
    return static_cast<double>(lattice.occupied()) - 0.5 * static_cast<double>(lattice.size());
}

double implied_price(const SpinLattice& lattice) noexcept {
    return static_cast<double>(lattice.occupied()) / (0.5 * static_cast<double>(lattice.size()));
}

void write_snapshot(std::ostream& os, const SpinLattice& lattice) {
    os << "critmkt-lattice 1 " << lattice.dims() << ' ' << lattice.side() << ' ' << lattice.seed() << '\n';
    std::string line(lattice.size(), '0');
    for (std::size_t i = 0; i < lattice.size(); ++i)
        if (lattice.bit(i)) line[i] = '1';
    os << line << '\n';
}

SpinLattice read_snapshot(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("snapshot: missing header");
    std::istringstream hs(header);
    std::string magic;
    int version = 0, dims = 0, side = 0;
    std::uint64_t seed = 0;
    if (!(hs >> magic >> version >> dims >> side >> seed) || magic != "critmkt-lattice" || version != 1)
        throw std::runtime_error("snapshot: malformed header '" + header + "'");
    SpinLattice lattice(dims, side, LatticeInit::up());
    std::string body;
    if (!std::getline(is, body) || body.size() != lattice.size())
        throw std::runtime_error("snapshot: expected " + std::to_string(lattice.size()) + " spin bits");
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] != '0' && body[i] != '1') throw std::runtime_error("snapshot: invalid bit at position " + std::to_string(i));
        lattice.set_up(i, body[i] == '1');
    }
    // Seed is provenance only; the recorded bits are authoritative.
    lattice.set_seed(seed);
    return lattice;
}

}  // namespace critmkt

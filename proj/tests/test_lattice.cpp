#include "doctest.h"
#include "oracles.hpp"

#include "critmkt/lattice.hpp"
#include "critmkt/rng.hpp"

#include <set>
#include <sstream>

using namespace critmkt;

TEST_CASE("construction and uniform configurations") {
    SpinLattice up(2, 4, LatticeInit::up());
    CHECK(up.size() == 16);
    CHECK(up.link_count() == 32);
    CHECK(magnetization(up) == 8.0);
    for (std::size_t i = 0; i < up.size(); ++i) CHECK(up.spin(i) == 0.5);

    SpinLattice down(1, 8, LatticeInit::down());
    CHECK(magnetization(down) == -4.0);
    CHECK(implied_price(down) == 0.0);

    CHECK_THROWS_AS(SpinLattice(0, 4), std::invalid_argument);
    CHECK_THROWS_AS(SpinLattice(2, 1), std::invalid_argument);
    CHECK_THROWS_AS(SpinLattice(31, 2), LatticeOverflow);
    CHECK_THROWS_AS(SpinLattice(3, 2000), LatticeOverflow);
}

TEST_CASE("random initialization is reproducible") {
    SpinLattice a(3, 8, LatticeInit::random(7));
    SpinLattice b(3, 8, LatticeInit::random(7));
    SpinLattice c(3, 8, LatticeInit::random(8));
    CHECK(a.size() == 512);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    CHECK(std::abs(magnetization(a)) <= 256.0);
}

TEST_CASE("neighbour table: 2D distinct neighbours, periodic wrap") {
    for (int dims : {1, 2, 3, 4}) {
        SpinLattice lat(dims, 5);
        for (std::size_t i = 0; i < lat.size(); ++i) {
            const auto nb = lat.neighbors(i);
            CHECK(nb.size() == static_cast<std::size_t>(2 * dims));
            std::set<std::uint32_t> distinct(nb.begin(), nb.end());
            CHECK(distinct.size() == nb.size());
            for (int a = 0; a < dims; ++a) CHECK(lat.neighbor(lat.neighbor(i, a, true), a, false) == i);
        }
    }
    SpinLattice line(1, 4);
    CHECK(line.neighbor(3, 0, true) == 0);
    CHECK(line.neighbor(0, 0, false) == 3);
}

TEST_CASE("occupation energy") {
    // Plus-shaped cluster of five molecules on a 6x6 grid: 4 occupied links.
    SpinLattice lat(2, 6, LatticeInit::down());
    const std::size_t centre = 2 * 6 + 2;
    for (std::size_t s : {centre, centre - 1, centre + 1, centre - 6, centre + 6}) lat.set_up(s, true);
    CHECK(occupation_energy(lat, 0.0) == -2.0);

    SpinLattice empty(2, 6, LatticeInit::down());
    CHECK(occupation_energy(empty, 0.0) == 0.0);
    CHECK(occupation_energy(empty, 3.7) == 0.0);

    SpinLattice single(2, 6, LatticeInit::down());
    single.set_up(7, true);
    CHECK(occupation_energy(single, 1.0) == 1.0);
}

TEST_CASE("spin energy: ground state and checkerboard") {
    SpinLattice up(2, 6, LatticeInit::up());
    CHECK(spin_energy(up) == -static_cast<double>(up.size()) / 4.0);
    SpinLattice board(2, 6, LatticeInit::down());
    for (std::size_t i = 0; i < board.size(); ++i) board.set_up(i, ((i / 6) + (i % 6)) % 2 == 0);
    CHECK(spin_energy(board) == static_cast<double>(board.size()) / 4.0);
}

TEST_CASE("occupation minus spin energy is N/4 for every configuration") {
    for (int side : {2, 3}) {
        const int n = side * side;
        for (int mask = 0; mask < (1 << n); ++mask) {
            SpinLattice lat(2, side, LatticeInit::down());
            std::vector<int> bits(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                bits[static_cast<std::size_t>(i)] = (mask >> i) & 1;
                lat.set_up(static_cast<std::size_t>(i), bits[static_cast<std::size_t>(i)]);
            }
            REQUIRE(occupation_energy(lat, 1.0) - spin_energy(lat) == doctest::Approx(n / 4.0).epsilon(1e-15));
            if (side == 3) REQUIRE(spin_energy(lat) == doctest::Approx(oracle::brute_spin_energy(bits, side)).epsilon(1e-15));
        }
    }
}

TEST_CASE("flip_delta_energy equals full recomputation") {
    SpinLattice up(2, 4, LatticeInit::up());
    CHECK(flip_delta_energy(up, 5) == 1.0);

    SpinLattice bal(2, 4, LatticeInit::up());
    bal.set_up(bal.neighbor(5, 0, true), false);
    bal.set_up(bal.neighbor(5, 1, true), false);
    CHECK(flip_delta_energy(bal, 5) == 0.0);

    for (int dims : {1, 2, 3}) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            SpinLattice lat(dims, 3, LatticeInit::random(seed));
            for (std::size_t i = 0; i < lat.size(); ++i) {
                const double before = spin_energy(lat);
                const double de = flip_delta_energy(lat, i);
                lat.flip(i);
                CHECK(spin_energy(lat) - before == doctest::Approx(de).scale(1.0).epsilon(1e-12));
                lat.flip(i);
            }
        }
    }
    CHECK_THROWS_AS((void)flip_delta_energy(up, 16), std::out_of_range);
}

TEST_CASE("magnetization and price") {
    SpinLattice lat(2, 10, LatticeInit::down());
    for (std::size_t i = 0; i < 75; ++i) lat.set_up(i, true);
    CHECK(magnetization(lat) == 25.0);
    CHECK(implied_price(lat) == 1.5);
    SpinLattice half(2, 10, LatticeInit::down());
    for (std::size_t i = 0; i < 50; ++i) half.set_up(i, true);
    CHECK(magnetization(half) == 0.0);
    CHECK(implied_price(half) == 1.0);

    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SpinLattice r(2, 7, LatticeInit::random(seed));
        CHECK(implied_price(r) - 1.0 == doctest::Approx(2.0 * magnetization(r) / static_cast<double>(r.size())).scale(1.0).epsilon(1e-15));
    }
}

TEST_CASE("global flip keeps the spin energy") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SpinLattice lat(3, 4, LatticeInit::random(seed));
        const double e = spin_energy(lat);
        const double m = magnetization(lat);
        lat.flip_all();
        CHECK(spin_energy(lat) == e);
        CHECK(magnetization(lat) == -m);
    }
}

TEST_CASE("snapshot round trip") {
    SpinLattice lat(2, 5, LatticeInit::random(42));
    std::stringstream ss;
    write_snapshot(ss, lat);
    const SpinLattice back = read_snapshot(ss);
    CHECK(back == lat);
    CHECK(back.seed() == 42);

    std::stringstream bad("critmkt-lattice 1 2 3 0\n0101\n");
    CHECK_THROWS((void)read_snapshot(bad));
}

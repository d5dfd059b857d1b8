#include <doctest.h>

#include <chb/error.hpp>
#include <chb/snapshot.hpp>

#include <random>
#include <sstream>

using namespace chb;

TEST_CASE("scalar snapshot round trip is bit exact") {
    Grid2D g(7, 5, 1.25, 0.5);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n;
    ScalarField f(g);
    for (auto& v : f.raw()) v = n(rng);
    std::stringstream ss;
    write_snapshot(ss, f);
    CHECK(ss.str().size() == 4 + 1 + 4 + 4 + 8 + 8 + 8 * 35);
    CHECK(ss.str().substr(0, 4) == "CHBF");
    const auto back = read_scalar_snapshot(ss);
    CHECK(back.grid() == g);
    CHECK(back == f);
}

TEST_CASE("vector snapshot round trip") {
    Grid2D g(4, 6);
    VectorField v(ScalarField::from_function(g, [](double x, double y) { return x * y; }),
                  ScalarField::from_function(g, [](double x, double) { return -x; }));
    std::stringstream ss;
    write_snapshot(ss, v);
    CHECK(static_cast<unsigned char>(ss.str()[29]) == 2);
    CHECK(read_vector_snapshot(ss) == v);
}

TEST_CASE("header layout is little endian") {
    Grid2D g(4, 5);
    std::stringstream ss;
    write_snapshot(ss, ScalarField(g, 1.0));
    const std::string s = ss.str();
    CHECK(static_cast<unsigned char>(s[4]) == 1);
    CHECK(static_cast<unsigned char>(s[5]) == 4);
    CHECK(static_cast<unsigned char>(s[9]) == 5);
    CHECK(static_cast<unsigned char>(s[6]) == 0);
}

TEST_CASE("corrupt snapshots are rejected") {
    Grid2D g(4, 4);
    std::stringstream ss;
    write_snapshot(ss, ScalarField(g, 1.0));
    std::string s = ss.str();
    std::stringstream truncated(s.substr(0, s.size() - 3));
    CHECK_THROWS_AS(read_scalar_snapshot(truncated), ConfigError);
    std::string bad = s;
    bad[0] = 'X';
    std::stringstream badmagic(bad);
    CHECK_THROWS_AS(read_scalar_snapshot(badmagic), ConfigError);
    bad = s;
    bad[4] = 9;
    std::stringstream badver(bad);
    CHECK_THROWS_AS(read_scalar_snapshot(badver), ConfigError);
    std::stringstream scalar_as_vector(s);
    CHECK_THROWS_AS(read_vector_snapshot(scalar_as_vector), ConfigError);
}

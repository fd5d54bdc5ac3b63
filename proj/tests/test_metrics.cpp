#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "diffkit/metrics.hpp"
#include "diffkit/rng.hpp"
#include "support/oracles.hpp"

using namespace diffkit;

namespace {
Eigen::MatrixXd random_rows(int n, int d, std::uint64_t seed, double shift = 0.0) {
    GaussianRng rng(seed);
    Eigen::MatrixXd m(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = rng.normal() + shift;
    return m;
}
}  // namespace

TEST_CASE("energy distance matches the brute-force oracle") {
    const Eigen::MatrixXd a = random_rows(7, 2, 1);
    const Eigen::MatrixXd b = random_rows(5, 2, 2, 0.5);
    CHECK(energy_distance(a, b) ==
          doctest::Approx(oracle::brute_energy_distance(a, b)).epsilon(1e-12));

    const Eigen::MatrixXd c = random_rows(40, 3, 3, -1.0);
    const Eigen::MatrixXd d = random_rows(40, 3, 4);
    CHECK(energy_distance(c, d) ==
          doctest::Approx(oracle::brute_energy_distance(c, d)).epsilon(1e-12));
}

TEST_CASE("hand case: {0,1} vs {2} in one dimension") {
    Eigen::MatrixXd a(2, 1), b(1, 1);
    a << 0.0, 1.0;
    b << 2.0;
    // cross mean 1.5, within(a) 0.5, within(b) 0 -> 2*1.5 - 0.5 = 2.5
    CHECK(energy_distance(a, b) == 2.5);
    CHECK(energy_distance(b, a) == 2.5);
}

TEST_CASE("identical inputs give exactly zero") {
    const Eigen::MatrixXd a = random_rows(31, 2, 9);
    CHECK(energy_distance(a, a) == 0.0);
}

TEST_CASE("argument order does not change the result, bit for bit") {
    const Eigen::MatrixXd a = random_rows(9, 2, 11);
    const Eigen::MatrixXd b = random_rows(6, 2, 12, 0.3);
    CHECK(energy_distance(a, b) == energy_distance(b, a));

    const Eigen::MatrixXd c = random_rows(9, 2, 13, -0.2);
    CHECK(energy_distance(a, c) == energy_distance(c, a));  // equal row counts
}

TEST_CASE("separated laws give a clearly positive distance") {
    const Eigen::MatrixXd a = random_rows(2000, 1, 21);
    const Eigen::MatrixXd b = random_rows(2000, 1, 22, 10.0);
    // closed form for N(0,1) vs N(10,1): 20 - 4/sqrt(pi)
    const double want = 20.0 - 4.0 / std::sqrt(std::acos(-1.0));
    CHECK(std::abs(energy_distance(a, b) - want) < 0.5);
    CHECK(energy_distance(a, b) > 0.0);

    const Eigen::MatrixXd a2 = random_rows(500, 2, 23);
    const Eigen::MatrixXd b2 = random_rows(500, 2, 24, 1.0);
    CHECK(energy_distance(a2, b2) > 0.0);
}

TEST_CASE("subsampling above the cap is deterministic") {
    const Eigen::MatrixXd a = random_rows(21000, 1, 31);
    const Eigen::MatrixXd b = random_rows(2000, 1, 32, 0.1);
    const double first = energy_distance(a, b);
    const double second = energy_distance(a, b);
    CHECK(first == second);
    CHECK(std::isfinite(first));
    // close to the uncapped estimate on an independent smaller draw
    const Eigen::MatrixXd a_small = random_rows(4000, 1, 33);
    CHECK(std::abs(first - energy_distance(a_small, b)) < 0.05);
}

TEST_CASE("energy distance input validation") {
    Eigen::MatrixXd a(2, 2), empty(0, 2), bad(2, 3);
    a.setZero();
    bad.setZero();
    CHECK_THROWS_AS(energy_distance(a, empty), std::invalid_argument);
    CHECK_THROWS_AS(energy_distance(empty, a), std::invalid_argument);
    CHECK_THROWS_AS(energy_distance(a, bad), std::invalid_argument);
}

TEST_CASE("moment report: hand case") {
    Eigen::MatrixXd samples(2, 2);
    samples << 0.0, 0.0, 2.0, 2.0;
    StateVector mu(2);
    mu << 1.0, 1.0;
    const MomentReport rep = moment_report(samples, GaussianLaw{mu, 1.0});
    CHECK(rep.mean_error == 0.0);
    CHECK(rep.cov_error == 2.0);  // unbiased cov = [[2,2],[2,2]] vs I
    CHECK(!rep.low_n);
}

TEST_CASE("moment report: single sample is flagged") {
    Eigen::MatrixXd one(1, 2);
    one << 3.0, 4.0;
    StateVector mu = StateVector::Zero(2);
    const MomentReport rep = moment_report(one, GaussianLaw{mu, 1.0});
    CHECK(rep.low_n);
    CHECK(rep.mean_error == 5.0);  // 3-4-5 triangle
    CHECK(rep.cov_error == 1.0);   // zero covariance vs identity
}

TEST_CASE("moment report converges on a real draw") {
    StateVector mu(2);
    mu << 0.5, -0.25;
    const DataLaw law = GaussianLaw{mu, 0.7};
    GaussianRng rng(41);
    const int n = 20000;
    Eigen::MatrixXd samples(n, 2);
    for (int i = 0; i < n; ++i)
        samples.row(i) = law_draw(law, rng).transpose();
    const MomentReport rep = moment_report(samples, law);
    CHECK(rep.mean_error < 4.0 * 0.7 * std::sqrt(2.0 / n));
    CHECK(rep.cov_error < 5.0 * 0.49 * std::sqrt(2.0 / n));
    CHECK(!rep.low_n);
}

TEST_CASE("moment report input validation") {
    Eigen::MatrixXd empty(0, 2), three(4, 3);
    three.setZero();
    StateVector mu = StateVector::Zero(2);
    CHECK_THROWS_AS(moment_report(empty, GaussianLaw{mu, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(moment_report(three, GaussianLaw{mu, 1.0}), std::invalid_argument);
}

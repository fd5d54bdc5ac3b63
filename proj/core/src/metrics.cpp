#include "diffkit/metrics.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "diffkit/rng.hpp"

namespace diffkit {

namespace {

// Deterministic subsample: first `cap` entries of a partial Fisher-Yates
// shuffle of 0..n-1. `stream` keeps the two arguments independent.
Eigen::MatrixXd subsample_rows(const Eigen::MatrixXd& x, std::uint64_t stream) {
    const Eigen::Index n = x.rows();
    if (n <= kEnergySubsampleCap) return x;
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    std::mt19937_64 eng(derive_stream(kEnergySubsampleSeed, stream));
    Eigen::MatrixXd out(kEnergySubsampleCap, x.cols());
    for (Eigen::Index i = 0; i < kEnergySubsampleCap; ++i) {
        const auto span = static_cast<std::uint64_t>(n - i);
        const auto j = i + static_cast<Eigen::Index>(eng() % span);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        out.row(i) = x.row(idx[static_cast<std::size_t>(i)]);
    }
    return out;
}

// Mean pairwise distance across two sets; per-row sums in double, rows
// accumulated in long double.
long double mean_cross_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    long double total = 0.0L;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double row_sum = 0.0;
        const auto xi = x.row(i);
        for (Eigen::Index j = 0; j < y.rows(); ++j) row_sum += (xi - y.row(j)).norm();
        total += row_sum;
    }
    return total / (static_cast<long double>(x.rows()) * static_cast<long double>(y.rows()));
}

// Within-set mean under the V-statistic (n^2 denominator, zero diagonal).
long double mean_within_distance(const Eigen::MatrixXd& x) {
    long double total = 0.0L;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double row_sum = 0.0;
        const auto xi = x.row(i);
        for (Eigen::Index j = i + 1; j < x.rows(); ++j) row_sum += (xi - x.row(j)).norm();
        total += row_sum;
    }
    return 2.0L * total / (static_cast<long double>(x.rows()) * static_cast<long double>(x.rows()));
}

// Canonical ordering (larger set first, ties broken by content) makes the
// result exactly symmetric in the arguments.
bool canonical_order_ok(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows()) return a.rows() > b.rows();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (a(i, j) < b(i, j)) return true;
            if (a(i, j) > b(i, j)) return false;
        }
    return true;  // identical content
}

}  // namespace

double energy_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    require(a.rows() > 0 && b.rows() > 0, "energy_distance: empty sample set");
    require(a.cols() == b.cols(), "energy_distance: dimension mismatch");
    if (a.rows() == b.rows() && a == b) return 0.0;

    const bool keep = canonical_order_ok(a, b);
    const Eigen::MatrixXd x = subsample_rows(keep ? a : b, 0);
    const Eigen::MatrixXd y = subsample_rows(keep ? b : a, 1);

    const long double ed =
        2.0L * mean_cross_distance(x, y) - mean_within_distance(x) - mean_within_distance(y);
    return static_cast<double>(ed);
}

MomentReport moment_report(const Eigen::MatrixXd& samples, const DataLaw& target) {
    const Eigen::Index n = samples.rows();
    require(n >= 1, "moment_report: need at least one sample");
    require(samples.cols() == law_dim(target), "moment_report: dimension mismatch");

    MomentReport rep;
    const StateVector mean = samples.colwise().mean().transpose();
    rep.mean_error = (mean - law_mean(target)).norm();

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(samples.cols(), samples.cols());
    if (n == 1) {
        rep.low_n = true;
    } else {
        const Eigen::MatrixXd centered = samples.rowwise() - mean.transpose();
        cov = centered.transpose() * centered / static_cast<double>(n - 1);
    }
    rep.cov_error = (cov - law_cov(target)).cwiseAbs().maxCoeff();
    return rep;
}

}  // namespace diffkit

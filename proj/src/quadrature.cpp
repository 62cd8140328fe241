#include "obounds/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>
#include <Eigen/Eigenvalues>

#include "obounds/errors.hpp"

namespace obounds {

void validate_quadrature(const QuadratureSpec& quad) {
    if (quad.nodes < 32) throw Error(Errc::BadInput, "quadrature needs at least 32 nodes");
    if (quad.tol > 1e-10) throw Error(Errc::BadInput, "cutpoint tolerance must be <= 1e-10");
}

namespace {

/// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix, weights
/// come from the first component of each eigenvector.
QuadRule golub_welsch(int n, const std::vector<double>& off_diagonal, double weight_total) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) {
        jacobi(i, i + 1) = off_diagonal[i];
        jacobi(i + 1, i) = off_diagonal[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    QuadRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.x[i] = solver.eigenvalues()(i);
        const double v = solver.eigenvectors()(0, i);
        rule.w[i] = weight_total * v * v;
    }
    return rule;
}

const QuadRule& cached_rule(std::map<int, QuadRule>& cache, std::mutex& lock, int n,
                            QuadRule (*build)(int)) {
    std::scoped_lock guard(lock);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build(n)).first;
    return it->second;
}

QuadRule build_hermite(int n) {
    std::vector<double> off(n - 1);
    for (int i = 1; i < n; ++i) off[i - 1] = std::sqrt(i / 2.0);
    return golub_welsch(n, off, std::sqrt(std::numbers::pi));
}

QuadRule build_legendre(int n) {
    std::vector<double> off(n - 1);
    for (int i = 1; i < n; ++i) off[i - 1] = i / std::sqrt(4.0 * i * i - 1.0);
    return golub_welsch(n, off, 2.0);
}

}  // namespace

const QuadRule& gauss_hermite(int n) {
    static std::map<int, QuadRule> cache;
    static std::mutex lock;
    return cached_rule(cache, lock, n, build_hermite);
}

const QuadRule& gauss_legendre(int n) {
    static std::map<int, QuadRule> cache;
    static std::mutex lock;
    return cached_rule(cache, lock, n, build_legendre);
}

double integrate_normal(int nodes, const std::function<double(double)>& f) {
    const QuadRule& rule = gauss_hermite(nodes);
    // E[f(U)] = (1/sqrt(pi)) sum w_i f(sqrt(2) x_i) for U ~ N(0,1).
    double sum = 0.0;
    for (int i = 0; i < nodes; ++i) {
        sum += rule.w[i] * f(std::numbers::sqrt2 * rule.x[i]);
    }
    return sum / std::sqrt(std::numbers::pi);
}

double integrate_normal_segment(int nodes, double a, double b,
                                const std::function<double(double)>& f) {
    if (!(a < b)) return 0.0;
    const QuadRule& rule = gauss_legendre(nodes);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < nodes; ++i) {
        const double u = mid + half * rule.x[i];
        sum += rule.w[i] * norm_pdf(u) * f(u);
    }
    return half * sum;
}

double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw Error(Errc::BadInput, "quantile argument must lie strictly in (0,1)");
    }
    return std::numbers::sqrt2 * boost::math::erf_inv(2.0 * p - 1.0);
}

double bisect_increasing(const std::function<double(double)>& f, double target,
                         double lo, double hi, double tol) {
    double f_lo = f(lo) - target;
    double f_hi = f(hi) - target;
    if (f_lo > 0.0 || f_hi < 0.0) {
        throw Error(Errc::ConvergenceFailure, "bisection bracket does not straddle the target");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // interval at floating resolution
        if (f(mid) - target < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace obounds

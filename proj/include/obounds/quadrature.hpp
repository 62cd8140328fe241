#pragma once

#include <functional>
#include <vector>

namespace obounds {

/// Quadrature configuration for the latent-normal integrals. nodes >= 32,
/// tol <= 1e-10 (cutpoint root-finding).
struct QuadratureSpec {
    int nodes = 64;
    double tol = 1e-12;
};

void validate_quadrature(const QuadratureSpec& quad);

struct QuadRule {
    std::vector<double> x;
    std::vector<double> w;
};

/// Nodes/weights for integrals against exp(-x^2) (Golub-Welsch).
const QuadRule& gauss_hermite(int n);

/// Nodes/weights on [-1, 1]; rescale for arbitrary intervals.
const QuadRule& gauss_legendre(int n);

/// integral of f against the standard normal density over the whole line.
double integrate_normal(int nodes, const std::function<double(double)>& f);

/// integral of f(u) * phi(u) du over [a, b] with Gauss-Legendre.
double integrate_normal_segment(int nodes, double a, double b,
                                const std::function<double(double)>& f);

double norm_pdf(double x);
double norm_cdf(double x);
double norm_quantile(double p);

/// Bisection for an increasing function; throws ConvergenceFailure when the
/// bracket does not straddle the target.
double bisect_increasing(const std::function<double(double)>& f, double target,
                         double lo, double hi, double tol);

}  // namespace obounds

#include "inls/riesz.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>

namespace inls {

namespace {

using boost::math::quadrature::gauss_kronrod;

// Contribution of the cell [a, b] around a node at r:
// |S^{N-1}| * int_a^b rho^{N-1} angular_average(r, rho) d rho.
double cell_integral(int N, double beta, double r, double a, double b) {
    auto f = [&](double rho) { return std::pow(rho, N - 1) * angular_average(N, beta, r, rho); };
    // The integrand is weakly singular (or only continuous) at rho = r, which
    // sits at an endpoint of each half; tanh-sinh converges fast on such ends.
    static thread_local boost::math::quadrature::tanh_sinh<double> ts;
    const double left = ts.integrate(f, a, r, 1e-9);
    const double right = ts.integrate(f, r, b, 1e-9);
    return unit_sphere_area(N) * (left + right);
}

}  // namespace

double riesz_constant(int N, double alpha) {
    return std::tgamma((N - alpha) / 2.0) /
           (std::tgamma(alpha / 2.0) * std::pow(std::numbers::pi, N / 2.0) * std::pow(2.0, alpha));
}

double angular_average(int N, double beta, double r, double rho) {
    // With t = cos(angle) and u = 1 - t:
    //   |x - y|^2 = d + k u,   d = (r - rho)^2,   k = 2 r rho,
    // and the average is  ratio * int_0^2 (d + k u)^{beta/2} (u (2 - u))^{(N-3)/2} du.
    // Substituting u = u0 (e^x - 1), u0 = d / k, turns d + k u into d e^x and
    // removes the near-singularity at u = 0 when rho is close to r.
    const double ratio = unit_sphere_area(N - 1) / unit_sphere_area(N);
    const double d = (r - rho) * (r - rho);
    const double k = 2.0 * r * rho;
    const double half_n3 = 0.5 * (N - 3);
    if (d == 0.0) {
        // Only reachable for beta > -1 in practice; integrate directly.
        auto f = [&](double u) { return std::pow(k * u, 0.5 * beta) * std::pow(u * (2.0 - u), half_n3); };
        return ratio * gauss_kronrod<double, 31>::integrate(f, 0.0, 2.0, 15, 1e-13);
    }
    const double u0 = d / k;
    const double growth = 0.5 * beta + 1.0;
    // Near part u in [0, 1] in the x variable; the integrand is close to a
    // single exponential there, so a few Kronrod panels suffice.
    const double x1 = std::log1p(1.0 / u0);
    auto near = [&](double x) {
        const double u = u0 * std::expm1(x);
        const double shape = half_n3 == 0.0 ? 1.0 : std::pow(u * (2.0 - u), half_n3);
        return std::exp(growth * x) * shape;
    };
    const double near_part = std::pow(d, 0.5 * beta) * u0 * gauss_kronrod<double, 15>::integrate(near, 0.0, x1, 10, 1e-9);
    // Far part u in [1, 2]: |x - y|^2 >= k there, smooth apart from the
    // (2 - u)^{(N-3)/2} endpoint factor.
    auto far = [&](double u) { return std::pow(d + k * u, 0.5 * beta) * std::pow(u * (2.0 - u), half_n3); };
    double far_part = 0.0;
    if (N % 2 == 1) {
        far_part = gauss_kronrod<double, 15>::integrate(far, 1.0, 2.0, 10, 1e-9);
    } else {
        static thread_local boost::math::quadrature::tanh_sinh<double> ts;
        far_part = ts.integrate(far, 1.0, 2.0, 1e-10);
    }
    return ratio * (near_part + far_part);
}

RieszKernel::RieszKernel(GridPtr grid, double alpha, kernels::Exec exec) : grid_(std::move(grid)), alpha_(alpha) {
    const Grid& g = *grid_;
    if (!(alpha > 0.0 && alpha < g.N)) throw AlphaOutOfRange("Riesz order must satisfy 0 < alpha < N");
    const int M = g.M;
    const int N = g.N;
    const double beta = alpha - N;
    const double c = riesz_constant(N, alpha);

    // Symmetric part S(i, j) = c a(r_i, r_j) off the diagonal; the diagonal
    // carries the cell integral divided by w_i. Then G = S diag(w).
    kernels::RowMatrix S(M, M);
    kernels::fill_symmetric(
        S,
        [&](int i, int j) {
            if (i != j) return c * angular_average(N, beta, g.r[i], g.r[j]);
            const double a = g.r[i] - 0.5 * g.dr, b = g.r[i] + 0.5 * g.dr;
            return c * cell_integral(N, beta, g.r[i], a, b) / g.w[i];
        },
        exec);
    G_ = S * g.w.asDiagonal();
}

Eigen::VectorXd RieszKernel::apply(const Eigen::VectorXd& g, kernels::Exec exec) const {
    Eigen::VectorXd out;
    kernels::matvec(G_, g, out, exec);
    return out;
}

}  // namespace inls

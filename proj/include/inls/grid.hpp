#pragma once

#include <Eigen/Dense>

#include <memory>
#include <stdexcept>

namespace inls {

class InvalidResolution : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Cell-centred radial grid on (0, r_max): r_j = (j + 1/2) dr, weights
/// w_j = |S^{N-1}| r_j^{N-1} dr.
///
/// `face(k)` is the flux coefficient on the face r = k dr (k = 0..M). It is
/// fixed by requiring the discrete Laplacian to be exact on r^2, which with the
/// weights above makes the operator self-adjoint in <f,g>_w and consistent
/// down to the first cell.
struct Grid {
    int M = 0;
    double r_max = 0.0;
    int N = 0;
    double dr = 0.0;
    double sphere_area = 0.0;
    Eigen::VectorXd r;
    Eigen::VectorXd w;
    Eigen::VectorXd face;
    Eigen::VectorXd inv_scale;  ///< 1 / (dr^2 r_j^{N-1})
};

using GridPtr = std::shared_ptr<const Grid>;

/// Throws InvalidResolution unless M >= 16 and r_max > 0.
GridPtr make_grid(int M, double r_max, int N);

double unit_sphere_area(int N);

/// Complex radial profile sampled on a grid.
struct RadialField {
    GridPtr grid;
    Eigen::VectorXcd values;

    RadialField() = default;
    RadialField(GridPtr g, Eigen::VectorXcd v);
    static RadialField zeros(GridPtr g);
    bool finite() const { return values.allFinite(); }
};

/// Sum_j w_j g_j.
template <class Vec>
auto integrate(const Grid& g, const Vec& values) {
    return (g.w.array() * values.array()).sum();
}

/// <f, g>_w = sum_j w_j f_j conj(g_j), real part.
double inner(const Grid& g, const Eigen::VectorXcd& f, const Eigen::VectorXcd& h);

/// Radial Laplacian, 3-point flux form. Even reflection at the origin, zero
/// Dirichlet at r_max (antisymmetric ghost cell).
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> laplacian(const Grid& g, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f) {
    const int M = g.M;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(M);
    Scalar flux_in = Scalar(0);
    for (int j = 0; j < M; ++j) {
        const Scalar next = j + 1 < M ? f[j + 1] : -f[j];
        const Scalar flux_out = g.face[j + 1] * (next - f[j]);
        out[j] = (flux_out - flux_in) * g.inv_scale[j];
        flux_in = flux_out;
    }
    return out;
}

/// Centred first derivative at the nodes with the same ghost cells.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> radial_derivative(const Grid& g,
                                                           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f) {
    const int M = g.M;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(M);
    const double inv = 0.5 / g.dr;
    for (int j = 0; j < M; ++j) {
        const Scalar prev = j > 0 ? f[j - 1] : f[0];
        const Scalar next = j + 1 < M ? f[j + 1] : -f[j];
        out[j] = (next - prev) * inv;
    }
    return out;
}

/// ||grad f||^2 by quadrature of face differences (f_{k} - f_{k-1}) / dr with
/// face weights |S^{N-1}| face(k) dr (half weight on the boundary face).
double gradient_norm_sq(const Grid& g, const Eigen::VectorXcd& f);

RadialField apply_laplacian(const RadialField& f);

/// Dense evaluation of a scalar profile on the grid nodes.
template <class Fn>
Eigen::VectorXcd sample(const Grid& g, Fn&& fn) {
    Eigen::VectorXcd out(g.M);
    for (int j = 0; j < g.M; ++j) out[j] = fn(g.r[j]);
    return out;
}

}  // namespace inls

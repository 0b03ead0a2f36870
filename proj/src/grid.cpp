#include "inls/grid.hpp"

#include <cmath>
#include <numbers>

namespace inls {

double unit_sphere_area(int N) {
    return 2.0 * std::pow(std::numbers::pi, N / 2.0) / std::tgamma(N / 2.0);
}

GridPtr make_grid(int M, double r_max, int N) {
    if (M < 16) throw InvalidResolution("grid needs M >= 16 cells, got " + std::to_string(M));
    if (!(r_max > 0.0) || !std::isfinite(r_max)) throw InvalidResolution("grid needs r_max > 0");
    if (N < 1) throw InvalidResolution("dimension must be positive");

    auto g = std::make_shared<Grid>();
    g->M = M;
    g->r_max = r_max;
    g->N = N;
    g->dr = r_max / M;
    g->sphere_area = unit_sphere_area(N);
    g->r.resize(M);
    g->w.resize(M);
    g->inv_scale.resize(M);
    g->face.setZero(M + 1);

    const double h = g->dr;
    double cumulative = 0.0;  // h * sum_{k<=j} r_k^{N-1}
    for (int j = 0; j < M; ++j) {
        const double rj = (j + 0.5) * h;
        const double rn1 = std::pow(rj, N - 1);
        g->r[j] = rj;
        g->w[j] = g->sphere_area * rn1 * h;
        g->inv_scale[j] = 1.0 / (h * h * rn1);
        cumulative += h * rn1;
        g->face[j + 1] = N * cumulative / ((j + 1) * h);
    }
    return g;
}

RadialField::RadialField(GridPtr g, Eigen::VectorXcd v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid->M) throw std::invalid_argument("field length does not match grid");
}

RadialField RadialField::zeros(GridPtr g) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(g->M);
    return RadialField(std::move(g), std::move(v));
}

double inner(const Grid& g, const Eigen::VectorXcd& f, const Eigen::VectorXcd& h) {
    double acc = 0.0;
    for (int j = 0; j < g.M; ++j) acc += g.w[j] * (f[j] * std::conj(h[j])).real();
    return acc;
}

double gradient_norm_sq(const Grid& g, const Eigen::VectorXcd& f) {
    const int M = g.M;
    const double h = g.dr;
    double acc = 0.0;
    for (int k = 1; k < M; ++k) acc += g.face[k] * h * std::norm((f[k] - f[k - 1]) / h);
    acc += 0.5 * g.face[M] * h * std::norm(-2.0 * f[M - 1] / h);
    return g.sphere_area * acc;
}

RadialField apply_laplacian(const RadialField& f) {
    return RadialField(f.grid, laplacian<std::complex<double>>(*f.grid, f.values));
}

}  // namespace inls

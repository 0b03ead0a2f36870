#pragma once

#include "inls/functionals.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace inls {

class NonConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Degenerate : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GroundStateOptions {
    double tol = 1e-10;         ///< stop when the relative residual drops below this
    double accept_tol = 1e-8;   ///< a residual stuck at the rounding floor is accepted below this
    int max_iter = 10000;
    int levels = 3;             ///< grids M, 2M, 4M, ... used for the certificate extrapolation (1 = none)
    bool extended = true;       ///< iterate on the solve grid in long double
    double relaxation = 0.7;    ///< under-relaxation applied once oscillation is detected
};

/// Mass, kinetic and potential values together with the derived certificate
/// quantities. Pohozaev defects are |P - (2p/A) M| / P and |P - (2p/B) kin| / P.
struct CertificateValues {
    double mass = 0.0;
    double kinetic = 0.0;
    double potential = 0.0;
    double energy = 0.0;
    double action = 0.0;
    double pohozaev_defect_1 = 0.0;
    double pohozaev_defect_2 = 0.0;
    double nehari_defect = 0.0;  ///< |kin + mass - P| / P
};

CertificateValues certificate_values(const DerivedExponents& e, double mass, double kinetic, double potential);

struct GroundState {
    RadialField field;
    ProblemSpec spec;
    DerivedExponents exps;
    double residual = 0.0;         ///< of the iterate the solver converged (long double when extended)
    double residual_double = 0.0;  ///< of `field`, i.e. after rounding to double
    int iterations = 0;
    bool relaxed = false;
    bool structural_ok = false;  ///< real, positive, unimodal
    std::string note;            ///< reason when structural_ok is false

    /// Values on the solve grid. These are what every comparison against a
    /// field on the same grid uses.
    CertificateValues grid;

    /// Values extrapolated to dr -> 0 from the solves on M, 2M, 4M, ...,
    /// removing the error terms dr^q for q in `exponents`.
    std::optional<CertificateValues> extrapolated;
    std::vector<int> level_M;
    std::vector<CertificateValues> level_values;
    std::vector<double> level_residuals;
    std::vector<double> exponents;

    /// Defects entering the certificate: extrapolated when available.
    double pohozaev_defect_1() const;
    double pohozaev_defect_2() const;
    /// Mass used in the closed-form constants (extrapolated when available).
    double reference_mass() const;

    double sharp_constant = 0.0;
    std::string status() const;
};

/// Leading powers of dr in the discretization error of mass, kinetic and
/// potential values of the ground state, smallest first: 2 for the stencil and
/// quadrature, N - tau (Choquard) or N - 2tau (local) from the singular weight,
/// N - 2 + 2 gamma from the r^gamma behaviour at the origin when lambda > 0, and 4.
std::vector<double> error_exponents(const ProblemSpec& spec);

/// Generalized Petviashvili iteration for K phi + phi = NL(phi).
GroundState solve_ground_state(const Model& model, const std::optional<RadialField>& init = std::nullopt,
                               const GroundStateOptions& options = {});

/// (2p/A)(A/B)^{B/2} M^{-(p-1)} with the local analogue for q.
double sharp_constant(const GroundState& gs);
double sharp_constant(const DerivedExponents& e, double mass);

/// S[phi] on the solve grid, the stand-in for the potential-well threshold.
double threshold_m(const GroundState& gs);

/// ||K phi + phi - NL(phi)||_w / ||phi||_w.
double ground_state_residual(const Model& model, const Eigen::VectorXd& phi);

/// Weinstein quotient P / (M^{A/2} kin^{B/2}).
double weinstein_quotient(const Model& model, const Eigen::VectorXcd& u);

/// Projected gradient ascent on the logarithm of the Weinstein quotient,
/// starting from `start`. Returns the best quotient reached.
double weinstein_ascent(const Model& model, Eigen::VectorXd start, int iterations);

}  // namespace inls

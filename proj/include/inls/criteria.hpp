#pragma once

#include "inls/evolution.hpp"
#include "inls/ground_state.hpp"

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace inls {

class SpecMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};
class NoBlowupVerdict : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class DegenerateFit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class RescaleFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Prediction { BlowUp, NoPrediction };
std::string to_string(Prediction p);

/// Verdict of a datum against the two sufficient blow-up conditions. The
/// threshold m is replaced by m_hat = S[phi]; any verdict relying on it is
/// conditional on m = S[phi].
struct Classification {
    double virial = 0.0;
    int virial_sign = 0;
    double action = 0.0;
    double m_hat = 0.0;
    double action_vs_m = 0.0;  ///< S[u0] - m_hat
    bool in_A_minus = false;
    double MG = 0.0;
    double ME = 0.0;
    bool condition_ss = false;
    bool condition_t13 = false;
    Prediction predicted = Prediction::NoPrediction;
    std::string note;
};

/// MG = (||u|| / ||phi||)^{alpha_c} (||sqrt K u|| / ||sqrt K phi||).
double scale_invariant_gradient(const GroundState& gs, double mass, double kinetic);
/// ME = (M[u] / M[phi])^{alpha_c} (E[u] / E[phi]).
double scale_invariant_energy(const GroundState& gs, double mass, double energy);

Classification classify(const Model& model, const Eigen::VectorXcd& u0, const GroundState& gs);

/// Lower bound on kinetic forced by I < 0 through the sharp inequality
/// P <= C M^{A/2} kin^{B/2}: kin > (2p / (B C M^{A/2}))^{2/(B-2)}.
double kinetic_lower_bound(const DerivedExponents& e, double sharp_constant, double mass);

struct CoercivityReport {
    double epsilon_star = 0.0;
    bool boundary_case = false;
    std::string message;
    bool ss_data = false;
    bool t13_data = false;
    size_t samples = 0;
    size_t a_minus_violations = 0;
    size_t ss_inequality_violations = 0;
    size_t mg_violations = 0;
    size_t kinetic_lower_violations = 0;
    double min_kinetic_ratio = 0.0;  ///< min over I < 0 samples of kin / kinetic_lower
};

CoercivityReport coercivity_monitor(const Model& model, const Trajectory& traj, const GroundState& gs);

struct OdiReport {
    double window_start = 0.0;
    double window_end = 0.0;
    double kappa = 2.0;
    double c_lower = 0.0;
    double t_star_bound = 0.0;
    double monotone_fraction = 0.0;
    bool kappa_inferred = false;  ///< s = 2 local: exponent taken by analogy
};

/// Fit of f' >= c f^kappa on the final third of the samples. When `fprime`
/// is empty it is formed by second-order central differences.
OdiReport odi_fit(const std::vector<double>& t, const std::vector<double>& f, std::vector<double> fprime, double kappa);

/// Uses f = int_0^t kinetic and f' = kinetic, kappa = 2 (s = 1) or 4 (s = 2).
OdiReport odi_fit(const Trajectory& traj, const ProblemSpec& spec);

/// Positive radial Gaussian mixture sum_k a_k exp(-b_k r^2), resampled
/// analytically under u -> rho^{N/2} u(rho .).
struct GaussianMixture {
    std::vector<double> amplitude;
    std::vector<double> rate;

    static GaussianMixture random(std::mt19937_64& rng, int terms = 3, double min_rate = 0.3, double max_rate = 2.0);
    Eigen::VectorXcd sample(const Grid& g) const;
    GaussianMixture scaled(double rho, int N) const;
};

enum class DatumKind { ScaledGroundState, NehariRescaled, Custom };
DatumKind datum_kind_from_string(const std::string& name);

struct DatumSpec {
    DatumKind kind = DatumKind::ScaledGroundState;
    double c = 1.0;
    std::uint64_t seed = 0;
    std::string file;
};

/// Amplitude a > 0 with I[a u] = 0: a^{2p-2} = 2p kin / (B P).
RadialField nehari_rescale(const Model& model, const RadialField& u);

RadialField build_datum(const DatumSpec& datum, const Model& model, const GroundState* gs);

}  // namespace inls

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace inls {

/// A real parameter that remembers the decimal text it was given in, so range
/// checks can be done exactly on the rational value of that text.
class Decimal {
public:
    Decimal() : Decimal("0") {}
    explicit Decimal(std::string_view text);
    Decimal(const char* text) : Decimal(std::string_view(text)) {}
    static Decimal from_double(double value);

    double value() const { return value_; }
    const std::string& text() const { return text_; }

private:
    std::string text_;
    double value_ = 0.0;
};

enum class Nonlinearity { Choquard, Local };

std::string to_string(Nonlinearity kind);
Nonlinearity nonlinearity_from_string(std::string_view name);

/// Parameter tuple of the focusing problem i u_t = K_{s,lambda} u - F(x,u).
///
/// `power` is p for the Choquard source |x|^{-tau}|u|^{p-2}(J_alpha*|.|^{-tau}|u|^p)u
/// and q for the local source |x|^{-2tau}|u|^{2(q-1)}u. `alpha` is ignored for
/// the local source, `lambda` is ignored when s = 2.
struct ProblemSpec {
    int s = 1;
    int N = 3;
    Decimal lambda{"0"};
    Decimal tau{"0.5"};
    Nonlinearity kind = Nonlinearity::Choquard;
    Decimal alpha{"2"};
    Decimal power{"2.1"};

    /// Coupling actually used by the operator (0 when s = 2).
    double effective_lambda() const { return s == 1 ? lambda.value() : 0.0; }
    bool choquard() const { return kind == Nonlinearity::Choquard; }
};

enum class SpecErrorKind { HardyViolation, DimensionTooSmall, RangeViolation, CndViolation };

std::string to_string(SpecErrorKind kind);

class SpecError : public std::runtime_error {
public:
    SpecError(SpecErrorKind kind, const std::string& what)
        : std::runtime_error(to_string(kind) + ": " + what), kind_(kind) {}
    SpecErrorKind kind() const { return kind_; }

private:
    SpecErrorKind kind_;
};

/// Full: every hypothesis of the blow-up theorems holds. EvolutionRestricted:
/// -(N-2)^2/4 < lambda < 0, functionals may be evaluated but no evolution runs.
enum class Tier { Full, EvolutionRestricted };

std::string to_string(Tier tier);

struct Validation {
    ProblemSpec spec;
    Tier tier = Tier::Full;
    double b_upper_theorem = 0.0;  ///< upper bound on B (or B') implied by the theorem hypotheses
    double b_upper_section = 0.0;  ///< upper bound used by the matching proof section
    bool bound_discrepancy = false;
    std::vector<std::string> warnings;
};

/// Throws SpecError naming the violated inequality.
Validation validate_spec(const ProblemSpec& raw);

/// Throws SpecError unless the spec is valid and in the Full tier.
void require_evolution_tier(const Validation& v);

struct DerivedExponents {
    double B = 0.0;          ///< B or B'
    double A = 0.0;          ///< 2p - B or 2q - B'
    double crit_low = 0.0;   ///< mass-critical power p_c or q_c
    double crit_high = 0.0;  ///< energy-critical power p^c or q^c
    double s_c = 0.0;
    double alpha_c = 0.0;    ///< s / s_c - 1
    double power = 0.0;      ///< p or q
};

DerivedExponents derive_exponents(const ProblemSpec& spec);

/// Critical regularity as a function of the power, other parameters fixed.
double critical_regularity(const ProblemSpec& spec, double power);

}  // namespace inls

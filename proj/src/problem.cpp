#include "inls/problem.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace inls {

namespace {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Parses [+-]digits[.digits][(e|E)[+-]digits] into an exact rational.
Rational parse_decimal(std::string_view text) {
    std::size_t i = 0;
    bool negative = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
        negative = text[i] == '-';
        ++i;
    }
    BigInt digits = 0;
    int frac_digits = 0;
    bool any_digit = false;
    bool in_fraction = false;
    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits = digits * 10 + (c - '0');
            any_digit = true;
            if (in_fraction) ++frac_digits;
        } else if (c == '.' && !in_fraction) {
            in_fraction = true;
        } else {
            break;
        }
    }
    if (!any_digit) throw std::invalid_argument("not a decimal number: '" + std::string(text) + "'");
    long exponent = 0;
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        const char* first = text.data() + i;
        if (i < text.size() && text[i] == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), exponent);
        if (ec != std::errc() || ptr != text.data() + text.size())
            throw std::invalid_argument("bad exponent in '" + std::string(text) + "'");
        i = text.size();
    }
    if (i != text.size()) throw std::invalid_argument("trailing characters in '" + std::string(text) + "'");
    exponent -= frac_digits;
    Rational value(digits);
    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::labs(exponent)));
    value = exponent >= 0 ? Rational(value * scale) : Rational(value / scale);
    return negative ? -value : value;
}

Rational exact(const Decimal& d) { return parse_decimal(d.text()); }

std::string show(const Rational& q) {
    std::ostringstream os;
    os << static_cast<double>(q);
    return os.str();
}

void require(bool ok, SpecErrorKind kind, const std::string& what) {
    if (!ok) throw SpecError(kind, what);
}

}  // namespace

Decimal::Decimal(std::string_view text) : text_(text) {
    value_ = static_cast<double>(parse_decimal(text));
}

Decimal Decimal::from_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return Decimal(std::string_view(buf, static_cast<std::size_t>(ptr - buf)));
}

std::string to_string(Nonlinearity kind) { return kind == Nonlinearity::Choquard ? "choquard" : "local"; }

Nonlinearity nonlinearity_from_string(std::string_view name) {
    if (name == "choquard") return Nonlinearity::Choquard;
    if (name == "local") return Nonlinearity::Local;
    throw std::invalid_argument("unknown nonlinearity '" + std::string(name) + "'");
}

std::string to_string(SpecErrorKind kind) {
    switch (kind) {
        case SpecErrorKind::HardyViolation: return "HardyViolation";
        case SpecErrorKind::DimensionTooSmall: return "DimensionTooSmall";
        case SpecErrorKind::RangeViolation: return "RangeViolation";
        case SpecErrorKind::CndViolation: return "CndViolation";
    }
    return "SpecError";
}

std::string to_string(Tier tier) { return tier == Tier::Full ? "full" : "evolution-restricted"; }

Validation validate_spec(const ProblemSpec& raw) {
    Validation out;
    out.spec = raw;
    const int s = raw.s;
    const int N = raw.N;
    require(s == 1 || s == 2, SpecErrorKind::RangeViolation, "s must be 1 or 2, got " + std::to_string(s));
    require(N > 2 * s, SpecErrorKind::DimensionTooSmall,
            "N > 2s fails: N=" + std::to_string(N) + ", s=" + std::to_string(s));

    const Rational tau = exact(raw.tau);
    const Rational power = exact(raw.power);

    if (s == 1) {
        const Rational lambda = exact(raw.lambda);
        const Rational hardy = -Rational((N - 2) * (N - 2), 4);
        require(lambda > hardy, SpecErrorKind::HardyViolation,
                "lambda > -(N-2)^2/4 fails: lambda=" + raw.lambda.text() + ", -(N-2)^2/4=" + show(hardy));
        if (lambda < 0) {
            out.tier = Tier::EvolutionRestricted;
            out.warnings.push_back("lambda < 0: functionals only, evolution refused");
        }
    } else if (raw.lambda.value() != 0.0) {
        out.warnings.push_back("lambda is ignored for s = 2 (K_{2,lambda} is the bi-Laplacian)");
    }

    if (raw.choquard()) {
        const Rational alpha = exact(raw.alpha);
        require(tau > 0, SpecErrorKind::CndViolation, "tau > 0 fails");
        require(alpha > 0, SpecErrorKind::CndViolation, "alpha > 0 fails");
        require(N - alpha > 0, SpecErrorKind::CndViolation, "N - alpha > 0 fails");
        require(N - tau > 0, SpecErrorKind::CndViolation, "N - tau > 0 fails");
        require(2 - 2 * tau + alpha > 0, SpecErrorKind::CndViolation, "2 - 2tau + alpha > 0 fails");
        require(tau < Rational(s) * (alpha + N) / N, SpecErrorKind::RangeViolation,
                "tau < s(alpha+N)/N fails");

        const Rational p_low = 1 + (2 * s - 2 * tau + alpha) / N;
        const Rational p_high = 1 + (2 * s - 2 * tau + alpha) / (N - 2 * s);
        const Rational p_lo2 = p_low > 2 ? p_low : Rational(2);
        require(power > p_lo2, SpecErrorKind::RangeViolation,
                "p > max{2, p_c} fails: p=" + raw.power.text() + ", max{2,p_c}=" + show(p_lo2));
        require(power < p_high, SpecErrorKind::RangeViolation,
                "p < p^c fails: p=" + raw.power.text() + ", p^c=" + show(p_high));
        const Rational p_cap = 1 + (2 * s + alpha - tau) / N;
        require(power <= p_cap, SpecErrorKind::RangeViolation,
                "p <= 1 + (2s+alpha-tau)/N fails: p=" + raw.power.text() + ", bound=" + show(p_cap));
        out.b_upper_theorem = static_cast<double>(2 + tau / s);
        out.b_upper_section = out.b_upper_theorem;
    } else {
        require(tau > 0 && tau < 2, SpecErrorKind::RangeViolation, "0 < tau < 2 fails");
        if (s == 1) require(tau < 1, SpecErrorKind::RangeViolation, "tau < 1 fails (s = 1 local well-posedness)");
        const Rational q_low = 1 + (2 * s - 2 * tau) / N;
        const Rational q_high = 1 + (2 * s - 2 * tau) / (N - 2 * s);
        require(power > q_low, SpecErrorKind::RangeViolation,
                "q > q_c fails: q=" + raw.power.text() + ", q_c=" + show(q_low));
        require(power < q_high, SpecErrorKind::RangeViolation,
                "q < q^c fails: q=" + raw.power.text() + ", q^c=" + show(q_high));
        const Rational q_cap = 1 + (2 * s + 2 * tau * (s - 1)) / N;
        require(power <= q_cap, SpecErrorKind::RangeViolation,
                "q <= 1 + (2s+2tau(s-1))/N fails: q=" + raw.power.text() + ", bound=" + show(q_cap));
        if (s == 2) {
            const Rational q_wp = 1 + (1 - 2 * tau) / N;
            require(power > q_wp, SpecErrorKind::RangeViolation,
                    "q > 1 + (1-2tau)/N fails (s = 2 local well-posedness)");
        }
        // Hypothesis bound: B' <= 2 + 2tau for both s. The s = 2 tail estimate needs B' <= 2 + tau.
        const Rational b_prime = (N * power - N + 2 * tau) / s;
        const Rational section_cap = s == 1 ? Rational(2 + 2 * tau) : Rational(2 + tau);
        require(b_prime <= section_cap, SpecErrorKind::RangeViolation,
                "B' <= " + show(section_cap) + " fails (bound used by the s=" + std::to_string(s) + " proof)");
        out.b_upper_theorem = static_cast<double>(2 + 2 * tau);
        out.b_upper_section = static_cast<double>(section_cap);
    }
    out.bound_discrepancy = out.b_upper_theorem != out.b_upper_section;
    if (out.bound_discrepancy)
        out.warnings.push_back("B' upper bound differs between theorem statement and proof section");
    return out;
}

void require_evolution_tier(const Validation& v) {
    if (v.tier != Tier::Full)
        throw SpecError(SpecErrorKind::HardyViolation,
                        "evolution requires lambda >= 0 (spec is evolution-restricted)");
}

double critical_regularity(const ProblemSpec& spec, double power) {
    const double N = spec.N, s = spec.s, tau = spec.tau.value();
    if (spec.choquard()) return N / 2.0 - (2 * s - 2 * tau + spec.alpha.value()) / (2.0 * (power - 1.0));
    return N / 2.0 - (s - tau) / (power - 1.0);
}

DerivedExponents derive_exponents(const ProblemSpec& spec) {
    DerivedExponents e;
    const double N = spec.N, s = spec.s, tau = spec.tau.value();
    e.power = spec.power.value();
    if (spec.choquard()) {
        const double alpha = spec.alpha.value();
        e.B = (N * e.power - N - alpha + 2 * tau) / s;
        e.crit_low = 1 + (2 * s - 2 * tau + alpha) / N;
        e.crit_high = 1 + (2 * s - 2 * tau + alpha) / (N - 2 * s);
    } else {
        e.B = (N * e.power - N + 2 * tau) / s;
        e.crit_low = 1 + (2 * s - 2 * tau) / N;
        e.crit_high = 1 + (2 * s - 2 * tau) / (N - 2 * s);
    }
    e.A = 2 * e.power - e.B;
    e.s_c = critical_regularity(spec, e.power);
    e.alpha_c = e.s_c != 0.0 ? s / e.s_c - 1.0 : std::numeric_limits<double>::infinity();
    return e;
}

}  // namespace inls

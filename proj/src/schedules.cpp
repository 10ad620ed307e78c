/*
 * Copyright 2026 The reg-descent Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "regdescent/schedules.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace regdescent
{

namespace
{

__extension__ using Wide = __int128;

std::optional<Rational> make_checked(Wide num, Wide den)
{
    if (den == 0)
    {
        return std::nullopt;
    }
    if (den < 0)
    {
        num = -num;
        den = -den;
    }
    Wide a = num < 0 ? -num : num;
    Wide b = den;
    while (b != 0)
    {
        Wide t = a % b;
        a = b;
        b = t;
    }
    if (a > 1)
    {
        num /= a;
        den /= a;
    }
    constexpr Wide limit = std::numeric_limits<std::int64_t>::max();
    if (num > limit || num < -limit || den > limit)
    {
        return std::nullopt;
    }
    return Rational{static_cast<std::int64_t>(num), static_cast<std::int64_t>(den)};
}

std::optional<std::int64_t> parse_integer(std::string_view text)
{
    std::int64_t value = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+')
    {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
    {
        return std::nullopt;
    }
    return value;
}

std::string_view trim(std::string_view text)
{
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    {
        text.remove_prefix(1);
    }
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    {
        text.remove_suffix(1);
    }
    return text;
}

Exponent frac(std::int64_t num, std::int64_t den)
{
    return Exponent(Rational::make(num, den));
}

std::string format_number(double value)
{
    std::ostringstream out;
    out.precision(6);
    out << value;
    return out.str();
}

void require_positive_constants(const PolynomialSchedule& s, TheoremReport& report)
{
    if (!(s.c_alpha > 0.0))
    {
        report.violated_conditions.emplace_back("C_alpha > 0");
    }
    if (!(s.c_lambda > 0.0))
    {
        report.violated_conditions.emplace_back("C_lambda > 0");
    }
}

double resolve_beta(const PolynomialSchedule& s, const TheoryContext& context, TheoremReport& report)
{
    if (context.beta)
    {
        return *context.beta;
    }
    const double beta = 2.0 * s.q.value() - 1.0 - kDefaultBetaGap;
    report.notes.push_back("beta not supplied; using 2q - 1 - 1e-3 = " + format_number(beta));
    return beta;
}

void check_l2_rate(const PolynomialSchedule& s, TheoremReport& report)
{
    const Exponent zero = frac(0, 1);
    const Exponent one = frac(1, 1);
    const Exponent& p = s.p;
    const Exponent& q = s.q;
    require_positive_constants(s, report);
    if (compare(p, zero) <= 0)
    {
        report.violated_conditions.emplace_back("p > 0");
    }
    if (compare(p, frac(1, 2)) > 0)
    {
        report.violated_conditions.emplace_back("p <= 1/2");
    }
    if (compare(q, p) <= 0)
    {
        report.violated_conditions.emplace_back("q > p");
    }
    const int upper = compare(q, one - p);
    if (upper > 0)
    {
        report.violated_conditions.emplace_back("q <= 1 - p");
    }
    else if (upper == 0 && !(2.0 * s.c_lambda * s.c_alpha > 1.0 - q.value()))
    {
        report.violated_conditions.emplace_back("2 C_lambda C_alpha > 1 - q (required on the boundary q = 1 - p)");
    }
}

void check_as_rate(const PolynomialSchedule& s, double beta, TheoremReport& report)
{
    const Exponent zero = frac(0, 1);
    const Exponent one = frac(1, 1);
    const Exponent& p = s.p;
    const Exponent& q = s.q;
    require_positive_constants(s, report);
    if (compare(p, zero) <= 0)
    {
        report.violated_conditions.emplace_back("p > 0");
    }
    if (compare(p, frac(1, 3)) >= 0)
    {
        report.violated_conditions.emplace_back("p < 1/3");
    }
    if (compare(q, (p + one) / 2) <= 0)
    {
        report.violated_conditions.emplace_back("q > (p + 1)/2");
    }
    if (compare(q, one - p) >= 0)
    {
        report.violated_conditions.emplace_back("q < 1 - p");
    }
    const Exponent b(beta);
    if (compare(b, zero) <= 0)
    {
        report.violated_conditions.emplace_back("beta > 0");
    }
    if (compare(b, frac(2, 1) * q - one) >= 0)
    {
        report.violated_conditions.emplace_back("beta < 2q - 1");
    }
}

void check_det_rate(const PolynomialSchedule& s, const TheoryContext& context, TheoremReport& report)
{
    const Exponent zero = frac(0, 1);
    const Exponent one = frac(1, 1);
    const Exponent& p = s.p;
    const Exponent& q = s.q;
    require_positive_constants(s, report);
    if (compare(p, zero) <= 0)
    {
        report.violated_conditions.emplace_back("p > 0");
    }
    if (compare(p, one) > 0)
    {
        report.violated_conditions.emplace_back("p <= 1");
    }
    if (compare(q, zero) < 0)
    {
        report.violated_conditions.emplace_back("q >= 0");
    }
    if (compare(q, one - p) > 0)
    {
        report.violated_conditions.emplace_back("q <= 1 - p");
    }
    const bool q_zero = compare(q, zero) == 0;
    const double product = 2.0 * s.c_lambda * s.c_alpha;
    if (q_zero)
    {
        if (!context.smoothness)
        {
            report.violated_conditions.emplace_back("smoothness constant L required to check C_alpha < 2/L (q = 0)");
        }
        else
        {
            const double L = *context.smoothness;
            if (!(s.c_alpha < 2.0 / L))
            {
                report.violated_conditions.emplace_back("C_alpha < 2/L (q = 0)");
            }
            if (compare(p, one) == 0 && !(product * (1.0 - L * s.c_alpha / 2.0) > 1.0))
            {
                report.violated_conditions.emplace_back("2 C_lambda C_alpha (1 - L C_alpha/2) > 1 (q = 0, p = 1)");
            }
        }
    }
    if (!q_zero && compare(q, one - p) == 0 && !(product > 1.0 - q.value()))
    {
        report.violated_conditions.emplace_back("2 C_lambda C_alpha > 1 - q (q = 1 - p)");
    }
}

void check_l2_general(const PolynomialSchedule& s, TheoremReport& report)
{
    const Exponent zero = frac(0, 1);
    const Exponent one = frac(1, 1);
    const Exponent& p = s.p;
    const Exponent& q = s.q;
    if (!(s.c_alpha > 0.0))
    {
        report.violated_conditions.emplace_back("C_alpha > 0");
    }
    if (!(s.c_lambda > 0.0) || compare(p, zero) <= 0)
    {
        report.violated_conditions.emplace_back("p > 0 and C_lambda > 0 needed for lambda_k -> 0");
    }
    if (compare(p + q, one) > 0)
    {
        report.violated_conditions.emplace_back("sum alpha_k lambda_k = inf (p + q <= 1)");
    }
    if (compare(q, p) <= 0)
    {
        report.violated_conditions.emplace_back("alpha_k = o(lambda_k) (q > p)");
    }
    if (compare(q, one) >= 0)
    {
        report.violated_conditions.emplace_back("lambda_k - lambda_{k-1} = o(alpha_k lambda_k) (q < 1)");
    }
    report.notes.emplace_back(
        "alternative condition sum alpha_k lambda_k (|x_*|^2 - |x_lambda_k|^2) < inf is "
        "problem-dependent, see oracles viscosity_gap_series");
}

std::optional<double> positive_or_none(double value)
{
    if (!(value > 0.0) || !std::isfinite(value))
    {
        return std::nullopt;
    }
    return std::min(value, 1.0);
}

}  // namespace

Rational Rational::make(std::int64_t num, std::int64_t den)
{
    if (den == 0)
    {
        throw std::invalid_argument("rational with zero denominator");
    }
    auto r = make_checked(num, den);
    return *r;
}

Exponent::Exponent(double value) : value_(value) {}

Exponent::Exponent(Rational exact) : value_(exact.to_double()), exact_(exact) {}

Exponent Exponent::parse(std::string_view text)
{
    text = trim(text);
    if (text.empty())
    {
        throw std::invalid_argument("empty exponent");
    }
    if (const auto slash = text.find('/'); slash != std::string_view::npos)
    {
        const auto num = parse_integer(trim(text.substr(0, slash)));
        const auto den = parse_integer(trim(text.substr(slash + 1)));
        if (!num || !den || *den == 0)
        {
            throw std::invalid_argument("malformed fraction '" + std::string(text) + "'");
        }
        return Exponent(Rational::make(*num, *den));
    }
    if (const auto integer = parse_integer(text))
    {
        return Exponent(Rational::make(*integer, 1));
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value))
    {
        throw std::invalid_argument("malformed exponent '" + std::string(text) + "'");
    }
    return Exponent(value);
}

std::string Exponent::to_string() const
{
    if (exact_)
    {
        if (exact_->den == 1)
        {
            return std::to_string(exact_->num);
        }
        return std::to_string(exact_->num) + "/" + std::to_string(exact_->den);
    }
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value_);
    return std::string(buffer, ptr);
}

Exponent operator+(const Exponent& a, const Exponent& b)
{
    if (a.exact_ && b.exact_)
    {
        if (auto r = make_checked(Wide(a.exact_->num) * b.exact_->den + Wide(b.exact_->num) * a.exact_->den,
                                  Wide(a.exact_->den) * b.exact_->den))
        {
            return Exponent(*r);
        }
    }
    return Exponent(a.value_ + b.value_);
}

Exponent operator-(const Exponent& a, const Exponent& b)
{
    if (a.exact_ && b.exact_)
    {
        if (auto r = make_checked(Wide(a.exact_->num) * b.exact_->den - Wide(b.exact_->num) * a.exact_->den,
                                  Wide(a.exact_->den) * b.exact_->den))
        {
            return Exponent(*r);
        }
    }
    return Exponent(a.value_ - b.value_);
}

Exponent operator*(const Exponent& a, const Exponent& b)
{
    if (a.exact_ && b.exact_)
    {
        if (auto r = make_checked(Wide(a.exact_->num) * b.exact_->num, Wide(a.exact_->den) * b.exact_->den))
        {
            return Exponent(*r);
        }
    }
    return Exponent(a.value_ * b.value_);
}

Exponent operator/(const Exponent& a, std::int64_t divisor)
{
    if (a.exact_)
    {
        if (auto r = make_checked(Wide(a.exact_->num), Wide(a.exact_->den) * divisor))
        {
            return Exponent(*r);
        }
    }
    return Exponent(a.value_ / static_cast<double>(divisor));
}

int compare(const Exponent& a, const Exponent& b)
{
    if (a.exact_ && b.exact_)
    {
        const Wide lhs = Wide(a.exact_->num) * b.exact_->den;
        const Wide rhs = Wide(b.exact_->num) * a.exact_->den;
        return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
    }
    const double diff = a.value_ - b.value_;
    if (std::abs(diff) <= kBoundaryTolerance)
    {
        return 0;
    }
    return diff < 0.0 ? -1 : 1;
}

void PolynomialSchedule::validate() const
{
    if (!std::isfinite(c_alpha) || !(c_alpha > 0.0))
    {
        throw std::invalid_argument("schedule c_alpha must be positive and finite");
    }
    if (!std::isfinite(c_lambda) || c_lambda < 0.0)
    {
        throw std::invalid_argument("schedule c_lambda must be non-negative and finite");
    }
    if (!std::isfinite(q.value()) || q.value() < 0.0 || q.value() >= 1.0)
    {
        throw std::invalid_argument("schedule q must lie in [0, 1)");
    }
    // p = 0 is admitted: it encodes a constant regularization level.
    if (!std::isfinite(p.value()) || p.value() < 0.0 || p.value() > 1.0)
    {
        throw std::invalid_argument("schedule p must lie in [0, 1]");
    }
    if (k_start < 1)
    {
        throw std::invalid_argument("schedule k_start must be >= 1");
    }
}

StepParameters schedule_at(const PolynomialSchedule& schedule, Index k)
{
    if (k < 1)
    {
        throw std::invalid_argument("schedule index k must be >= 1");
    }
    const double index = static_cast<double>(k - 1 + schedule.k_start);
    return {schedule.c_alpha * std::pow(index, -schedule.q.value()),
            schedule.c_lambda * std::pow(index, -schedule.p.value())};
}

std::string_view to_string(TheoremId id)
{
    switch (id)
    {
    case TheoremId::L2Rate:
        return "L2_RATE";
    case TheoremId::AsRate:
        return "AS_RATE";
    case TheoremId::L2General:
        return "L2_GENERAL";
    case TheoremId::DetRate:
        return "DET_RATE";
    }
    return "UNKNOWN";
}

TheoremId parse_theorem_id(std::string_view text)
{
    for (TheoremId id : kAllTheorems)
    {
        if (to_string(id) == text)
        {
            return id;
        }
    }
    throw std::invalid_argument("unknown theorem id '" + std::string(text) + "'");
}

std::optional<double> TheoremReport::exponent(std::string_view quantity) const
{
    auto it = predicted_exponents.find(quantity);
    if (it == predicted_exponents.end())
    {
        return std::nullopt;
    }
    return it->second;
}

std::string TheoremReport::to_string() const
{
    std::ostringstream out;
    out << regdescent::to_string(theorem) << ": " << (applies ? "applies" : "does not apply") << '\n';
    for (const auto& v : violated_conditions)
    {
        out << "  violated: " << v << '\n';
    }
    for (const auto& n : notes)
    {
        out << "  note: " << n << '\n';
    }
    for (const auto& [name, value] : predicted_exponents)
    {
        out << "  rate " << name << ": ";
        if (value)
        {
            out << "k^-" << format_number(*value);
        }
        else
        {
            out << "none";
        }
        out << '\n';
    }
    return out.str();
}

TheoremReport validate_theorem(const PolynomialSchedule& schedule,
                               TheoremId theorem,
                               const TheoryContext& context)
{
    TheoremReport report;
    report.theorem = theorem;
    switch (theorem)
    {
    case TheoremId::L2Rate:
        check_l2_rate(schedule, report);
        break;
    case TheoremId::AsRate:
        check_as_rate(schedule, resolve_beta(schedule, context, report), report);
        break;
    case TheoremId::DetRate:
        check_det_rate(schedule, context, report);
        break;
    case TheoremId::L2General:
        check_l2_general(schedule, report);
        break;
    default:
        throw std::invalid_argument("unknown theorem id");
    }
    if (theorem != TheoremId::AsRate && context.beta)
    {
        report.notes.emplace_back("beta is not used by " + std::string(to_string(theorem)) + "; ignored");
    }
    report.applies = report.violated_conditions.empty();
    return report;
}

TheoremReport predicted_rates(const PolynomialSchedule& schedule,
                              TheoremId theorem,
                              const TheoryContext& context)
{
    TheoremReport report = validate_theorem(schedule, theorem, context);
    if (!report.applies)
    {
        return report;
    }
    if (context.xi && !(*context.xi > 0.0))
    {
        throw std::invalid_argument("xi must be positive");
    }
    const double p = schedule.p.value();
    const double q = schedule.q.value();
    auto& rates = report.predicted_exponents;
    switch (theorem)
    {
    case TheoremId::L2Rate:
    {
        rates[std::string(kFGap)] = positive_or_none(std::min(p, q - p));
        const bool tracking = compare(schedule.p, Exponent(Rational::make(1, 3))) < 0 &&
                              compare(schedule.q, Exponent(Rational::make(2, 1)) * schedule.p) > 0 &&
                              compare(schedule.q, Exponent(Rational::make(1, 1)) - schedule.p) < 0;
        rates[std::string(kDistSqXLambda)] =
            tracking ? positive_or_none(std::min(1.0 - q - p, q - 2.0 * p)) : std::nullopt;
        if (context.xi)
        {
            rates[std::string(kDistSqXStar)] =
                tracking ? positive_or_none(std::min({1.0 - q - p, q - 2.0 * p, 2.0 * *context.xi * p}))
                         : std::nullopt;
        }
        break;
    }
    case TheoremId::AsRate:
    {
        const double beta = context.beta.value_or(2.0 * q - 1.0 - kDefaultBetaGap);
        rates[std::string(kFGap)] = positive_or_none(std::min(beta, p));
        // Theorem gives the norm; the squared norm decays twice as fast.
        rates[std::string(kDistSqXLambda)] = positive_or_none(2.0 * std::min(beta - p, 1.0 - q - p));
        if (context.xi)
        {
            rates[std::string(kDistSqXStar)] =
                positive_or_none(std::min({1.0 - q - p, beta - p, 2.0 * *context.xi * p}));
        }
        break;
    }
    case TheoremId::DetRate:
    {
        const bool interior = compare(schedule.q, Exponent(Rational::make(1, 1)) - schedule.p) < 0;
        rates[std::string(kEnergy)] = positive_or_none(1.0 - q);
        rates[std::string(kFGap)] = positive_or_none(p);
        rates[std::string(kDistSqXLambda)] = interior ? positive_or_none(1.0 - q - p) : std::nullopt;
        if (context.xi)
        {
            rates[std::string(kDistSqXStar)] =
                interior ? positive_or_none(std::min(1.0 - q - p, 2.0 * *context.xi * p)) : std::nullopt;
        }
        break;
    }
    case TheoremId::L2General:
        report.notes.emplace_back("convergence only; no rate is predicted");
        break;
    }
    return report;
}

std::string_view to_string(RateMode mode)
{
    switch (mode)
    {
    case RateMode::L2:
        return "L2";
    case RateMode::AlmostSure:
        return "AS";
    case RateMode::Deterministic:
        return "DET";
    }
    return "UNKNOWN";
}

RateMode parse_rate_mode(std::string_view text)
{
    for (RateMode mode : {RateMode::L2, RateMode::AlmostSure, RateMode::Deterministic})
    {
        if (to_string(mode) == text)
        {
            return mode;
        }
    }
    throw std::invalid_argument("unknown rate mode '" + std::string(text) + "'");
}

OptimalSchedule optimal_schedule(double xi, RateMode mode)
{
    if (!std::isfinite(xi) || !(xi > 0.0))
    {
        throw std::invalid_argument("xi must be positive");
    }
    switch (mode)
    {
    case RateMode::L2:
    {
        const double p = 1.0 / (4.0 * xi + 3.0);
        return {p, (1.0 + p) / 2.0, 2.0 * xi / (4.0 * xi + 3.0)};
    }
    case RateMode::AlmostSure:
        return {1.0 / (6.0 * xi + 3.0), 2.0 / 3.0, 2.0 * xi / (6.0 * xi + 3.0)};
    case RateMode::Deterministic:
        return {1.0 / (2.0 * xi + 1.0), 0.0, 2.0 * xi / (2.0 * xi + 1.0)};
    }
    throw std::invalid_argument("unknown rate mode");
}

}  // namespace regdescent

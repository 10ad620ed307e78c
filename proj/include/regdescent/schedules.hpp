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

#pragma once

#include "regdescent/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace regdescent
{

/// Reduced fraction with a positive denominator.
struct Rational
{
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Rational make(std::int64_t num, std::int64_t den);
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend bool operator==(const Rational&, const Rational&) = default;
};

/**
 * A schedule exponent. Carries an exact rational value when the user wrote
 * one ("2/3"), so that theorem boundaries such as q = 1 - p can be decided
 * exactly. Otherwise comparisons fall back to kBoundaryTolerance.
 */
class Exponent
{
public:
    Exponent() = default;
    Exponent(double value);  // NOLINT(google-explicit-constructor)
    Exponent(Rational exact);  // NOLINT(google-explicit-constructor)

    /// Accepts decimal ("0.25") or fraction ("1/4") notation.
    static Exponent parse(std::string_view text);

    double value() const { return value_; }
    const std::optional<Rational>& exact() const { return exact_; }
    std::string to_string() const;

    friend Exponent operator+(const Exponent& a, const Exponent& b);
    friend Exponent operator-(const Exponent& a, const Exponent& b);
    friend Exponent operator*(const Exponent& a, const Exponent& b);
    friend Exponent operator/(const Exponent& a, std::int64_t divisor);

    /// -1, 0, +1; exact when both sides are rational.
    friend int compare(const Exponent& a, const Exponent& b);

private:
    double value_ = 0.0;
    std::optional<Rational> exact_;
};

inline constexpr double kBoundaryTolerance = 1e-12;
inline constexpr double kDefaultBetaGap = 1e-3;

struct PolynomialSchedule
{
    double c_alpha = 1.0;
    Exponent q = 0.0;
    double c_lambda = 1.0;
    Exponent p = 1.0;
    Index k_start = 1;

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
};

struct StepParameters
{
    double alpha = 0.0;
    double lambda = 0.0;
};

StepParameters schedule_at(const PolynomialSchedule& schedule, Index k);

enum class TheoremId
{
    L2Rate,
    AsRate,
    L2General,
    DetRate,
};

std::string_view to_string(TheoremId id);
TheoremId parse_theorem_id(std::string_view text);
inline constexpr TheoremId kAllTheorems[] = {
    TheoremId::L2Rate, TheoremId::AsRate, TheoremId::L2General, TheoremId::DetRate};

/// Problem- and analysis-dependent inputs to the validators.
struct TheoryContext
{
    std::optional<double> beta;
    std::optional<double> xi;
    /// Smoothness constant L, needed by DetRate.
    std::optional<double> smoothness;
};

// Quantity keys used in TheoremReport::predicted_exponents. Distances are
// exponents of squared norms, matching the trajectory columns.
inline constexpr std::string_view kFGap = "f_gap";
inline constexpr std::string_view kEnergy = "energy";
inline constexpr std::string_view kDistSqXLambda = "dist_sq_to_xlambda";
inline constexpr std::string_view kDistSqXStar = "dist_sq_to_xstar";

struct TheoremReport
{
    TheoremId theorem = TheoremId::L2Rate;
    bool applies = false;
    std::vector<std::string> violated_conditions;
    std::vector<std::string> notes;
    /// nullopt means "none": the theorem gives no rate for that quantity.
    std::map<std::string, std::optional<double>, std::less<>> predicted_exponents;

    std::optional<double> exponent(std::string_view quantity) const;
    std::string to_string() const;
};

TheoremReport validate_theorem(const PolynomialSchedule& schedule,
                               TheoremId theorem,
                               const TheoryContext& context = {});

TheoremReport predicted_rates(const PolynomialSchedule& schedule,
                              TheoremId theorem,
                              const TheoryContext& context = {});

enum class RateMode
{
    L2,
    AlmostSure,
    Deterministic,
};

std::string_view to_string(RateMode mode);
RateMode parse_rate_mode(std::string_view text);

struct OptimalSchedule
{
    double p = 0.0;
    double q = 0.0;
    /// Exponent of the squared distance to the minimum-norm solution.
    double rate = 0.0;
};

OptimalSchedule optimal_schedule(double xi, RateMode mode);

}  // namespace regdescent

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

#include "regdescent/noise.hpp"
#include "regdescent/optimizer.hpp"
#include "regdescent/oracles.hpp"
#include "regdescent/problems.hpp"
#include "regdescent/schedules.hpp"
#include "regdescent/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace regdescent
{

inline constexpr double kDefaultTailFraction = 0.5;
inline constexpr std::size_t kMinRatePoints = 5;

/// Fit of error ~ c k^(-exponent) by least squares in log-log coordinates.
struct RateEstimate
{
    double exponent = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double tail_fraction = kDefaultTailFraction;
    std::size_t n_points = 0;
    /// Non-positive or non-finite errors dropped from the tail window.
    std::size_t n_excluded = 0;
};

/**
 * Fits the last `tail_fraction` of the points with k >= 1. Throws
 * std::invalid_argument when fewer than kMinRatePoints usable points remain
 * or every error is zero.
 */
RateEstimate estimate_rate(std::span<const Index> ks, std::span<const double> errors,
                           double tail_fraction = kDefaultTailFraction);

struct SweepCell
{
    double p = 0.0;
    double q = 0.0;
    /// Predicted squared-distance exponent; 0 outside the validity region.
    double theoretical = 0.0;
    bool theory_applies = false;
    std::optional<double> empirical;
    /// Empirical cells: false when every replica diverged or the fit failed.
    bool valid = true;
    std::string message;
};

struct SweepResult
{
    RateMode mode = RateMode::L2;
    double xi = 1.0;
    std::vector<double> p_grid;
    std::vector<double> q_grid;
    /// Row-major by p, then q.
    std::vector<SweepCell> cells;
    /// Index of the first cell attaining the maximal theoretical value.
    std::size_t argmax = 0;
    bool has_empirical = false;

    const SweepCell& at(std::size_t p_index, std::size_t q_index) const
    {
        return cells[p_index * q_grid.size() + q_index];
    }
    const SweepCell& best() const { return cells[argmax]; }
};

/// Theorem consulted for each mode: L2_RATE, AS_RATE or DET_RATE.
TheoremId theorem_for(RateMode mode);

/**
 * Evaluates the predicted squared-distance exponent on every grid cell.
 * AS cells use beta = 2q - 1 - beta_gap. DET cells are checked with L = 1
 * and C_alpha = 1.
 */
SweepResult theoretical_heatmap(RateMode mode, double xi, const std::vector<double>& p_grid,
                                const std::vector<double>& q_grid, double beta_gap = kDefaultBetaGap);

struct EmpiricalSweepOptions
{
    RateMode mode = RateMode::AlmostSure;
    double xi = 1.0;
    double beta_gap = kDefaultBetaGap;
    double tail_fraction = kDefaultTailFraction;
    std::size_t workers = 0;
};

/**
 * Runs monte_carlo per cell with the schedule exponents replaced and fits the
 * mean squared distance to x_*. The oracle must know x_*.
 */
SweepResult empirical_sweep(const Objective& problem, const OptimizerConfig& base_config,
                            const std::vector<double>& p_grid, const std::vector<double>& q_grid,
                            std::size_t n_replicas, std::uint64_t master_seed, const DiagnosticOracle& oracle,
                            const EmpiricalSweepOptions& options = {});

/// n points a + (b - a) i / (n + 1), i = 1..n (open interval).
std::vector<double> open_grid(double a, double b, std::size_t n);

}  // namespace regdescent

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

#include "regdescent/analysis.hpp"

#include "regdescent/regression.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace regdescent
{

RateEstimate estimate_rate(std::span<const Index> ks, std::span<const double> errors, double tail_fraction)
{
    if (ks.size() != errors.size())
    {
        throw std::invalid_argument("estimate_rate: ks and errors differ in length");
    }
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    {
        throw std::invalid_argument("estimate_rate: tail_fraction must lie in (0, 1]");
    }
    std::size_t first = 0;
    while (first < ks.size() && ks[first] < 1)
    {
        ++first;
    }
    for (std::size_t i = first + 1; i < ks.size(); ++i)
    {
        if (ks[i] <= ks[i - 1])
        {
            throw std::invalid_argument("estimate_rate: ks must be strictly ascending");
        }
    }
    const std::size_t available = ks.size() - first;
    const auto window = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(available)));
    const std::size_t start = ks.size() - window;

    std::vector<double> xs;
    std::vector<double> ys;
    RateEstimate estimate;
    estimate.tail_fraction = tail_fraction;
    bool any_nonzero = false;
    for (std::size_t i = start; i < ks.size(); ++i)
    {
        const double e = errors[i];
        if (e != 0.0)
        {
            any_nonzero = true;
        }
        if (!(e > 0.0) || !std::isfinite(e))
        {
            ++estimate.n_excluded;
            continue;
        }
        xs.push_back(std::log(static_cast<double>(ks[i])));
        ys.push_back(std::log(e));
    }
    if (window > 0 && !any_nonzero)
    {
        throw std::invalid_argument("estimate_rate: all errors are zero");
    }
    if (xs.size() < kMinRatePoints)
    {
        std::ostringstream msg;
        msg << "estimate_rate: " << xs.size() << " usable points in the tail window, need " << kMinRatePoints;
        throw std::invalid_argument(msg.str());
    }
    const LineFit fit = fit_line(xs, ys);
    estimate.exponent = -fit.slope;
    estimate.intercept = fit.intercept;
    estimate.r_squared = fit.r_squared;
    estimate.n_points = fit.n_points;
    return estimate;
}

TheoremId theorem_for(RateMode mode)
{
    switch (mode)
    {
    case RateMode::L2:
        return TheoremId::L2Rate;
    case RateMode::AlmostSure:
        return TheoremId::AsRate;
    case RateMode::Deterministic:
        return TheoremId::DetRate;
    }
    throw std::invalid_argument("unknown rate mode");
}

namespace
{

void check_grid(const std::vector<double>& grid, const char* name)
{
    if (grid.empty())
    {
        throw std::invalid_argument(std::string(name) + " grid is empty");
    }
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        if (!std::isfinite(grid[i]) || (i > 0 && !(grid[i] > grid[i - 1])))
        {
            throw std::invalid_argument(std::string(name) + " grid must be finite and strictly ascending");
        }
    }
}

SweepCell theory_cell(RateMode mode, double xi, double p, double q, double beta_gap)
{
    SweepCell cell;
    cell.p = p;
    cell.q = q;
    PolynomialSchedule schedule;
    schedule.c_alpha = 1.0;
    schedule.c_lambda = 1.0;
    schedule.p = p;
    schedule.q = q;
    TheoryContext context;
    context.xi = xi;
    if (mode == RateMode::AlmostSure)
    {
        context.beta = 2.0 * q - 1.0 - beta_gap;
    }
    if (mode == RateMode::Deterministic)
    {
        context.smoothness = 1.0;
    }
    // Grid points outside the schedule's domain (q >= 1) simply fall outside the region.
    if (!(q >= 0.0 && q < 1.0 && p >= 0.0 && p <= 1.0))
    {
        return cell;
    }
    const TheoremReport report = predicted_rates(schedule, theorem_for(mode), context);
    cell.theory_applies = report.applies;
    if (const auto rate = report.exponent(kDistSqXStar))
    {
        cell.theoretical = *rate;
    }
    return cell;
}

void locate_argmax(SweepResult& result)
{
    result.argmax = 0;
    for (std::size_t i = 1; i < result.cells.size(); ++i)
    {
        if (result.cells[i].theoretical > result.cells[result.argmax].theoretical)
        {
            result.argmax = i;
        }
    }
}

}  // namespace

SweepResult theoretical_heatmap(RateMode mode, double xi, const std::vector<double>& p_grid,
                                const std::vector<double>& q_grid, double beta_gap)
{
    if (!(xi > 0.0))
    {
        throw std::invalid_argument("xi must be positive");
    }
    check_grid(p_grid, "p");
    check_grid(q_grid, "q");
    SweepResult result;
    result.mode = mode;
    result.xi = xi;
    result.p_grid = p_grid;
    result.q_grid = q_grid;
    result.cells.reserve(p_grid.size() * q_grid.size());
    for (double p : p_grid)
    {
        for (double q : q_grid)
        {
            result.cells.push_back(theory_cell(mode, xi, p, q, beta_gap));
        }
    }
    locate_argmax(result);
    return result;
}

SweepResult empirical_sweep(const Objective& problem, const OptimizerConfig& base_config,
                            const std::vector<double>& p_grid, const std::vector<double>& q_grid,
                            std::size_t n_replicas, std::uint64_t master_seed, const DiagnosticOracle& oracle,
                            const EmpiricalSweepOptions& options)
{
    if (!oracle.min_norm())
    {
        throw std::invalid_argument("empirical_sweep needs an oracle that knows x_*");
    }
    SweepResult result = theoretical_heatmap(options.mode, options.xi, p_grid, q_grid, options.beta_gap);
    result.has_empirical = true;
    for (SweepCell& cell : result.cells)
    {
        OptimizerConfig config = base_config;
        config.schedule.p = cell.p;
        config.schedule.q = cell.q;
        try
        {
            const MonteCarloResult mc =
                monte_carlo(problem, config, n_replicas, master_seed, &oracle, options.workers);
            if (mc.all_diverged())
            {
                cell.valid = false;
                cell.message = "all replicas diverged";
                continue;
            }
            const RateEstimate rate =
                estimate_rate(mc.mean.iterations, mc.mean.dist_sq_to_xstar, options.tail_fraction);
            cell.empirical = rate.exponent;
            if (mc.n_diverged > 0)
            {
                cell.message = std::to_string(mc.n_diverged) + " replicas diverged";
            }
        }
        catch (const std::invalid_argument& e)
        {
            cell.valid = false;
            cell.message = e.what();
        }
    }
    return result;
}

std::vector<double> open_grid(double a, double b, std::size_t n)
{
    if (n == 0 || !(b > a))
    {
        throw std::invalid_argument("open_grid needs n >= 1 and b > a");
    }
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        grid[i] = a + (b - a) * static_cast<double>(i + 1) / static_cast<double>(n + 1);
    }
    return grid;
}

}  // namespace regdescent

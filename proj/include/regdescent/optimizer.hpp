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
#include "regdescent/oracles.hpp"
#include "regdescent/problems.hpp"
#include "regdescent/schedules.hpp"
#include "regdescent/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace regdescent
{

enum class Variant
{
    RegSgd,
    RegGd,
    VanillaSgd,
};

std::string_view to_string(Variant variant);
Variant parse_variant(std::string_view text);

enum class InitialPoint
{
    Zero,
    /// X_0 ~ N(0, I), drawn from the replica stream before the first step.
    Gaussian,
    Explicit,
};

std::string_view to_string(InitialPoint init);
InitialPoint parse_initial_point(std::string_view text);

/// Which iterations get diagnostics. k = 0 and k = N are always recorded.
struct RecordPolicy
{
    enum class Kind
    {
        Geometric,
        Arithmetic,
    };

    Kind kind = Kind::Geometric;
    /// Geometric: k in round(ratio^j).
    double ratio = 1.05;
    /// Arithmetic: every stride-th k.
    Index stride = 1;
    /// Also record k - 1 for every recorded k (one-step inequalities need both).
    bool include_predecessors = false;

    std::vector<Index> steps(Index n_iterations) const;
};

struct OptimizerConfig
{
    PolynomialSchedule schedule;
    NoiseModel noise;
    Index n_iterations = 1000;
    InitialPoint init = InitialPoint::Zero;
    Vector x0;
    RecordPolicy record;
    Variant variant = Variant::RegSgd;
    std::size_t batch_size = 1;
    bool keep_iterates = false;

    /// Throws std::invalid_argument on inconsistent settings.
    void validate(std::size_t dimension) const;
};

struct Trajectory
{
    std::vector<Index> iterations;
    /// alpha_k and lambda_k used by step k; NaN at k = 0.
    std::vector<double> alpha;
    std::vector<double> lambda;
    std::vector<Vector> iterates;
    // Diagnostics are either empty (oracle unavailable) or one entry per recorded k.
    std::vector<double> f_gap;
    std::vector<double> dist_sq_to_xstar;
    std::vector<double> dist_sq_to_xlambda;
    std::vector<double> energy;
    /// Running maximum of |X_j| over j <= k.
    std::vector<double> max_norm;
    Vector final_iterate;

    std::size_t size() const { return iterations.size(); }
};

class DivergenceError : public std::runtime_error
{
public:
    DivergenceError(Index step, Vector last_finite);

    /// First step whose iterate was not finite.
    Index step() const { return step_; }
    const Vector& last_finite_iterate() const { return last_finite_; }

private:
    Index step_;
    Vector last_finite_;
};

/**
 * Runs X_k = X_{k-1} - alpha_k (g_k + lambda_k X_{k-1} + xi_k) for k = 1..N.
 *
 * g_k is the full gradient for RegGd and the block estimator over a batch
 * drawn uniformly without replacement otherwise; xi_k is the injected noise
 * (none for RegGd). VanillaSgd uses lambda_k = 0. Diagnostics that need
 * x_*, f(x_*) or x_lambda are recorded when the oracle provides them; the
 * distance to x_lambda and the energy at step k use lambda_{k+1}.
 */
Trajectory run(const Objective& problem, const OptimizerConfig& config, RngStream& stream,
               const DiagnosticOracle* oracle = nullptr);

struct ReplicaOutcome
{
    std::optional<Trajectory> trajectory;
    std::optional<Index> diverged_at;
    Vector last_finite_iterate;
};

struct MonteCarloResult
{
    /// Pointwise mean over replicas that did not diverge.
    Trajectory mean;
    std::vector<ReplicaOutcome> replicas;
    std::size_t n_diverged = 0;
    bool all_diverged() const { return n_diverged == replicas.size(); }
};

/// Worker cap: REG_DESCENT_THREADS if set and positive, else hardware concurrency.
std::size_t default_worker_count();

/// Replica r uses RngStream(master_seed, r); results do not depend on the worker count.
MonteCarloResult monte_carlo(const Objective& problem, const OptimizerConfig& config, std::size_t n_replicas,
                             std::uint64_t master_seed, const DiagnosticOracle* oracle = nullptr,
                             std::size_t workers = 0);

}  // namespace regdescent

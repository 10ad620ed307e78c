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

#include "regdescent/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>

namespace regdescent
{

std::string_view to_string(Variant variant)
{
    switch (variant)
    {
    case Variant::RegSgd:
        return "reg_sgd";
    case Variant::RegGd:
        return "reg_gd";
    case Variant::VanillaSgd:
        return "vanilla_sgd";
    }
    return "unknown";
}

Variant parse_variant(std::string_view text)
{
    for (Variant v : {Variant::RegSgd, Variant::RegGd, Variant::VanillaSgd})
    {
        if (to_string(v) == text)
        {
            return v;
        }
    }
    throw std::invalid_argument("unknown optimizer variant '" + std::string(text) + "'");
}

std::string_view to_string(InitialPoint init)
{
    switch (init)
    {
    case InitialPoint::Zero:
        return "zero";
    case InitialPoint::Gaussian:
        return "gaussian";
    case InitialPoint::Explicit:
        return "explicit";
    }
    return "unknown";
}

InitialPoint parse_initial_point(std::string_view text)
{
    for (InitialPoint i : {InitialPoint::Zero, InitialPoint::Gaussian, InitialPoint::Explicit})
    {
        if (to_string(i) == text)
        {
            return i;
        }
    }
    throw std::invalid_argument("unknown initial point '" + std::string(text) + "'");
}

std::vector<Index> RecordPolicy::steps(Index n_iterations) const
{
    std::vector<Index> out{0};
    if (n_iterations > 0)
    {
        out.push_back(n_iterations);
    }
    if (kind == Kind::Geometric)
    {
        if (!(ratio > 1.0))
        {
            throw std::invalid_argument("geometric record ratio must exceed 1");
        }
        double value = 1.0;
        while (value <= static_cast<double>(n_iterations))
        {
            out.push_back(static_cast<Index>(std::llround(value)));
            value *= ratio;
        }
    }
    else
    {
        if (stride < 1)
        {
            throw std::invalid_argument("arithmetic record stride must be >= 1");
        }
        for (Index k = stride; k <= n_iterations; k += stride)
        {
            out.push_back(k);
        }
    }
    if (include_predecessors)
    {
        const std::size_t count = out.size();
        for (std::size_t i = 0; i < count; ++i)
        {
            if (out[i] >= 1)
            {
                out.push_back(out[i] - 1);
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    while (!out.empty() && out.back() > n_iterations)
    {
        out.pop_back();
    }
    return out;
}

void OptimizerConfig::validate(std::size_t dimension) const
{
    schedule.validate();
    noise.validate();
    if (n_iterations < 0)
    {
        throw std::invalid_argument("n_iterations must be non-negative");
    }
    if (batch_size < 1)
    {
        throw std::invalid_argument("batch_size must be >= 1");
    }
    if (init == InitialPoint::Explicit && static_cast<std::size_t>(x0.size()) != dimension)
    {
        throw std::invalid_argument("x0 dimension does not match the problem");
    }
}

DivergenceError::DivergenceError(Index step, Vector last_finite)
    : std::runtime_error("iterate became non-finite at step " + std::to_string(step)),
      step_(step),
      last_finite_(std::move(last_finite))
{
}

namespace
{

class Recorder
{
public:
    Recorder(const Objective& problem, const OptimizerConfig& config, const DiagnosticOracle* oracle)
        : problem_(problem), config_(config), linear_(dynamic_cast<const LinearProblem*>(&problem))
    {
        if (oracle != nullptr)
        {
            x_star_ = oracle->min_norm() ? &*oracle->min_norm() : nullptr;
            f_star_ = oracle->optimal_value();
            const bool regularized = config.variant != Variant::VanillaSgd && config.schedule.c_lambda > 0.0;
            if (oracle->has_tikhonov() && regularized)
            {
                oracle_ = oracle;
            }
        }
    }

    std::optional<double> f_star() const { return f_star_; }

    void record(Index k, const Vector& x, double running_max, Trajectory& out) const
    {
        out.iterations.push_back(k);
        if (k >= 1)
        {
            const StepParameters step = schedule_at(config_.schedule, k);
            out.alpha.push_back(step.alpha);
            out.lambda.push_back(config_.variant == Variant::VanillaSgd ? 0.0 : step.lambda);
        }
        else
        {
            out.alpha.push_back(std::numeric_limits<double>::quiet_NaN());
            out.lambda.push_back(std::numeric_limits<double>::quiet_NaN());
        }
        if (f_star_)
        {
            out.f_gap.push_back(problem_.value(x) - *f_star_);
        }
        if (x_star_ != nullptr)
        {
            out.dist_sq_to_xstar.push_back((x - *x_star_).squaredNorm());
        }
        if (oracle_ != nullptr)
        {
            const double next_lambda = schedule_at(config_.schedule, k + 1).lambda;
            const Vector x_lambda = oracle_->tikhonov(next_lambda);
            const Vector diff = x - x_lambda;
            out.dist_sq_to_xlambda.push_back(diff.squaredNorm());
            if (linear_ != nullptr)
            {
                // f_lambda is quadratic: the gap is exactly 1/2 e^T (A^T A + lambda I) e.
                out.energy.push_back(0.5 * ((linear_->op() * diff).squaredNorm() + next_lambda * diff.squaredNorm()));
            }
            else
            {
                out.energy.push_back(energy(problem_, x, x_lambda, next_lambda));
            }
        }
        out.max_norm.push_back(running_max);
        if (config_.keep_iterates)
        {
            out.iterates.push_back(x);
        }
    }

private:
    const Objective& problem_;
    const OptimizerConfig& config_;
    const LinearProblem* linear_;
    const DiagnosticOracle* oracle_ = nullptr;
    const Vector* x_star_ = nullptr;
    std::optional<double> f_star_;
};

}  // namespace

Trajectory run(const Objective& problem, const OptimizerConfig& config, RngStream& stream,
               const DiagnosticOracle* oracle)
{
    const std::size_t dim = problem.dimension();
    config.validate(dim);
    const std::size_t n_blocks = problem.block_count();
    const bool stochastic = config.variant != Variant::RegGd;
    if (stochastic && config.batch_size > n_blocks)
    {
        throw std::invalid_argument("batch_size exceeds the number of blocks");
    }
    const bool inject_noise = stochastic && config.noise.kind != NoiseKind::None;

    const Recorder recorder(problem, config, oracle);
    if (inject_noise && config.noise.kind == NoiseKind::AbcScaled && !recorder.f_star())
    {
        throw std::invalid_argument("abc_scaled noise needs f(x_*) from an oracle");
    }

    const auto d = static_cast<Eigen::Index>(dim);
    Vector x = Vector::Zero(d);
    if (config.init == InitialPoint::Gaussian)
    {
        stream.fill_normal(x);
    }
    else if (config.init == InitialPoint::Explicit)
    {
        x = config.x0;
    }

    const std::vector<Index> record_steps = config.record.steps(config.n_iterations);
    Trajectory trajectory;
    trajectory.iterations.reserve(record_steps.size());

    double running_max = x.norm();
    std::size_t next_record = 0;
    if (record_steps[next_record] == 0)
    {
        recorder.record(0, x, running_max, trajectory);
        ++next_record;
    }

    Vector gradient(d);
    Vector noise(d);
    Vector next(d);
    std::vector<std::size_t> permutation(n_blocks);
    std::iota(permutation.begin(), permutation.end(), std::size_t{0});
    std::vector<std::size_t> batch(config.batch_size);
    const bool full_batch = config.batch_size == n_blocks;
    if (full_batch)
    {
        std::iota(batch.begin(), batch.end(), std::size_t{0});
    }

    for (Index k = 1; k <= config.n_iterations; ++k)
    {
        const StepParameters step = schedule_at(config.schedule, k);
        const double lambda = config.variant == Variant::VanillaSgd ? 0.0 : step.lambda;

        if (!stochastic)
        {
            problem.gradient(x, gradient);
        }
        else
        {
            if (!full_batch)
            {
                // Partial Fisher-Yates: the first batch_size entries are a uniform sample without replacement.
                for (std::size_t i = 0; i < config.batch_size; ++i)
                {
                    const std::size_t j = i + stream.uniform_index(n_blocks - i);
                    std::swap(permutation[i], permutation[j]);
                }
                std::copy_n(permutation.begin(), config.batch_size, batch.begin());
                std::sort(batch.begin(), batch.end());
            }
            stochastic_gradient_into(problem, x, batch, gradient);
            if (inject_noise)
            {
                double gap = 0.0;
                if (config.noise.kind == NoiseKind::AbcScaled)
                {
                    gap = std::max(0.0, problem.value(x) - *recorder.f_star());
                }
                sample_noise(config.noise, stream, gap, noise);
                gradient += noise;
            }
        }

        next = x - step.alpha * (gradient + lambda * x);
        if (!next.allFinite())
        {
            throw DivergenceError(k, x);
        }
        x.swap(next);
        running_max = std::max(running_max, x.norm());

        if (next_record < record_steps.size() && record_steps[next_record] == k)
        {
            recorder.record(k, x, running_max, trajectory);
            ++next_record;
        }
    }
    trajectory.final_iterate = std::move(x);
    return trajectory;
}

std::size_t default_worker_count()
{
    if (const char* env = std::getenv("REG_DESCENT_THREADS"))
    {
        char* end = nullptr;
        const long value = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && value > 0)
        {
            return static_cast<std::size_t>(value);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace
{

void accumulate(std::vector<double>& sum, const std::vector<double>& values)
{
    if (sum.empty())
    {
        sum = values;
        return;
    }
    for (std::size_t i = 0; i < sum.size(); ++i)
    {
        sum[i] += values[i];
    }
}

void divide(std::vector<double>& values, double count)
{
    for (double& v : values)
    {
        v /= count;
    }
}

Trajectory average(const std::vector<ReplicaOutcome>& replicas)
{
    Trajectory mean;
    std::size_t count = 0;
    bool has_f_gap = true;
    bool has_xstar = true;
    bool has_xlambda = true;
    bool has_energy = true;
    for (const auto& replica : replicas)
    {
        if (!replica.trajectory)
        {
            continue;
        }
        const Trajectory& t = *replica.trajectory;
        has_f_gap = has_f_gap && !t.f_gap.empty();
        has_xstar = has_xstar && !t.dist_sq_to_xstar.empty();
        has_xlambda = has_xlambda && !t.dist_sq_to_xlambda.empty();
        has_energy = has_energy && !t.energy.empty();
    }
    for (const auto& replica : replicas)
    {
        if (!replica.trajectory)
        {
            continue;
        }
        const Trajectory& t = *replica.trajectory;
        if (count == 0)
        {
            mean.iterations = t.iterations;
            mean.alpha = t.alpha;
            mean.lambda = t.lambda;
            mean.max_norm = t.max_norm;
            mean.final_iterate = t.final_iterate;
        }
        else
        {
            mean.final_iterate += t.final_iterate;
            // The aggregate keeps the worst case across replicas.
            for (std::size_t i = 0; i < mean.max_norm.size(); ++i)
            {
                mean.max_norm[i] = std::max(mean.max_norm[i], t.max_norm[i]);
            }
        }
        if (has_f_gap)
        {
            accumulate(mean.f_gap, t.f_gap);
        }
        if (has_xstar)
        {
            accumulate(mean.dist_sq_to_xstar, t.dist_sq_to_xstar);
        }
        if (has_xlambda)
        {
            accumulate(mean.dist_sq_to_xlambda, t.dist_sq_to_xlambda);
        }
        if (has_energy)
        {
            accumulate(mean.energy, t.energy);
        }
        ++count;
    }
    if (count > 0)
    {
        const auto n = static_cast<double>(count);
        divide(mean.f_gap, n);
        divide(mean.dist_sq_to_xstar, n);
        divide(mean.dist_sq_to_xlambda, n);
        divide(mean.energy, n);
        mean.final_iterate /= n;
    }
    return mean;
}

}  // namespace

MonteCarloResult monte_carlo(const Objective& problem, const OptimizerConfig& config, std::size_t n_replicas,
                             std::uint64_t master_seed, const DiagnosticOracle* oracle, std::size_t workers)
{
    if (n_replicas < 1)
    {
        throw std::invalid_argument("monte_carlo needs at least one replica");
    }
    config.validate(problem.dimension());
    MonteCarloResult result;
    result.replicas.resize(n_replicas);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        for (std::size_t r = next.fetch_add(1); r < n_replicas; r = next.fetch_add(1))
        {
            RngStream stream(master_seed, r);
            try
            {
                result.replicas[r].trajectory = run(problem, config, stream, oracle);
            }
            catch (const DivergenceError& e)
            {
                result.replicas[r].diverged_at = e.step();
                result.replicas[r].last_finite_iterate = e.last_finite_iterate();
            }
            catch (...)
            {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                {
                    failure = std::current_exception();
                }
            }
        }
    };

    const std::size_t n_workers = std::min(workers == 0 ? default_worker_count() : workers, n_replicas);
    if (n_workers <= 1)
    {
        worker();
    }
    else
    {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (std::size_t i = 0; i < n_workers; ++i)
        {
            pool.emplace_back(worker);
        }
        for (auto& t : pool)
        {
            t.join();
        }
    }
    if (failure)
    {
        std::rethrow_exception(failure);
    }
    for (const auto& replica : result.replicas)
    {
        if (replica.diverged_at)
        {
            ++result.n_diverged;
        }
    }
    result.mean = average(result.replicas);
    return result;
}

}  // namespace regdescent

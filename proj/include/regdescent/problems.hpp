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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace regdescent
{

/// Exact solutions some problems know in closed form.
struct ClosedForms
{
    std::optional<Vector> min_norm;
    /// lambda -> x_lambda; empty when unknown.
    std::function<Vector(double)> tikhonov;
};

/**
 * Convex, L-smooth objective f : R^d -> R.
 *
 * Objectives with a finite-sum structure override block_count() and
 * block_gradient_sum(); everything else is a single block whose gradient is
 * the full gradient.
 */
class Objective
{
public:
    virtual ~Objective() = default;

    virtual std::size_t dimension() const = 0;
    virtual double value(const Vector& x) const = 0;
    virtual void gradient(const Vector& x, Vector& out) const = 0;
    Vector gradient(const Vector& x) const;
    /// Lipschitz constant of the gradient.
    virtual double smoothness() const = 0;

    virtual std::size_t block_count() const { return 1; }
    /// out = sum over `blocks` (ascending, distinct) of the block gradients.
    virtual void block_gradient_sum(const Vector& x, std::span<const std::size_t> blocks, Vector& out) const;

    virtual std::string name() const { return "objective"; }

    const ClosedForms& closed_forms() const { return closed_forms_; }
    void set_closed_forms(ClosedForms forms) { closed_forms_ = std::move(forms); }

private:
    ClosedForms closed_forms_;
};

/// Objective assembled from callbacks.
class FunctionObjective final : public Objective
{
public:
    using ValueFn = std::function<double(const Vector&)>;
    using GradientFn = std::function<void(const Vector&, Vector&)>;

    FunctionObjective(std::size_t dimension, ValueFn value, GradientFn gradient, double smoothness,
                      std::string name = "function");

    std::size_t dimension() const override { return dimension_; }
    double value(const Vector& x) const override { return value_(x); }
    void gradient(const Vector& x, Vector& out) const override;
    using Objective::gradient;
    double smoothness() const override { return smoothness_; }
    std::string name() const override { return name_; }

private:
    std::size_t dimension_;
    ValueFn value_;
    GradientFn gradient_;
    double smoothness_;
    std::string name_;
};

using BlockPartition = std::vector<std::vector<Index>>;

/// f(x) = 1/2 |A x - y|^2 with a row partition for block-sampled gradients.
class LinearProblem final : public Objective
{
public:
    /// Empty `blocks` means one block per row. Throws if blocks do not partition the rows.
    LinearProblem(SparseMatrix op, Vector data, BlockPartition blocks = {}, std::string name = "linear");

    static LinearProblem from_dense(const DenseMatrix& op, Vector data, BlockPartition blocks = {},
                                    std::string name = "linear");

    std::size_t dimension() const override { return static_cast<std::size_t>(op_.cols()); }
    std::size_t rows() const { return static_cast<std::size_t>(op_.rows()); }
    double value(const Vector& x) const override;
    void gradient(const Vector& x, Vector& out) const override;
    using Objective::gradient;
    double smoothness() const override { return smoothness_; }
    std::size_t block_count() const override { return blocks_.size(); }
    void block_gradient_sum(const Vector& x, std::span<const std::size_t> blocks, Vector& out) const override;
    std::string name() const override { return name_; }

    const SparseMatrix& op() const { return op_; }
    const Vector& data() const { return data_; }
    const BlockPartition& blocks() const { return blocks_; }
    DenseMatrix dense_operator() const { return DenseMatrix(op_); }

    /// Ground truth used to synthesize `data`, when known.
    const std::optional<Vector>& ground_truth() const { return ground_truth_; }
    void set_ground_truth(Vector truth) { ground_truth_ = std::move(truth); }

private:
    void accumulate_block(const Vector& x, std::size_t block, Vector& out) const;

    SparseMatrix op_;
    Vector data_;
    BlockPartition blocks_;
    std::string name_;
    double smoothness_ = 0.0;
    std::optional<Vector> ground_truth_;
};

/// Largest eigenvalue of A^T A by power iteration (deterministic start); stops
/// when the Rayleigh quotient gains less than `tolerance` relative.
double power_iteration_smoothness(const SparseMatrix& op, double tolerance = 1e-13, int max_iterations = 200000);

inline constexpr Eigen::Index kDenseSmoothnessLimit = 2048;

/// sigma_1(A)^2: dense symmetric eigensolve of the smaller Gram matrix when
/// min(rows, cols) <= kDenseSmoothnessLimit, power iteration otherwise.
double operator_smoothness(const SparseMatrix& op);

struct StochasticGradientEstimate
{
    Vector estimate;
    std::vector<std::size_t> block_ids;
    bool is_unbiased = true;
};

/**
 * Unbiased block estimator (n_blocks / |batch|) * sum_b A_b^T (A_b x - y_b).
 * Its mean under uniform sampling of the batch equals the full gradient.
 */
StochasticGradientEstimate stochastic_gradient(const Objective& problem, const Vector& x,
                                               std::span<const std::size_t> batch);

/// Unchecked variant for the hot loop; `sorted_batch` must be ascending and distinct.
void stochastic_gradient_into(const Objective& problem, const Vector& x,
                              std::span<const std::size_t> sorted_batch, Vector& out);

/// f(x1, x2) = 1/2 (x1 + x2 - 1)^2, a single block; closed forms attached.
LinearProblem toy_problem();

/// Tridiagonal discretization of -d^2/ds^2 + Id on the 2^m - 1 interior nodes of [0, 1].
SparseMatrix ode_operator(int mesh_exponent);

/// Solves ode_operator(m) p = rhs (Thomas algorithm); rhs has 2^m - 1 entries.
Vector ode_solve(int mesh_exponent, const Vector& rhs);

/**
 * Point-observed elliptic inverse problem. The unknown right-hand side is
 * sampled at s_j = j 2^-m, j = 1..2^m (the last node is the boundary s = 1,
 * which the interior solve never reads). Observation k samples the solution
 * at the node nearest to k / n_obs. The data come from a random sine series
 * drawn from rng_seed.
 */
LinearProblem ode_problem(int mesh_exponent, int n_obs, std::uint64_t rng_seed);

/**
 * Parallel-beam tomography on the unit square, pixels row-major from the top
 * left. Angles j pi / n_angles; ray offsets are cell centred on
 * [-sqrt(2)/2, sqrt(2)/2]. Row entries are exact ray/pixel intersection
 * lengths. One block per angle.
 */
LinearProblem radon_problem(int image_size, int n_angles, int n_rays, const Vector& ground_truth);

/// Modified Shepp-Logan phantom, image_size^2 entries row-major.
Vector shepp_logan_phantom(int image_size);

/// A = diag(1/n), x_* = (n^-decay), y = A x_*, one block per row.
LinearProblem diagonal_problem(std::size_t size, double solution_decay);

}  // namespace regdescent

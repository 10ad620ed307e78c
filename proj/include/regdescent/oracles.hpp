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

#include "regdescent/problems.hpp"
#include "regdescent/schedules.hpp"
#include "regdescent/types.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace regdescent
{

inline constexpr double kDefaultRankTolerance = 1e-10;
/// Largest dimension for which dense SVD-backed oracles are built.
inline constexpr std::size_t kSpectralOracleMaxDimension = 2048;

/// Thin SVD A = U diag(sigma) V^T with singular values in descending order.
class SpectralDecomposition
{
public:
    static SpectralDecomposition compute(const DenseMatrix& op, double rank_tolerance = kDefaultRankTolerance);
    static SpectralDecomposition compute(const SparseMatrix& op, double rank_tolerance = kDefaultRankTolerance);

    const Vector& singular_values() const { return singular_values_; }
    const DenseMatrix& left_vectors() const { return left_; }
    const DenseMatrix& right_vectors() const { return right_; }
    /// Relative tolerance; values below rank_tolerance * sigma_1 count as zero.
    double rank_tolerance() const { return rank_tolerance_; }
    std::size_t rank() const { return rank_; }
    std::size_t rows() const { return static_cast<std::size_t>(left_.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(right_.rows()); }

    /// <y, u_n> for every n.
    Vector data_coefficients(const Vector& y) const;

private:
    Vector singular_values_;
    DenseMatrix left_;
    DenseMatrix right_;
    double rank_tolerance_ = kDefaultRankTolerance;
    std::size_t rank_ = 0;
};

/// A^+ y; zero vector when the operator has rank 0.
Vector min_norm_solution(const SpectralDecomposition& decomp, const Vector& y);

/// sum_n sigma_n / (sigma_n^2 + lambda) <y, u_n> v_n.
Vector tikhonov_solution(const SpectralDecomposition& decomp, const Vector& y, double lambda);

/// Solves (A^T A + lambda I) x = A^T y through whichever Gram system is smaller.
Vector tikhonov_normal_equations(const LinearProblem& problem, double lambda);

/// lambda / (sigma (sigma^2 + lambda)), the gap between 1/sigma and the Tikhonov filter.
double filter_residual(double sigma, double lambda);

/// f_lambda(x) - f_lambda(x_lambda), clamped at zero inside -1e-12.
double energy(const Objective& problem, const Vector& x, const Vector& x_lambda, double lambda);
double energy(const LinearProblem& problem, const SpectralDecomposition& decomp, const Vector& x, double lambda);

struct ViscosityCurvePoint
{
    double lambda = 0.0;
    Vector x_lambda;
    double dist_to_xstar = 0.0;
    /// |x_*|^2 - |x_lambda|^2
    double norm_gap = 0.0;
};

struct ViscosityCurve
{
    std::vector<ViscosityCurvePoint> points;
    /// Fitted Hoelder exponent in |x_lambda - x_*| ~ C lambda^xi (>= 3 usable points).
    std::optional<double> xi_hat;
};

/// `lambdas` must be positive and strictly descending.
ViscosityCurve viscosity_curve(const SpectralDecomposition& decomp, const Vector& y,
                               const std::vector<double>& lambdas);

/// Exponent of lambda in the squared error bound under a source condition of order nu.
double source_condition_rate(double nu);

struct GapSeries
{
    std::vector<Index> ks;
    std::vector<double> terms;
    std::vector<double> partial_sums;
    /// Fitted decay exponent of the terms over the tail; nullopt when all terms vanish.
    std::optional<double> decay_exponent;
    bool appears_summable = false;
    std::string verdict;
};

/**
 * Partial sums of alpha_k lambda_k (|x_*|^2 - |x_lambda_k|^2), k = 1..horizon,
 * sampled geometrically. This is numerical evidence only.
 */
GapSeries viscosity_gap_series(const SpectralDecomposition& decomp, const Vector& y,
                               const PolynomialSchedule& schedule, Index horizon);

/**
 * Ground truth consumed by the optimizer's diagnostics.
 */
class DiagnosticOracle
{
public:
    virtual ~DiagnosticOracle() = default;
    /// x_*, when the oracle knows it.
    virtual const std::optional<Vector>& min_norm() const = 0;
    /// f(x_*), when known.
    virtual std::optional<double> optimal_value() const = 0;
    virtual bool has_tikhonov() const = 0;
    virtual Vector tikhonov(double lambda) const = 0;
};

/// Oracle backed by the SVD of a linear problem's operator.
class SpectralOracle final : public DiagnosticOracle
{
public:
    explicit SpectralOracle(const LinearProblem& problem, double rank_tolerance = kDefaultRankTolerance);

    const std::optional<Vector>& min_norm() const override { return min_norm_; }
    std::optional<double> optimal_value() const override { return optimal_value_; }
    bool has_tikhonov() const override { return true; }
    Vector tikhonov(double lambda) const override;

    const SpectralDecomposition& decomposition() const { return decomp_; }

private:
    SpectralDecomposition decomp_;
    Vector filtered_;  // sigma_n <y, u_n>
    std::optional<Vector> min_norm_;
    std::optional<double> optimal_value_;
};

/// Oracle built from an objective's closed forms.
class ClosedFormOracle final : public DiagnosticOracle
{
public:
    explicit ClosedFormOracle(const Objective& problem);

    const std::optional<Vector>& min_norm() const override { return min_norm_; }
    std::optional<double> optimal_value() const override { return optimal_value_; }
    bool has_tikhonov() const override { return static_cast<bool>(tikhonov_); }
    Vector tikhonov(double lambda) const override;

private:
    std::optional<Vector> min_norm_;
    std::optional<double> optimal_value_;
    std::function<Vector(double)> tikhonov_;
};

/// Tikhonov-only oracle for problems too large for a dense SVD; no x_*.
class NormalEquationsOracle final : public DiagnosticOracle
{
public:
    explicit NormalEquationsOracle(const LinearProblem& problem);

    const std::optional<Vector>& min_norm() const override { return min_norm_; }
    std::optional<double> optimal_value() const override { return std::nullopt; }
    bool has_tikhonov() const override { return true; }
    Vector tikhonov(double lambda) const override;

private:
    const LinearProblem* problem_;
    std::optional<Vector> min_norm_;
};

}  // namespace regdescent

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

#include "regdescent/oracles.hpp"

#include "regdescent/regression.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace regdescent
{

SpectralDecomposition SpectralDecomposition::compute(const DenseMatrix& op, double rank_tolerance)
{
    if (op.rows() == 0 || op.cols() == 0)
    {
        throw std::invalid_argument("cannot decompose an empty operator");
    }
    if (!(rank_tolerance > 0.0))
    {
        throw std::invalid_argument("rank tolerance must be positive");
    }
    Eigen::BDCSVD<DenseMatrix> svd(op, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SpectralDecomposition decomp;
    decomp.singular_values_ = svd.singularValues();
    decomp.left_ = svd.matrixU();
    decomp.right_ = svd.matrixV();
    decomp.rank_tolerance_ = rank_tolerance;
    const double top = decomp.singular_values_.size() > 0 ? decomp.singular_values_[0] : 0.0;
    decomp.rank_ = 0;
    if (top > 0.0)
    {
        for (Eigen::Index n = 0; n < decomp.singular_values_.size(); ++n)
        {
            if (decomp.singular_values_[n] > rank_tolerance * top)
            {
                ++decomp.rank_;
            }
        }
    }
    return decomp;
}

SpectralDecomposition SpectralDecomposition::compute(const SparseMatrix& op, double rank_tolerance)
{
    return compute(DenseMatrix(op), rank_tolerance);
}

Vector SpectralDecomposition::data_coefficients(const Vector& y) const
{
    if (static_cast<std::size_t>(y.size()) != rows())
    {
        throw std::invalid_argument("data length does not match operator rows");
    }
    return left_.transpose() * y;
}

Vector min_norm_solution(const SpectralDecomposition& decomp, const Vector& y)
{
    const Vector coefficients = decomp.data_coefficients(y);
    Vector scaled = Vector::Zero(coefficients.size());
    const auto rank = static_cast<Eigen::Index>(decomp.rank());
    for (Eigen::Index n = 0; n < rank; ++n)
    {
        scaled[n] = coefficients[n] / decomp.singular_values()[n];
    }
    return decomp.right_vectors() * scaled;
}

Vector tikhonov_solution(const SpectralDecomposition& decomp, const Vector& y, double lambda)
{
    if (!(lambda > 0.0) || !std::isfinite(lambda))
    {
        throw std::invalid_argument("tikhonov lambda must be positive");
    }
    const Vector coefficients = decomp.data_coefficients(y);
    const Vector& sigma = decomp.singular_values();
    const Vector filter = sigma.array() / (sigma.array().square() + lambda);
    return decomp.right_vectors() * filter.cwiseProduct(coefficients);
}

Vector tikhonov_normal_equations(const LinearProblem& problem, double lambda)
{
    if (!(lambda > 0.0) || !std::isfinite(lambda))
    {
        throw std::invalid_argument("tikhonov lambda must be positive");
    }
    const DenseMatrix op(problem.op());
    if (op.rows() < op.cols())
    {
        DenseMatrix gram = op * op.transpose();
        gram.diagonal().array() += lambda;
        return op.transpose() * gram.ldlt().solve(problem.data());
    }
    DenseMatrix gram = op.transpose() * op;
    gram.diagonal().array() += lambda;
    return gram.ldlt().solve(op.transpose() * problem.data());
}

double filter_residual(double sigma, double lambda)
{
    if (!(sigma > 0.0) || !(lambda > 0.0))
    {
        throw std::invalid_argument("filter_residual needs positive sigma and lambda");
    }
    return lambda / (sigma * (sigma * sigma + lambda));
}

double energy(const Objective& problem, const Vector& x, const Vector& x_lambda, double lambda)
{
    if (!(lambda > 0.0))
    {
        throw std::invalid_argument("energy needs a positive lambda");
    }
    const double at_x = problem.value(x) + 0.5 * lambda * x.squaredNorm();
    const double at_min = problem.value(x_lambda) + 0.5 * lambda * x_lambda.squaredNorm();
    const double gap = at_x - at_min;
    if (gap >= 0.0)
    {
        return gap;
    }
    if (gap >= -1e-12 * std::max(1.0, std::abs(at_min)))
    {
        return 0.0;
    }
    std::ostringstream msg;
    msg << "energy is negative (" << gap << "); x_lambda is not the regularized minimizer";
    throw std::logic_error(msg.str());
}

double energy(const LinearProblem& problem, const SpectralDecomposition& decomp, const Vector& x, double lambda)
{
    return energy(problem, x, tikhonov_solution(decomp, problem.data(), lambda), lambda);
}

namespace
{

// |x_*|^2 - |x_lambda|^2 summed termwise so every contribution is non-negative.
double norm_gap(const SpectralDecomposition& decomp, const Vector& coefficients, double lambda)
{
    const Vector& sigma = decomp.singular_values();
    const auto rank = static_cast<Eigen::Index>(decomp.rank());
    double gap = 0.0;
    for (Eigen::Index n = 0; n < rank; ++n)
    {
        const double s2 = sigma[n] * sigma[n];
        const double c2 = coefficients[n] * coefficients[n];
        const double filtered = sigma[n] / (s2 + lambda);
        gap += c2 * (1.0 / s2 - filtered * filtered);
    }
    return std::max(gap, 0.0);
}

}  // namespace

ViscosityCurve viscosity_curve(const SpectralDecomposition& decomp, const Vector& y,
                               const std::vector<double>& lambdas)
{
    for (std::size_t i = 0; i < lambdas.size(); ++i)
    {
        if (!(lambdas[i] > 0.0))
        {
            throw std::invalid_argument("viscosity curve lambdas must be positive");
        }
        if (i > 0 && !(lambdas[i] < lambdas[i - 1]))
        {
            throw std::invalid_argument("viscosity curve lambdas must be strictly descending");
        }
    }
    const Vector coefficients = decomp.data_coefficients(y);
    const Vector x_star = min_norm_solution(decomp, y);
    ViscosityCurve curve;
    std::vector<double> log_lambda;
    std::vector<double> log_dist;
    for (double lambda : lambdas)
    {
        ViscosityCurvePoint point;
        point.lambda = lambda;
        point.x_lambda = tikhonov_solution(decomp, y, lambda);
        point.dist_to_xstar = (point.x_lambda - x_star).norm();
        point.norm_gap = norm_gap(decomp, coefficients, lambda);
        if (point.dist_to_xstar > 0.0)
        {
            log_lambda.push_back(std::log(lambda));
            log_dist.push_back(std::log(point.dist_to_xstar));
        }
        curve.points.push_back(std::move(point));
    }
    if (log_lambda.size() >= 3)
    {
        curve.xi_hat = fit_line(log_lambda, log_dist).slope;
    }
    return curve;
}

double source_condition_rate(double nu)
{
    if (!(nu > 0.0))
    {
        throw std::invalid_argument("source condition order must be positive");
    }
    return nu >= 2.0 ? 1.0 : 2.0 * nu;
}

GapSeries viscosity_gap_series(const SpectralDecomposition& decomp, const Vector& y,
                               const PolynomialSchedule& schedule, Index horizon)
{
    schedule.validate();
    if (horizon < 1)
    {
        throw std::invalid_argument("horizon must be >= 1");
    }
    const Vector coefficients = decomp.data_coefficients(y);
    GapSeries series;
    double sum = 0.0;
    double next_record = 1.0;
    for (Index k = 1; k <= horizon; ++k)
    {
        const StepParameters step = schedule_at(schedule, k);
        const double term = step.lambda > 0.0 ? step.alpha * step.lambda * norm_gap(decomp, coefficients, step.lambda)
                                              : 0.0;
        sum += term;
        if (static_cast<double>(k) >= next_record || k == horizon)
        {
            series.ks.push_back(k);
            series.terms.push_back(term);
            series.partial_sums.push_back(sum);
            while (next_record <= static_cast<double>(k))
            {
                next_record *= 1.05;
            }
        }
    }
    std::vector<double> log_k;
    std::vector<double> log_term;
    const std::size_t start = series.ks.size() / 2;
    for (std::size_t i = start; i < series.ks.size(); ++i)
    {
        if (series.terms[i] > 0.0)
        {
            log_k.push_back(std::log(static_cast<double>(series.ks[i])));
            log_term.push_back(std::log(series.terms[i]));
        }
    }
    std::ostringstream verdict;
    if (std::all_of(series.terms.begin(), series.terms.end(), [](double t) { return t == 0.0; }))
    {
        series.appears_summable = true;
        verdict << "all terms vanish";
    }
    else if (log_k.size() >= 5)
    {
        series.decay_exponent = -fit_line(log_k, log_term).slope;
        series.appears_summable = *series.decay_exponent > 1.05;
        verdict << (series.appears_summable ? "appears summable" : "NOT provably summable")
                << ": terms decay like k^-" << *series.decay_exponent;
    }
    else
    {
        verdict << "too few positive terms to fit a decay exponent";
    }
    series.verdict = verdict.str();
    return series;
}

SpectralOracle::SpectralOracle(const LinearProblem& problem, double rank_tolerance)
    : decomp_(SpectralDecomposition::compute(problem.op(), rank_tolerance))
{
    const Vector coefficients = decomp_.data_coefficients(problem.data());
    filtered_ = decomp_.singular_values().cwiseProduct(coefficients);
    min_norm_ = min_norm_solution(decomp_, problem.data());
    optimal_value_ = problem.value(*min_norm_);
}

Vector SpectralOracle::tikhonov(double lambda) const
{
    if (!(lambda > 0.0) || !std::isfinite(lambda))
    {
        throw std::invalid_argument("tikhonov lambda must be positive");
    }
    const Vector& sigma = decomp_.singular_values();
    const Vector weights = filtered_.array() / (sigma.array().square() + lambda);
    return decomp_.right_vectors() * weights;
}

ClosedFormOracle::ClosedFormOracle(const Objective& problem)
    : min_norm_(problem.closed_forms().min_norm), tikhonov_(problem.closed_forms().tikhonov)
{
    if (min_norm_)
    {
        optimal_value_ = problem.value(*min_norm_);
    }
}

Vector ClosedFormOracle::tikhonov(double lambda) const
{
    if (!tikhonov_)
    {
        throw std::logic_error("closed-form Tikhonov path is unknown for this problem");
    }
    return tikhonov_(lambda);
}

NormalEquationsOracle::NormalEquationsOracle(const LinearProblem& problem) : problem_(&problem) {}

Vector NormalEquationsOracle::tikhonov(double lambda) const
{
    return tikhonov_normal_equations(*problem_, lambda);
}

}  // namespace regdescent

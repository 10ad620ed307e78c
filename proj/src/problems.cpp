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

#include "regdescent/problems.hpp"

#include "regdescent/noise.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace regdescent
{

Vector Objective::gradient(const Vector& x) const
{
    Vector out(static_cast<Eigen::Index>(dimension()));
    gradient(x, out);
    return out;
}

void Objective::block_gradient_sum(const Vector& x, std::span<const std::size_t> blocks, Vector& out) const
{
    if (blocks.size() != 1 || blocks.front() != 0)
    {
        throw std::invalid_argument("objective has a single block");
    }
    gradient(x, out);
}

FunctionObjective::FunctionObjective(std::size_t dimension, ValueFn value, GradientFn gradient, double smoothness,
                                     std::string name)
    : dimension_(dimension),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      smoothness_(smoothness),
      name_(std::move(name))
{
    if (dimension_ == 0 || !value_ || !gradient_)
    {
        throw std::invalid_argument("function objective needs a dimension, value and gradient");
    }
    if (!(smoothness_ > 0.0))
    {
        throw std::invalid_argument("smoothness constant must be positive");
    }
}

void FunctionObjective::gradient(const Vector& x, Vector& out) const
{
    out.resize(static_cast<Eigen::Index>(dimension_));
    gradient_(x, out);
}

LinearProblem::LinearProblem(SparseMatrix op, Vector data, BlockPartition blocks, std::string name)
    : op_(std::move(op)), data_(std::move(data)), blocks_(std::move(blocks)), name_(std::move(name))
{
    if (op_.rows() == 0 || op_.cols() == 0)
    {
        throw std::invalid_argument("linear problem needs a non-empty operator");
    }
    if (data_.size() != op_.rows())
    {
        throw std::invalid_argument("data length does not match operator rows");
    }
    op_.makeCompressed();
    if (blocks_.empty())
    {
        blocks_.reserve(static_cast<std::size_t>(op_.rows()));
        for (Index row = 0; row < op_.rows(); ++row)
        {
            blocks_.push_back({row});
        }
    }
    std::vector<int> seen(static_cast<std::size_t>(op_.rows()), 0);
    for (const auto& block : blocks_)
    {
        if (block.empty())
        {
            throw std::invalid_argument("empty block in partition");
        }
        for (Index row : block)
        {
            if (row < 0 || row >= op_.rows())
            {
                throw std::invalid_argument("block row index out of range");
            }
            if (seen[static_cast<std::size_t>(row)]++ != 0)
            {
                throw std::invalid_argument("blocks overlap at row " + std::to_string(row));
            }
        }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    {
        throw std::invalid_argument("blocks do not cover every row");
    }
    smoothness_ = operator_smoothness(op_);
}

LinearProblem LinearProblem::from_dense(const DenseMatrix& op, Vector data, BlockPartition blocks, std::string name)
{
    SparseMatrix sparse = op.sparseView();
    return LinearProblem(std::move(sparse), std::move(data), std::move(blocks), std::move(name));
}

double LinearProblem::value(const Vector& x) const
{
    if (x.size() != op_.cols())
    {
        throw std::invalid_argument("point dimension mismatch");
    }
    return 0.5 * (op_ * x - data_).squaredNorm();
}

void LinearProblem::accumulate_block(const Vector& x, std::size_t block, Vector& out) const
{
    for (Index row : blocks_[block])
    {
        double residual = -data_[row];
        for (SparseMatrix::InnerIterator it(op_, row); it; ++it)
        {
            residual += it.value() * x[it.col()];
        }
        for (SparseMatrix::InnerIterator it(op_, row); it; ++it)
        {
            out[it.col()] += residual * it.value();
        }
    }
}

void LinearProblem::gradient(const Vector& x, Vector& out) const
{
    if (x.size() != op_.cols())
    {
        throw std::invalid_argument("point dimension mismatch");
    }
    out.setZero(op_.cols());
    for (std::size_t b = 0; b < blocks_.size(); ++b)
    {
        accumulate_block(x, b, out);
    }
}

void LinearProblem::block_gradient_sum(const Vector& x, std::span<const std::size_t> blocks, Vector& out) const
{
    out.setZero(op_.cols());
    for (std::size_t b : blocks)
    {
        accumulate_block(x, b, out);
    }
}

double power_iteration_smoothness(const SparseMatrix& op, double tolerance, int max_iterations)
{
    RngStream stream(0x51ed5eedULL);
    Vector v(op.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i)
    {
        v[i] = 1.0 + 0.5 * stream.uniform();
    }
    v.normalize();
    Vector w(op.cols());
    double rayleigh = 0.0;
    for (int iter = 0; iter < max_iterations; ++iter)
    {
        w.noalias() = op.transpose() * (op * v);
        const double previous = rayleigh;
        rayleigh = v.dot(w);
        const double norm = w.norm();
        if (norm == 0.0)
        {
            return 0.0;
        }
        v = w / norm;
        // The Rayleigh quotient increases monotonically towards sigma_1^2.
        if (iter > 0 && rayleigh - previous <= tolerance * rayleigh)
        {
            break;
        }
    }
    return rayleigh;
}

double operator_smoothness(const SparseMatrix& op)
{
    if (op.rows() == 0 || op.cols() == 0)
    {
        return 0.0;
    }
    if (std::min(op.rows(), op.cols()) > kDenseSmoothnessLimit)
    {
        return power_iteration_smoothness(op);
    }
    const DenseMatrix dense(op);
    const DenseMatrix gram = op.rows() <= op.cols() ? DenseMatrix(dense * dense.transpose())
                                                    : DenseMatrix(dense.transpose() * dense);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(gram, Eigen::EigenvaluesOnly);
    return std::max(0.0, solver.eigenvalues().maxCoeff());
}

StochasticGradientEstimate stochastic_gradient(const Objective& problem, const Vector& x,
                                               std::span<const std::size_t> batch)
{
    if (batch.empty())
    {
        throw std::invalid_argument("batch must not be empty");
    }
    if (static_cast<std::size_t>(x.size()) != problem.dimension())
    {
        throw std::invalid_argument("point dimension mismatch");
    }
    std::vector<std::size_t> sorted(batch.begin(), batch.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    {
        throw std::invalid_argument("batch contains repeated block ids");
    }
    if (sorted.back() >= problem.block_count())
    {
        throw std::invalid_argument("block id out of range");
    }
    StochasticGradientEstimate result;
    result.estimate.resize(static_cast<Eigen::Index>(problem.dimension()));
    stochastic_gradient_into(problem, x, sorted, result.estimate);
    result.block_ids = std::move(sorted);
    return result;
}

void stochastic_gradient_into(const Objective& problem, const Vector& x,
                              std::span<const std::size_t> sorted_batch, Vector& out)
{
    problem.block_gradient_sum(x, sorted_batch, out);
    const double scale = static_cast<double>(problem.block_count()) / static_cast<double>(sorted_batch.size());
    if (scale != 1.0)
    {
        out *= scale;
    }
}

LinearProblem toy_problem()
{
    DenseMatrix op(1, 2);
    op << 1.0, 1.0;
    Vector data(1);
    data << 1.0;
    LinearProblem problem = LinearProblem::from_dense(op, data, {}, "toy");
    ClosedForms forms;
    forms.min_norm = Vector::Constant(2, 0.5);
    forms.tikhonov = [](double lambda) { return Vector::Constant(2, 1.0 / (2.0 + lambda)); };
    problem.set_closed_forms(std::move(forms));
    return problem;
}

SparseMatrix ode_operator(int mesh_exponent)
{
    if (mesh_exponent < 2 || mesh_exponent > 24)
    {
        throw std::invalid_argument("mesh_exponent must lie in [2, 24]");
    }
    const Index n = (Index{1} << mesh_exponent) - 1;
    const double delta = std::ldexp(1.0, -mesh_exponent);
    const double off = -1.0 / (delta * delta);
    const double diag = 2.0 / (delta * delta) + 1.0;
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(3 * n));
    for (Index i = 0; i < n; ++i)
    {
        if (i > 0)
        {
            entries.emplace_back(i, i - 1, off);
        }
        entries.emplace_back(i, i, diag);
        if (i + 1 < n)
        {
            entries.emplace_back(i, i + 1, off);
        }
    }
    SparseMatrix g(n, n);
    g.setFromTriplets(entries.begin(), entries.end());
    return g;
}

Vector ode_solve(int mesh_exponent, const Vector& rhs)
{
    if (mesh_exponent < 2 || mesh_exponent > 24)
    {
        throw std::invalid_argument("mesh_exponent must lie in [2, 24]");
    }
    const Index n = (Index{1} << mesh_exponent) - 1;
    if (rhs.size() != n)
    {
        throw std::invalid_argument("right-hand side must have 2^m - 1 entries");
    }
    const double delta = std::ldexp(1.0, -mesh_exponent);
    const double off = -1.0 / (delta * delta);
    const double diag = 2.0 / (delta * delta) + 1.0;
    // Thomas algorithm for the constant symmetric tridiagonal system.
    Vector c(n);
    Vector d(n);
    c[0] = off / diag;
    d[0] = rhs[0] / diag;
    for (Index i = 1; i < n; ++i)
    {
        const double m = diag - off * c[i - 1];
        c[i] = off / m;
        d[i] = (rhs[i] - off * d[i - 1]) / m;
    }
    Vector p(n);
    p[n - 1] = d[n - 1];
    for (Index i = n - 2; i >= 0; --i)
    {
        p[i] = d[i] - c[i] * p[i + 1];
    }
    return p;
}

LinearProblem ode_problem(int mesh_exponent, int n_obs, std::uint64_t rng_seed)
{
    if (mesh_exponent < 2 || mesh_exponent > 20)
    {
        throw std::invalid_argument("mesh_exponent must lie in [2, 20]");
    }
    const Index d = Index{1} << mesh_exponent;
    const Index interior = d - 1;
    if (n_obs < 1 || n_obs > d)
    {
        throw std::invalid_argument("n_obs must lie in [1, 2^mesh_exponent]");
    }
    const double delta = std::ldexp(1.0, -mesh_exponent);

    std::vector<Eigen::Triplet<double>> entries;
    for (Index k = 1; k <= n_obs; ++k)
    {
        const double s = static_cast<double>(k) / static_cast<double>(n_obs);
        const Index node = static_cast<Index>(std::llround(s / delta)) - 1;
        if (node < 0 || node >= interior)
        {
            continue;  // boundary node: the solution vanishes there
        }
        Vector unit = Vector::Zero(interior);
        unit[node] = 1.0;
        // G is symmetric, so row `node` of G^-1 is G^-1 e_node.
        const Vector row = ode_solve(mesh_exponent, unit);
        for (Index j = 0; j < interior; ++j)
        {
            entries.emplace_back(k - 1, j, row[j]);
        }
    }
    SparseMatrix op(n_obs, d);
    op.setFromTriplets(entries.begin(), entries.end());

    RngStream stream(rng_seed, 0);
    constexpr int kModes = 100;
    Vector coefficients(kModes);
    for (int i = 1; i <= kModes; ++i)
    {
        coefficients[i - 1] = stream.normal() / (static_cast<double>(i) * static_cast<double>(i));
    }
    Vector truth(d);
    for (Index j = 0; j < d; ++j)
    {
        const double s = static_cast<double>(j + 1) * delta;
        double value = 0.0;
        for (int i = 1; i <= kModes; ++i)
        {
            value += coefficients[i - 1] * std::sin(i * std::numbers::pi * s);
        }
        truth[j] = std::numbers::sqrt2 / std::numbers::pi * value;
    }
    Vector data = op * truth;
    LinearProblem problem(std::move(op), std::move(data), {}, "ode");
    problem.set_ground_truth(std::move(truth));
    return problem;
}

namespace
{

struct RaySegment
{
    Index pixel;
    double length;
};

// Siddon-style traversal: gather every crossing with the pixel grid lines,
// then assign each sub-segment to the pixel containing its midpoint.
std::vector<RaySegment> trace_ray(int n, double theta, double offset)
{
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    // Point on the ray: offset * (c, s) + t * (-s, c).
    const double px = offset * c;
    const double pz = offset * s;
    const double dx = -s;
    const double dz = c;
    constexpr double kParallel = 1e-14;

    double t_min = -std::numeric_limits<double>::infinity();
    double t_max = std::numeric_limits<double>::infinity();
    auto clip = [&](double origin, double direction) {
        if (std::abs(direction) < kParallel)
        {
            if (origin < -0.5 || origin > 0.5)
            {
                t_min = 1.0;
                t_max = 0.0;
            }
            return;
        }
        double a = (-0.5 - origin) / direction;
        double b = (0.5 - origin) / direction;
        if (a > b)
        {
            std::swap(a, b);
        }
        t_min = std::max(t_min, a);
        t_max = std::min(t_max, b);
    };
    clip(px, dx);
    clip(pz, dz);
    if (!(t_max > t_min))
    {
        return {};
    }

    const double h = 1.0 / n;
    std::vector<double> params{t_min, t_max};
    auto crossings = [&](double origin, double direction) {
        if (std::abs(direction) < kParallel)
        {
            return;
        }
        for (int i = 0; i <= n; ++i)
        {
            const double t = (-0.5 + i * h - origin) / direction;
            if (t > t_min && t < t_max)
            {
                params.push_back(t);
            }
        }
    };
    crossings(px, dx);
    crossings(pz, dz);
    std::sort(params.begin(), params.end());

    std::vector<RaySegment> segments;
    for (std::size_t i = 0; i + 1 < params.size(); ++i)
    {
        const double length = params[i + 1] - params[i];
        if (length <= 1e-15)
        {
            continue;
        }
        const double mid = 0.5 * (params[i] + params[i + 1]);
        const double x = px + mid * dx;
        const double z = pz + mid * dz;
        const int col = std::clamp(static_cast<int>(std::floor((x + 0.5) / h)), 0, n - 1);
        const int row_from_bottom = std::clamp(static_cast<int>(std::floor((z + 0.5) / h)), 0, n - 1);
        const int row = n - 1 - row_from_bottom;
        const Index pixel = static_cast<Index>(row) * n + col;
        if (!segments.empty() && segments.back().pixel == pixel)
        {
            segments.back().length += length;
        }
        else
        {
            segments.push_back({pixel, length});
        }
    }
    return segments;
}

}  // namespace

LinearProblem radon_problem(int image_size, int n_angles, int n_rays, const Vector& ground_truth)
{
    if (image_size < 2)
    {
        throw std::invalid_argument("image_size must be >= 2");
    }
    if (n_angles < 1 || n_rays < 1)
    {
        throw std::invalid_argument("radon geometry needs at least one angle and one ray");
    }
    const Index d = static_cast<Index>(image_size) * image_size;
    if (ground_truth.size() != d)
    {
        throw std::invalid_argument("ground truth must have image_size^2 entries");
    }
    const Index rows = static_cast<Index>(n_angles) * n_rays;
    std::vector<Eigen::Triplet<double>> entries;
    BlockPartition blocks(static_cast<std::size_t>(n_angles));
    const double span = std::numbers::sqrt2;
    for (int a = 0; a < n_angles; ++a)
    {
        const double theta = a * std::numbers::pi / n_angles;
        for (int r = 0; r < n_rays; ++r)
        {
            const Index row = static_cast<Index>(a) * n_rays + r;
            const double offset = span * (-0.5 + (r + 0.5) / n_rays);
            for (const auto& segment : trace_ray(image_size, theta, offset))
            {
                entries.emplace_back(row, segment.pixel, segment.length);
            }
            blocks[static_cast<std::size_t>(a)].push_back(row);
        }
    }
    SparseMatrix op(rows, d);
    op.setFromTriplets(entries.begin(), entries.end());
    Vector data = op * ground_truth;
    LinearProblem problem(std::move(op), std::move(data), std::move(blocks), "radon");
    problem.set_ground_truth(ground_truth);
    return problem;
}

Vector shepp_logan_phantom(int image_size)
{
    if (image_size < 1)
    {
        throw std::invalid_argument("image_size must be positive");
    }
    struct Ellipse
    {
        double intensity, a, b, x0, y0, phi_degrees;
    };
    static constexpr Ellipse kEllipses[] = {
        {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
        {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
        {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
        {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
        {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
        {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
        {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
        {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
        {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
        {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
    };
    Vector image = Vector::Zero(static_cast<Index>(image_size) * image_size);
    for (int row = 0; row < image_size; ++row)
    {
        const double y = 1.0 - 2.0 * (row + 0.5) / image_size;
        for (int col = 0; col < image_size; ++col)
        {
            const double x = 2.0 * (col + 0.5) / image_size - 1.0;
            double value = 0.0;
            for (const auto& e : kEllipses)
            {
                const double phi = e.phi_degrees * std::numbers::pi / 180.0;
                const double u = (x - e.x0) * std::cos(phi) + (y - e.y0) * std::sin(phi);
                const double v = -(x - e.x0) * std::sin(phi) + (y - e.y0) * std::cos(phi);
                if ((u * u) / (e.a * e.a) + (v * v) / (e.b * e.b) <= 1.0)
                {
                    value += e.intensity;
                }
            }
            image[static_cast<Index>(row) * image_size + col] = value;
        }
    }
    return image;
}

LinearProblem diagonal_problem(std::size_t size, double solution_decay)
{
    if (size == 0)
    {
        throw std::invalid_argument("diagonal problem needs a positive size");
    }
    const Index n = static_cast<Index>(size);
    SparseMatrix op(n, n);
    std::vector<Eigen::Triplet<double>> entries;
    Vector solution(n);
    for (Index i = 0; i < n; ++i)
    {
        const double index = static_cast<double>(i + 1);
        entries.emplace_back(i, i, 1.0 / index);
        solution[i] = std::pow(index, -solution_decay);
    }
    op.setFromTriplets(entries.begin(), entries.end());
    Vector data = op * solution;
    LinearProblem problem(std::move(op), std::move(data), {}, "diagonal");
    ClosedForms forms;
    forms.min_norm = solution;
    problem.set_closed_forms(std::move(forms));
    problem.set_ground_truth(std::move(solution));
    return problem;
}

}  // namespace regdescent

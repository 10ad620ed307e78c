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

// Reference computations for the tests. They deliberately avoid the library's
// own solvers: dense factorizations replace the SVD oracles, central
// differences replace analytic gradients and a sampling tracer replaces the
// exact ray traversal.

#include "regdescent/problems.hpp"
#include "regdescent/types.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace regdescent::testing
{

inline DenseMatrix random_gaussian(Index rows, Index cols, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal;
    DenseMatrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
    {
        for (Index i = 0; i < rows; ++i)
        {
            m(i, j) = normal(rng);
        }
    }
    return m;
}

inline Vector random_vector(Index n, std::mt19937_64& rng)
{
    return random_gaussian(n, 1, rng).col(0);
}

/// Orthonormal columns from the QR factor of a Gaussian matrix.
inline DenseMatrix random_orthonormal(Index rows, Index cols, std::mt19937_64& rng)
{
    Eigen::HouseholderQR<DenseMatrix> qr(random_gaussian(rows, rows, rng));
    return qr.householderQ() * DenseMatrix::Identity(rows, cols);
}

/// rows x cols matrix of the given rank with singular values spread over [0.2, 5].
inline DenseMatrix random_operator(Index rows, Index cols, Index rank, std::mt19937_64& rng)
{
    const DenseMatrix u = random_orthonormal(rows, rank, rng);
    const DenseMatrix v = random_orthonormal(cols, rank, rng);
    Vector s(rank);
    for (Index i = 0; i < rank; ++i)
    {
        s[i] = rank == 1 ? 1.0 : 5.0 * std::pow(0.04, static_cast<double>(i) / static_cast<double>(rank - 1));
    }
    return u * s.asDiagonal() * v.transpose();
}

/// Minimum-norm least-squares solution through a complete orthogonal decomposition.
inline Vector dense_min_norm(const DenseMatrix& a, const Vector& y, double threshold = 1e-10)
{
    Eigen::CompleteOrthogonalDecomposition<DenseMatrix> cod(a);
    cod.setThreshold(threshold);
    return cod.solve(y);
}

/// Solves (A^T A + lambda I) x = A^T y by Cholesky.
inline Vector dense_tikhonov(const DenseMatrix& a, const Vector& y, double lambda)
{
    DenseMatrix gram = a.transpose() * a;
    gram.diagonal().array() += lambda;
    return gram.llt().solve(a.transpose() * y);
}

inline double regularized_value(const DenseMatrix& a, const Vector& y, const Vector& x, double lambda)
{
    return 0.5 * (a * x - y).squaredNorm() + 0.5 * lambda * x.squaredNorm();
}

inline Vector central_difference_gradient(const Objective& f, const Vector& x, double step)
{
    Vector g(x.size());
    Vector probe = x;
    for (Index i = 0; i < x.size(); ++i)
    {
        probe[i] = x[i] + step;
        const double up = f.value(probe);
        probe[i] = x[i] - step;
        const double down = f.value(probe);
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * step);
    }
    return g;
}

/**
 * Per-pixel intersection lengths of one ray through the unit square
 * [-1/2, 1/2]^2, by midpoint sampling of `samples` equal pieces. The ray is
 * offset * (cos t, sin t) + s * (-sin t, cos t); pixel rows run top to bottom.
 */
inline std::vector<double> sampled_ray(int n, double theta, double offset, int samples)
{
    std::vector<double> lengths(static_cast<std::size_t>(n) * n, 0.0);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double reach = 1.0;
    const double ds = 2.0 * reach / samples;
    for (int i = 0; i < samples; ++i)
    {
        const double t = -reach + (i + 0.5) * ds;
        const double x = offset * c - t * s;
        const double z = offset * s + t * c;
        if (x < -0.5 || x >= 0.5 || z < -0.5 || z >= 0.5)
        {
            continue;
        }
        const int col = static_cast<int>(std::floor((x + 0.5) * n));
        const int row = n - 1 - static_cast<int>(std::floor((z + 0.5) * n));
        lengths[static_cast<std::size_t>(row) * n + col] += ds;
    }
    return lengths;
}

}  // namespace regdescent::testing

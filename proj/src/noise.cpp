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

#include "regdescent/noise.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace regdescent
{

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t master_seed, std::uint64_t replica_index)
{
    return splitmix64(master_seed ^ splitmix64(replica_index));
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t replica_index)
    : master_seed_(master_seed),
      replica_index_(replica_index),
      engine_(mix_seed(master_seed, replica_index))
{
}

std::uint64_t RngStream::next_u64()
{
    ++counter_;
    return engine_();
}

double RngStream::uniform()
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::size_t RngStream::uniform_index(std::size_t n)
{
    if (n == 0)
    {
        throw std::invalid_argument("uniform_index over an empty range");
    }
    const std::uint64_t range = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t draw = next_u64();
    while (draw >= limit)
    {
        draw = next_u64();
    }
    return static_cast<std::size_t>(draw % range);
}

double RngStream::normal()
{
    if (has_spare_)
    {
        has_spare_ = false;
        return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do
    {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
}

void RngStream::fill_normal(Vector& out)
{
    for (Eigen::Index i = 0; i < out.size(); ++i)
    {
        out[i] = normal();
    }
}

std::string_view to_string(NoiseKind kind)
{
    switch (kind)
    {
    case NoiseKind::None:
        return "none";
    case NoiseKind::GaussianIso:
        return "gaussian_iso";
    case NoiseKind::AbcScaled:
        return "abc_scaled";
    }
    return "unknown";
}

NoiseKind parse_noise_kind(std::string_view text)
{
    for (NoiseKind kind : {NoiseKind::None, NoiseKind::GaussianIso, NoiseKind::AbcScaled})
    {
        if (to_string(kind) == text)
        {
            return kind;
        }
    }
    throw std::invalid_argument("unknown noise kind '" + std::string(text) + "'");
}

void NoiseModel::validate() const
{
    if (!std::isfinite(sigma) || sigma < 0.0)
    {
        throw std::invalid_argument("noise sigma must be non-negative");
    }
    if (!std::isfinite(a_coeff) || a_coeff < 0.0)
    {
        throw std::invalid_argument("noise a_coeff must be non-negative");
    }
}

double NoiseModel::constant_c(std::size_t dim) const
{
    return kind == NoiseKind::None ? 0.0 : static_cast<double>(dim) * sigma * sigma;
}

double NoiseModel::second_moment(double gap, std::size_t dim) const
{
    return constant_a() * gap + constant_c(dim);
}

void sample_noise(const NoiseModel& model, RngStream& stream, double gap, Vector& out)
{
    if (out.size() == 0)
    {
        throw std::invalid_argument("noise dimension must be positive");
    }
    if (gap < 0.0 || !std::isfinite(gap))
    {
        throw std::invalid_argument("optimality gap must be non-negative and finite");
    }
    switch (model.kind)
    {
    case NoiseKind::None:
        out.setZero();
        return;
    case NoiseKind::GaussianIso:
        stream.fill_normal(out);
        out *= model.sigma;
        return;
    case NoiseKind::AbcScaled:
    {
        const double dim = static_cast<double>(out.size());
        const double scale = std::sqrt(model.a_coeff * gap / dim + model.sigma * model.sigma);
        stream.fill_normal(out);
        out *= scale;
        return;
    }
    }
}

Vector sample_noise(const NoiseModel& model, RngStream& stream, double gap, std::size_t dim)
{
    if (dim == 0)
    {
        throw std::invalid_argument("noise dimension must be positive");
    }
    Vector out(static_cast<Eigen::Index>(dim));
    sample_noise(model, stream, gap, out);
    return out;
}

}  // namespace regdescent

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
#include <random>
#include <string_view>

namespace regdescent
{

/**
 * Deterministic per-replica random stream.
 *
 * The engine seed is mix_seed(master_seed, replica_index), a SplitMix64
 * finalizer applied to the master seed xor'ed with the SplitMix64 image of
 * the replica index. Normals use the Marsaglia polar method.
 */
class RngStream
{
public:
    explicit RngStream(std::uint64_t master_seed, std::uint64_t replica_index = 0);

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t replica_index() const { return replica_index_; }
    /// Raw 64-bit draws consumed so far.
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on {0, ..., n - 1}, unbiased.
    std::size_t uniform_index(std::size_t n);
    double normal();
    void fill_normal(Vector& out);

private:
    std::uint64_t master_seed_;
    std::uint64_t replica_index_;
    std::uint64_t counter_ = 0;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t mix_seed(std::uint64_t master_seed, std::uint64_t replica_index);

enum class NoiseKind
{
    None,
    GaussianIso,
    AbcScaled,
};

std::string_view to_string(NoiseKind kind);
NoiseKind parse_noise_kind(std::string_view text);

/// Additive gradient noise with E|D|^2 = A gap + C.
struct NoiseModel
{
    NoiseKind kind = NoiseKind::None;
    double sigma = 0.0;
    double a_coeff = 0.0;

    void validate() const;
    double constant_a() const { return kind == NoiseKind::AbcScaled ? a_coeff : 0.0; }
    double constant_c(std::size_t dim) const;
    double second_moment(double gap, std::size_t dim) const;
};

/// Writes one noise sample into out (which must already have the target dimension).
void sample_noise(const NoiseModel& model, RngStream& stream, double gap, Vector& out);
Vector sample_noise(const NoiseModel& model, RngStream& stream, double gap, std::size_t dim);

}  // namespace regdescent

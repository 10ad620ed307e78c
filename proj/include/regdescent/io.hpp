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

#include "regdescent/analysis.hpp"
#include "regdescent/optimizer.hpp"
#include "regdescent/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace regdescent
{

class IoError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Row-major text: a "rows cols" header line, then rows*cols numbers.
DenseMatrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const DenseMatrix& matrix);
/// A vector file is an n x 1 (or 1 x n) matrix file.
Vector read_vector(const std::filesystem::path& path);
void write_vector(const std::filesystem::path& path, const Vector& vector);

inline constexpr std::string_view kTrajectoryHeader = "k,alpha,lambda,f_gap,dist_sq_xstar,dist_sq_xlambda,energy,max_norm";

/// One row per recorded k; absent diagnostics are empty fields.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory);

/// Columns p,q,theoretical_exponent,empirical_exponent,valid.
void write_heatmap_csv(std::ostream& out, const SweepResult& sweep);

/// FNV-1a 64-bit hash, printed as 16 hex digits.
std::string fnv1a_hex(std::string_view text);

struct PlotSeries
{
    std::string label;
    std::vector<double> xs;
    std::vector<double> ys;
    std::string color = "#1f77b4";
    bool dashed = false;
};

struct PlotSpec
{
    std::string title;
    std::string x_label = "k";
    std::string y_label;
    std::vector<PlotSeries> series;
    /// Dashed reference line c k^(-exponent), anchored to the first series at its tail start.
    std::optional<double> guide_exponent;
    std::string digest;
};

/// Log-log line plot; non-positive points are skipped.
void write_loglog_svg(std::ostream& out, const PlotSpec& spec);

/// Theoretical (and, if present, empirical) exponent per (p, q) cell.
void write_heatmap_svg(std::ostream& out, const SweepResult& sweep, std::string_view digest);

void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace regdescent

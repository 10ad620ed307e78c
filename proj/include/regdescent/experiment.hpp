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
#include "regdescent/config.hpp"
#include "regdescent/optimizer.hpp"
#include "regdescent/oracles.hpp"
#include "regdescent/problems.hpp"
#include "regdescent/schedules.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace regdescent
{

enum ExitCode : int
{
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitAllDiverged = 3,
    kExitIo = 4,
    kExitOracleTooLarge = 5,
};

enum class ProblemKind
{
    Toy,
    Ode,
    Radon,
    Linear,
    Diagonal,
};

std::string_view to_string(ProblemKind kind);
ProblemKind parse_problem_kind(std::string_view text);

struct ProblemSpec
{
    ProblemKind kind = ProblemKind::Toy;
    // ode
    int mesh_exponent = 6;
    int n_obs = 16;
    std::uint64_t seed = 2024;
    // radon; an empty image_path means the Shepp-Logan phantom
    int image_size = 32;
    int n_angles = 8;
    int n_rays = 24;
    std::filesystem::path image_path;
    // linear
    std::filesystem::path matrix_path;
    std::filesystem::path y_path;
    // diagonal
    std::size_t size = 1000;
    double decay = 1.5;
};

struct SweepSpec
{
    RateMode mode = RateMode::L2;
    double xi = 1.0;
    std::vector<double> p_grid;
    std::vector<double> q_grid;
    bool empirical = false;
    std::size_t cell_cap = 64;
    double beta_gap = kDefaultBetaGap;
};

struct ExperimentConfig
{
    std::string name = "experiment";
    ProblemSpec problem;
    OptimizerConfig optimizer;
    std::filesystem::path x0_path;
    std::size_t n_replicas = 1;
    std::uint64_t master_seed = 0;
    std::filesystem::path output_dir = "out";
    bool emit_csv = true;
    bool emit_svg = true;
    bool emit_heatmap = false;
    /// Theory inputs for the printed reports and the guide line.
    std::optional<double> xi;
    std::optional<double> beta;
    std::optional<TheoremId> guide_theorem;
    double tail_fraction = kDefaultTailFraction;
    std::optional<SweepSpec> sweep;
    /// Descending lambda grid for the oracle command.
    std::vector<double> oracle_lambdas{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};

    /**
     * Relative paths are resolved against base_dir. Throws ConfigError on
     * unknown keys, bad values or missing referenced files.
     */
    static ExperimentConfig from_config(const Config& config, const std::filesystem::path& base_dir = {});
    Config to_config() const;
};

ExperimentConfig load_experiment(const std::filesystem::path& path);

/// Problem plus the best available diagnostic oracle.
struct ExperimentProblem
{
    std::unique_ptr<LinearProblem> problem;
    std::unique_ptr<DiagnosticOracle> oracle;
    /// Image side length for problems whose unknown is a square image, else 0.
    int image_side = 0;
};

LinearProblem build_problem(const ProblemSpec& spec);
/// Spectral oracle when the dimension allows it, else normal equations (no x_*).
std::unique_ptr<DiagnosticOracle> make_oracle(const LinearProblem& problem);
ExperimentProblem build_experiment_problem(const ExperimentConfig& config);

/// Theorem used for the plotted guide line when none is configured.
TheoremId default_guide_theorem(const OptimizerConfig& optimizer);

int cli_run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

struct ValidateRequest
{
    Exponent p = 0.0;
    Exponent q = 0.0;
    double c_alpha = 1.0;
    double c_lambda = 1.0;
    std::optional<double> xi;
    std::optional<double> beta;
    std::optional<double> smoothness;
};

int cli_validate(const ValidateRequest& request, std::ostream& out, std::ostream& err);
int cli_sweep(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int cli_oracle(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Hash of the canonical config (output_dir excluded), embedded in every SVG.
std::string config_digest(const ExperimentConfig& config);

}  // namespace regdescent

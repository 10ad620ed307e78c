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

#include "regdescent/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace regdescent;

namespace
{

struct Overrides
{
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::size_t> replicas;
};

void add_common(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--config", o.config_path, "experiment config file")->required();
    cmd->add_option("--seed", o.seed, "master seed override");
    cmd->add_option("--out", o.out_dir, "output directory override");
    cmd->add_option("--replicas", o.replicas, "replica count override")->check(CLI::PositiveNumber);
}

int with_config(const Overrides& o, int (*command)(const ExperimentConfig&, std::ostream&, std::ostream&))
{
    ExperimentConfig config;
    try
    {
        config = load_experiment(o.config_path);
    }
    catch (const ConfigError& e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    if (o.seed)
    {
        config.master_seed = *o.seed;
    }
    if (o.out_dir)
    {
        config.output_dir = *o.out_dir;
    }
    if (o.replicas)
    {
        config.n_replicas = *o.replicas;
    }
    return command(config, std::cout, std::cerr);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Tikhonov-regularized SGD with decaying regularization: runs, schedule checks, sweeps, oracles"};
    app.require_subcommand(1);

    Overrides run_opts;
    CLI::App* run = app.add_subcommand("run", "run an experiment and write CSV/SVG artifacts");
    add_common(run, run_opts);

    Overrides sweep_opts;
    CLI::App* sweep = app.add_subcommand("sweep", "theoretical and empirical (p, q) rate heatmaps");
    add_common(sweep, sweep_opts);

    Overrides oracle_opts;
    CLI::App* oracle = app.add_subcommand("oracle", "minimum-norm solution and Tikhonov path");
    add_common(oracle, oracle_opts);

    ValidateRequest request;
    std::string p_text;
    std::string q_text;
    CLI::App* validate = app.add_subcommand("validate", "check a schedule against every theorem");
    validate->add_option("--p", p_text, "regularization exponent (decimal or fraction)")->required();
    validate->add_option("--q", q_text, "step-size exponent (decimal or fraction)")->required();
    validate->add_option("--xi", request.xi, "Hoelder exponent of the Tikhonov path");
    validate->add_option("--beta", request.beta, "almost-sure rate parameter");
    validate->add_option("--c-alpha", request.c_alpha, "step-size prefactor");
    validate->add_option("--c-lambda", request.c_lambda, "regularization prefactor");
    validate->add_option("--L", request.smoothness, "smoothness constant");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (*run)
    {
        return with_config(run_opts, cli_run);
    }
    if (*sweep)
    {
        return with_config(sweep_opts, cli_sweep);
    }
    if (*oracle)
    {
        return with_config(oracle_opts, cli_oracle);
    }
    try
    {
        request.p = Exponent::parse(p_text);
        request.q = Exponent::parse(q_text);
    }
    catch (const std::invalid_argument& e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    return cli_validate(request, std::cout, std::cerr);
}

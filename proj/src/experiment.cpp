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

#include "regdescent/io.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace regdescent
{

std::string_view to_string(ProblemKind kind)
{
    switch (kind)
    {
    case ProblemKind::Toy:
        return "toy";
    case ProblemKind::Ode:
        return "ode";
    case ProblemKind::Radon:
        return "radon";
    case ProblemKind::Linear:
        return "linear";
    case ProblemKind::Diagonal:
        return "diagonal";
    }
    return "unknown";
}

ProblemKind parse_problem_kind(std::string_view text)
{
    for (ProblemKind k :
         {ProblemKind::Toy, ProblemKind::Ode, ProblemKind::Radon, ProblemKind::Linear, ProblemKind::Diagonal})
    {
        if (to_string(k) == text)
        {
            return k;
        }
    }
    throw ConfigError("unknown problem kind '" + std::string(text) + "'");
}

namespace
{

const std::set<std::string, std::less<>>& known_keys()
{
    static const std::set<std::string, std::less<>> keys = {
        "name",
        "problem.kind", "problem.mesh_exponent", "problem.n_obs", "problem.seed", "problem.image_size",
        "problem.n_angles", "problem.n_rays", "problem.image_path", "problem.matrix_path", "problem.y_path",
        "problem.size", "problem.decay",
        "schedule.c_alpha", "schedule.q", "schedule.c_lambda", "schedule.p", "schedule.k_start",
        "noise.kind", "noise.sigma", "noise.a_coeff",
        "optimizer.variant", "optimizer.n_iterations", "optimizer.batch_size", "optimizer.init",
        "optimizer.x0_path", "optimizer.record", "optimizer.record_ratio", "optimizer.record_stride",
        "optimizer.record_predecessors",
        "experiment.n_replicas", "experiment.master_seed", "experiment.output_dir", "experiment.emit",
        "experiment.xi", "experiment.beta", "experiment.guide_theorem", "experiment.tail_fraction",
        "sweep.mode", "sweep.xi", "sweep.p_grid", "sweep.q_grid", "sweep.empirical", "sweep.cell_cap",
        "sweep.beta_gap",
        "oracle.lambdas",
    };
    return keys;
}

std::filesystem::path resolve_input(const Config& config, std::string_view key, const std::filesystem::path& base)
{
    auto value = config.get(key);
    if (!value || value->empty())
    {
        return {};
    }
    std::filesystem::path path(*value);
    if (path.is_relative() && !base.empty())
    {
        path = base / path;
    }
    if (!std::filesystem::exists(path))
    {
        throw ConfigError("'" + std::string(key) + "': file not found: " + path.string());
    }
    return path;
}

template <typename Fn>
auto converting(std::string_view key, Fn&& fn) -> decltype(fn())
{
    try
    {
        return fn();
    }
    catch (const std::invalid_argument& e)
    {
        throw ConfigError("'" + std::string(key) + "': " + e.what());
    }
}

std::vector<double> parse_list(std::string_view text, std::string_view key)
{
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= text.size())
    {
        const std::size_t comma = text.find(',', start);
        values.push_back(parse_double(text.substr(start, comma == text.npos ? text.npos : comma - start), key));
        if (comma == std::string_view::npos)
        {
            break;
        }
        start = comma + 1;
    }
    return values;
}

std::string join(const std::vector<double>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        out += (i == 0 ? "" : ", ") + format_double(values[i]);
    }
    return out;
}

std::size_t positive_size(const Config& config, std::string_view key, std::int64_t fallback)
{
    const std::int64_t v = config.get_int(key, fallback);
    if (v < 1)
    {
        throw ConfigError("'" + std::string(key) + "' must be >= 1");
    }
    return static_cast<std::size_t>(v);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_config(const Config& config, const std::filesystem::path& base_dir)
{
    for (const auto& [key, value] : config.entries())
    {
        if (known_keys().count(key) == 0)
        {
            throw ConfigError("unknown key '" + key + "'");
        }
    }
    ExperimentConfig e;
    e.name = config.get_string("name", e.name);
    if (e.name.empty() || e.name.find_first_of("/\\") != std::string::npos)
    {
        throw ConfigError("'name' must be a non-empty file name stem");
    }

    ProblemSpec& p = e.problem;
    p.kind = parse_problem_kind(config.get_string("problem.kind", "toy"));
    p.mesh_exponent = static_cast<int>(config.get_int("problem.mesh_exponent", p.mesh_exponent));
    p.n_obs = static_cast<int>(config.get_int("problem.n_obs", p.n_obs));
    p.seed = config.get_u64("problem.seed", p.seed);
    p.image_size = static_cast<int>(config.get_int("problem.image_size", p.image_size));
    p.n_angles = static_cast<int>(config.get_int("problem.n_angles", p.n_angles));
    p.n_rays = static_cast<int>(config.get_int("problem.n_rays", p.n_rays));
    p.image_path = resolve_input(config, "problem.image_path", base_dir);
    p.matrix_path = resolve_input(config, "problem.matrix_path", base_dir);
    p.y_path = resolve_input(config, "problem.y_path", base_dir);
    p.size = positive_size(config, "problem.size", static_cast<std::int64_t>(p.size));
    p.decay = config.get_double("problem.decay", p.decay);
    if (p.kind == ProblemKind::Linear && (p.matrix_path.empty() || p.y_path.empty()))
    {
        throw ConfigError("linear problems need problem.matrix_path and problem.y_path");
    }

    OptimizerConfig& o = e.optimizer;
    PolynomialSchedule& s = o.schedule;
    s.c_alpha = config.get_double("schedule.c_alpha", s.c_alpha);
    s.c_lambda = config.get_double("schedule.c_lambda", s.c_lambda);
    if (auto q = config.get("schedule.q"))
    {
        s.q = converting("schedule.q", [&] { return Exponent::parse(*q); });
    }
    if (auto pe = config.get("schedule.p"))
    {
        s.p = converting("schedule.p", [&] { return Exponent::parse(*pe); });
    }
    s.k_start = config.get_int("schedule.k_start", s.k_start);

    o.noise.kind = converting("noise.kind", [&] { return parse_noise_kind(config.get_string("noise.kind", "none")); });
    o.noise.sigma = config.get_double("noise.sigma", o.noise.sigma);
    o.noise.a_coeff = config.get_double("noise.a_coeff", o.noise.a_coeff);

    o.variant = converting("optimizer.variant",
                           [&] { return parse_variant(config.get_string("optimizer.variant", "reg_sgd")); });
    o.n_iterations = config.get_int("optimizer.n_iterations", o.n_iterations);
    o.batch_size = positive_size(config, "optimizer.batch_size", 1);
    o.init = converting("optimizer.init",
                        [&] { return parse_initial_point(config.get_string("optimizer.init", "zero")); });
    e.x0_path = resolve_input(config, "optimizer.x0_path", base_dir);
    if (o.init == InitialPoint::Explicit && e.x0_path.empty())
    {
        throw ConfigError("optimizer.init = explicit needs optimizer.x0_path");
    }
    const std::string record = config.get_string("optimizer.record", "geometric");
    if (record == "geometric")
    {
        o.record.kind = RecordPolicy::Kind::Geometric;
    }
    else if (record == "arithmetic")
    {
        o.record.kind = RecordPolicy::Kind::Arithmetic;
    }
    else
    {
        throw ConfigError("optimizer.record must be geometric or arithmetic");
    }
    o.record.ratio = config.get_double("optimizer.record_ratio", o.record.ratio);
    o.record.stride = config.get_int("optimizer.record_stride", o.record.stride);
    o.record.include_predecessors = config.get_bool("optimizer.record_predecessors", false);
    if (!(o.record.ratio > 1.0) || o.record.stride < 1)
    {
        throw ConfigError("record_ratio must exceed 1 and record_stride must be >= 1");
    }

    e.n_replicas = positive_size(config, "experiment.n_replicas", 1);
    e.master_seed = config.get_u64("experiment.master_seed", 0);
    e.output_dir = config.get_string("experiment.output_dir", "out");
    if (auto emit = config.get("experiment.emit"))
    {
        e.emit_csv = e.emit_svg = e.emit_heatmap = false;
        std::stringstream items(*emit);
        std::string item;
        while (std::getline(items, item, ','))
        {
            item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }),
                       item.end());
            if (item == "csv")
            {
                e.emit_csv = true;
            }
            else if (item == "svg")
            {
                e.emit_svg = true;
            }
            else if (item == "heatmap")
            {
                e.emit_heatmap = true;
            }
            else if (!item.empty())
            {
                throw ConfigError("experiment.emit: unknown artifact '" + item + "'");
            }
        }
    }
    if (config.has("experiment.xi"))
    {
        e.xi = config.get_double("experiment.xi", 1.0);
    }
    if (config.has("experiment.beta"))
    {
        e.beta = config.get_double("experiment.beta", 0.0);
    }
    if (auto t = config.get("experiment.guide_theorem"))
    {
        e.guide_theorem = converting("experiment.guide_theorem", [&] { return parse_theorem_id(*t); });
    }
    e.tail_fraction = config.get_double("experiment.tail_fraction", e.tail_fraction);
    if (!(e.tail_fraction > 0.0 && e.tail_fraction <= 1.0))
    {
        throw ConfigError("experiment.tail_fraction must lie in (0, 1]");
    }

    const bool any_sweep = std::any_of(config.entries().begin(), config.entries().end(),
                                       [](const auto& kv) { return kv.first.rfind("sweep.", 0) == 0; });
    if (any_sweep)
    {
        SweepSpec sw;
        sw.mode = converting("sweep.mode", [&] { return parse_rate_mode(config.get_string("sweep.mode", "L2")); });
        sw.xi = config.get_double("sweep.xi", sw.xi);
        sw.p_grid = parse_grid(config.require("sweep.p_grid"));
        sw.q_grid = parse_grid(config.require("sweep.q_grid"));
        sw.empirical = config.get_bool("sweep.empirical", false);
        sw.cell_cap = positive_size(config, "sweep.cell_cap", 64);
        sw.beta_gap = config.get_double("sweep.beta_gap", sw.beta_gap);
        if (!(sw.xi > 0.0))
        {
            throw ConfigError("sweep.xi must be positive");
        }
        e.sweep = sw;
    }

    if (auto lambdas = config.get("oracle.lambdas"))
    {
        e.oracle_lambdas = parse_list(*lambdas, "oracle.lambdas");
        for (std::size_t i = 0; i < e.oracle_lambdas.size(); ++i)
        {
            if (!(e.oracle_lambdas[i] > 0.0) || (i > 0 && !(e.oracle_lambdas[i] < e.oracle_lambdas[i - 1])))
            {
                throw ConfigError("oracle.lambdas must be positive and strictly descending");
            }
        }
    }

    try
    {
        o.schedule.validate();
        o.noise.validate();
        if (o.n_iterations < 0)
        {
            throw std::invalid_argument("optimizer.n_iterations must be >= 0");
        }
    }
    catch (const std::invalid_argument& err)
    {
        throw ConfigError(err.what());
    }
    return e;
}

Config ExperimentConfig::to_config() const
{
    Config c;
    c.set("name", name);
    c.set("problem.kind", std::string(to_string(problem.kind)));
    switch (problem.kind)
    {
    case ProblemKind::Toy:
        break;
    case ProblemKind::Ode:
        c.set("problem.mesh_exponent", std::to_string(problem.mesh_exponent));
        c.set("problem.n_obs", std::to_string(problem.n_obs));
        c.set("problem.seed", std::to_string(problem.seed));
        break;
    case ProblemKind::Radon:
        c.set("problem.image_size", std::to_string(problem.image_size));
        c.set("problem.n_angles", std::to_string(problem.n_angles));
        c.set("problem.n_rays", std::to_string(problem.n_rays));
        if (!problem.image_path.empty())
        {
            c.set("problem.image_path", problem.image_path.string());
        }
        break;
    case ProblemKind::Linear:
        c.set("problem.matrix_path", problem.matrix_path.string());
        c.set("problem.y_path", problem.y_path.string());
        break;
    case ProblemKind::Diagonal:
        c.set("problem.size", std::to_string(problem.size));
        c.set("problem.decay", format_double(problem.decay));
        break;
    }
    const OptimizerConfig& o = optimizer;
    c.set("schedule.c_alpha", format_double(o.schedule.c_alpha));
    c.set("schedule.q", o.schedule.q.to_string());
    c.set("schedule.c_lambda", format_double(o.schedule.c_lambda));
    c.set("schedule.p", o.schedule.p.to_string());
    c.set("schedule.k_start", std::to_string(o.schedule.k_start));
    c.set("noise.kind", std::string(to_string(o.noise.kind)));
    c.set("noise.sigma", format_double(o.noise.sigma));
    c.set("noise.a_coeff", format_double(o.noise.a_coeff));
    c.set("optimizer.variant", std::string(to_string(o.variant)));
    c.set("optimizer.n_iterations", std::to_string(o.n_iterations));
    c.set("optimizer.batch_size", std::to_string(o.batch_size));
    c.set("optimizer.init", std::string(to_string(o.init)));
    if (!x0_path.empty())
    {
        c.set("optimizer.x0_path", x0_path.string());
    }
    c.set("optimizer.record", o.record.kind == RecordPolicy::Kind::Geometric ? "geometric" : "arithmetic");
    c.set("optimizer.record_ratio", format_double(o.record.ratio));
    c.set("optimizer.record_stride", std::to_string(o.record.stride));
    c.set("optimizer.record_predecessors", o.record.include_predecessors ? "true" : "false");
    c.set("experiment.n_replicas", std::to_string(n_replicas));
    c.set("experiment.master_seed", std::to_string(master_seed));
    c.set("experiment.output_dir", output_dir.string());
    std::vector<std::string> emit;
    if (emit_csv)
    {
        emit.emplace_back("csv");
    }
    if (emit_svg)
    {
        emit.emplace_back("svg");
    }
    if (emit_heatmap)
    {
        emit.emplace_back("heatmap");
    }
    std::string emit_text;
    for (std::size_t i = 0; i < emit.size(); ++i)
    {
        emit_text += (i == 0 ? "" : ", ") + emit[i];
    }
    c.set("experiment.emit", emit_text);
    if (xi)
    {
        c.set("experiment.xi", format_double(*xi));
    }
    if (beta)
    {
        c.set("experiment.beta", format_double(*beta));
    }
    if (guide_theorem)
    {
        c.set("experiment.guide_theorem", std::string(to_string(*guide_theorem)));
    }
    c.set("experiment.tail_fraction", format_double(tail_fraction));
    if (sweep)
    {
        c.set("sweep.mode", std::string(to_string(sweep->mode)));
        c.set("sweep.xi", format_double(sweep->xi));
        c.set("sweep.p_grid", join(sweep->p_grid));
        c.set("sweep.q_grid", join(sweep->q_grid));
        c.set("sweep.empirical", sweep->empirical ? "true" : "false");
        c.set("sweep.cell_cap", std::to_string(sweep->cell_cap));
        c.set("sweep.beta_gap", format_double(sweep->beta_gap));
    }
    c.set("oracle.lambdas", join(oracle_lambdas));
    return c;
}

ExperimentConfig load_experiment(const std::filesystem::path& path)
{
    const Config config = Config::load(path);
    return ExperimentConfig::from_config(config, path.parent_path());
}

LinearProblem build_problem(const ProblemSpec& spec)
{
    try
    {
        switch (spec.kind)
        {
        case ProblemKind::Toy:
            return toy_problem();
        case ProblemKind::Ode:
            return ode_problem(spec.mesh_exponent, spec.n_obs, spec.seed);
        case ProblemKind::Radon:
        {
            Vector truth;
            if (spec.image_path.empty())
            {
                truth = shepp_logan_phantom(spec.image_size);
            }
            else
            {
                const DenseMatrix image = read_matrix(spec.image_path);
                if (image.rows() != spec.image_size || image.cols() != spec.image_size)
                {
                    throw ConfigError("problem.image_path: expected a " + std::to_string(spec.image_size) + "x" +
                                      std::to_string(spec.image_size) + " image");
                }
                truth.resize(image.size());
                for (Eigen::Index i = 0; i < image.rows(); ++i)
                {
                    for (Eigen::Index j = 0; j < image.cols(); ++j)
                    {
                        truth[i * image.cols() + j] = image(i, j);
                    }
                }
            }
            return radon_problem(spec.image_size, spec.n_angles, spec.n_rays, truth);
        }
        case ProblemKind::Linear:
        {
            const DenseMatrix a = read_matrix(spec.matrix_path);
            Vector y = read_vector(spec.y_path);
            if (y.size() != a.rows())
            {
                throw ConfigError("problem.y_path: length " + std::to_string(y.size()) + " does not match " +
                                  std::to_string(a.rows()) + " matrix rows");
            }
            return LinearProblem::from_dense(a, std::move(y), {}, "linear");
        }
        case ProblemKind::Diagonal:
            return diagonal_problem(spec.size, spec.decay);
        }
    }
    catch (const std::invalid_argument& e)
    {
        throw ConfigError(e.what());
    }
    throw ConfigError("unknown problem kind");
}

std::unique_ptr<DiagnosticOracle> make_oracle(const LinearProblem& problem)
{
    if (problem.dimension() <= kSpectralOracleMaxDimension)
    {
        return std::make_unique<SpectralOracle>(problem);
    }
    return std::make_unique<NormalEquationsOracle>(problem);
}

ExperimentProblem build_experiment_problem(const ExperimentConfig& config)
{
    ExperimentProblem out;
    out.problem = std::make_unique<LinearProblem>(build_problem(config.problem));
    out.oracle = make_oracle(*out.problem);
    if (config.problem.kind == ProblemKind::Radon)
    {
        out.image_side = config.problem.image_size;
    }
    return out;
}

TheoremId default_guide_theorem(const OptimizerConfig& optimizer)
{
    return optimizer.variant == Variant::RegGd ? TheoremId::DetRate : TheoremId::AsRate;
}

std::string config_digest(const ExperimentConfig& config)
{
    // The output location does not change the experiment.
    Config canonical = config.to_config();
    canonical.erase("experiment.output_dir");
    return fnv1a_hex(canonical.serialize());
}

namespace
{

TheoryContext theory_context(const ExperimentConfig& config, double smoothness)
{
    TheoryContext context;
    context.xi = config.xi;
    context.beta = config.beta;
    context.smoothness = smoothness;
    return context;
}

std::vector<TheoremId> rate_theorems(Variant variant)
{
    switch (variant)
    {
    case Variant::RegSgd:
        return {TheoremId::L2Rate, TheoremId::AsRate};
    case Variant::RegGd:
        return {TheoremId::DetRate};
    case Variant::VanillaSgd:
        return {};
    }
    return {};
}

std::string brief(double v)
{
    std::ostringstream out;
    out << std::setprecision(6) << v;
    return out.str();
}

std::string replica_file(const std::string& name, std::size_t r, std::size_t total)
{
    std::ostringstream out;
    const auto width = std::to_string(total > 0 ? total - 1 : 0).size();
    out << name << "_replica_" << std::setw(static_cast<int>(width)) << std::setfill('0') << r << ".csv";
    return out.str();
}

void print_fit(std::ostream& out, std::string_view label, const std::vector<Index>& ks,
               const std::vector<double>& values, double tail, std::optional<double> predicted)
{
    if (values.empty())
    {
        return;
    }
    out << "fit " << label << ": ";
    try
    {
        const RateEstimate r = estimate_rate(ks, values, tail);
        out << "exponent " << brief(r.exponent) << " (r2 " << brief(r.r_squared) << ", "
            << r.n_points << " points";
        if (r.n_excluded > 0)
        {
            out << ", " << r.n_excluded << " excluded";
        }
        out << ")";
    }
    catch (const std::invalid_argument& e)
    {
        out << "n/a (" << e.what() << ")";
    }
    if (predicted)
    {
        out << ", predicted " << brief(*predicted);
    }
    out << '\n';
}

const char* kPalette[] = {"#c7c7c7", "#aec7e8", "#ffbb78", "#98df8a", "#ff9896",
                          "#c5b0d5", "#c49c94", "#f7b6d2", "#dbdb8d", "#9edae5"};

PlotSpec trajectory_plot(const MonteCarloResult& mc, const std::vector<double> Trajectory::*column,
                         std::string title, std::string y_label, std::optional<double> guide, std::string digest)
{
    PlotSpec spec;
    spec.title = std::move(title);
    spec.y_label = std::move(y_label);
    spec.guide_exponent = guide;
    spec.digest = std::move(digest);
    auto xs = [](const Trajectory& t) {
        std::vector<double> out(t.iterations.begin(), t.iterations.end());
        return out;
    };
    PlotSeries mean{"mean", xs(mc.mean), mc.mean.*column, "#d62728", false};
    spec.series.push_back(std::move(mean));
    std::size_t shown = 0;
    for (std::size_t r = 0; r < mc.replicas.size() && shown < 10; ++r)
    {
        if (mc.replicas[r].trajectory)
        {
            const Trajectory& t = *mc.replicas[r].trajectory;
            spec.series.push_back(PlotSeries{"replica " + std::to_string(r), xs(t), t.*column, kPalette[shown], false});
            ++shown;
        }
    }
    return spec;
}

void write_svg(const std::filesystem::path& path, const PlotSpec& spec)
{
    std::ostringstream svg;
    write_loglog_svg(svg, spec);
    write_text_file(path, svg.str());
}

}  // namespace

int cli_run(const ExperimentConfig& config, std::ostream& out, std::ostream& err)
{
    ExperimentProblem built;
    OptimizerConfig optimizer = config.optimizer;
    try
    {
        built = build_experiment_problem(config);
        if (optimizer.init == InitialPoint::Explicit)
        {
            optimizer.x0 = read_vector(config.x0_path);
        }
        optimizer.validate(built.problem->dimension());
        if (optimizer.variant != Variant::RegGd && optimizer.batch_size > built.problem->block_count())
        {
            throw ConfigError("optimizer.batch_size exceeds the problem's " +
                              std::to_string(built.problem->block_count()) + " blocks");
        }
        if (optimizer.noise.kind == NoiseKind::AbcScaled && !built.oracle->optimal_value())
        {
            throw ConfigError("abc_scaled noise needs f(x_*), which this problem's oracle cannot provide");
        }
    }
    catch (const ConfigError& e)
    {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (const IoError& e)
    {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    }
    catch (const std::invalid_argument& e)
    {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    const LinearProblem& problem = *built.problem;
    const DiagnosticOracle& oracle = *built.oracle;

    out << "problem " << problem.name() << ": d = " << problem.dimension() << ", rows = " << problem.rows()
        << ", blocks = " << problem.block_count() << ", L = " << format_double(problem.smoothness()) << '\n';
    out << "variant " << to_string(optimizer.variant) << ", N = " << optimizer.n_iterations << ", replicas = "
        << config.n_replicas << ", seed = " << config.master_seed << '\n';

    const TheoryContext context = theory_context(config, problem.smoothness());
    std::map<TheoremId, TheoremReport> reports;
    for (TheoremId id : kAllTheorems)
    {
        reports.emplace(id, predicted_rates(optimizer.schedule, id, context));
        out << reports.at(id).to_string();
    }
    for (TheoremId id : rate_theorems(optimizer.variant))
    {
        const TheoremReport& report = reports.at(id);
        if (!report.applies)
        {
            out << "warning: schedule fails " << to_string(id) << ":";
            for (std::size_t i = 0; i < report.violated_conditions.size(); ++i)
            {
                out << (i == 0 ? " " : "; ") << report.violated_conditions[i] << " violated";
            }
            out << '\n';
        }
    }
    if (optimizer.variant == Variant::VanillaSgd)
    {
        out << "note: vanilla SGD has no Tikhonov term; no rate theorem applies\n";
    }

    const TheoremId guide_id = config.guide_theorem.value_or(default_guide_theorem(optimizer));
    const TheoremReport& guide = reports.at(guide_id);

    MonteCarloResult mc;
    try
    {
        mc = monte_carlo(problem, optimizer, config.n_replicas, config.master_seed, &oracle);
    }
    catch (const std::invalid_argument& e)
    {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    for (std::size_t r = 0; r < mc.replicas.size(); ++r)
    {
        if (mc.replicas[r].diverged_at)
        {
            out << "replica " << r << " diverged at step " << *mc.replicas[r].diverged_at << '\n';
        }
    }
    if (mc.all_diverged())
    {
        err << "all " << mc.replicas.size() << " replicas diverged\n";
        return kExitAllDiverged;
    }

    const std::string digest = config_digest(config);
    try
    {
        std::filesystem::create_directories(config.output_dir);
        write_text_file(config.output_dir / (config.name + "_config.txt"), config.to_config().serialize());
        if (config.emit_csv)
        {
            for (std::size_t r = 0; r < mc.replicas.size(); ++r)
            {
                if (mc.replicas[r].trajectory)
                {
                    write_trajectory_csv(config.output_dir / replica_file(config.name, r, mc.replicas.size()),
                                         *mc.replicas[r].trajectory);
                }
            }
            write_trajectory_csv(config.output_dir / (config.name + "_mean.csv"), mc.mean);
        }
        if (config.emit_svg)
        {
            if (!mc.mean.f_gap.empty())
            {
                write_svg(config.output_dir / (config.name + "_f_gap.svg"),
                          trajectory_plot(mc, &Trajectory::f_gap, config.name + ": f(X_k) - f(x_*)", "f gap",
                                          guide.exponent(kFGap), digest));
            }
            if (!mc.mean.dist_sq_to_xstar.empty())
            {
                write_svg(config.output_dir / (config.name + "_dist_sq.svg"),
                          trajectory_plot(mc, &Trajectory::dist_sq_to_xstar, config.name + ": |X_k - x_*|^2",
                                          "squared distance", guide.exponent(kDistSqXStar), digest));
            }
            else if (!mc.mean.dist_sq_to_xlambda.empty())
            {
                write_svg(config.output_dir / (config.name + "_dist_sq.svg"),
                          trajectory_plot(mc, &Trajectory::dist_sq_to_xlambda,
                                          config.name + ": |X_k - x_lambda|^2", "squared distance",
                                          guide.exponent(kDistSqXLambda), digest));
            }
        }
    }
    catch (const IoError& e)
    {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    }
    catch (const std::filesystem::filesystem_error& e)
    {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    }

    out << "guide theorem " << to_string(guide_id) << '\n';
    const auto& ks = mc.mean.iterations;
    print_fit(out, "f_gap", ks, mc.mean.f_gap, config.tail_fraction, guide.exponent(kFGap));
    print_fit(out, "dist_sq_xstar", ks, mc.mean.dist_sq_to_xstar, config.tail_fraction,
              guide.exponent(kDistSqXStar));
    print_fit(out, "dist_sq_xlambda", ks, mc.mean.dist_sq_to_xlambda, config.tail_fraction,
              guide.exponent(kDistSqXLambda));
    print_fit(out, "energy", ks, mc.mean.energy, config.tail_fraction, guide.exponent(kEnergy));
    if (!mc.mean.dist_sq_to_xstar.empty())
    {
        out << "final mean dist_sq_xstar " << brief(mc.mean.dist_sq_to_xstar.back()) << '\n';
    }
    if (!mc.mean.max_norm.empty())
    {
        out << "max |X_k| over replicas " << brief(mc.mean.max_norm.back()) << '\n';
    }
    if (mc.n_diverged > 0)
    {
        out << mc.n_diverged << " of " << mc.replicas.size() << " replicas diverged\n";
    }
    out << "artifacts in " << config.output_dir.string() << '\n';
    return kExitOk;
}

int cli_validate(const ValidateRequest& request, std::ostream& out, std::ostream& err)
{
    PolynomialSchedule schedule;
    schedule.c_alpha = request.c_alpha;
    schedule.c_lambda = request.c_lambda;
    schedule.p = request.p;
    schedule.q = request.q;
    try
    {
        schedule.validate();
        TheoryContext context;
        context.xi = request.xi;
        context.beta = request.beta;
        context.smoothness = request.smoothness;
        out << "schedule: alpha_k = " << format_double(schedule.c_alpha) << " k^-" << schedule.q.to_string()
            << ", lambda_k = " << format_double(schedule.c_lambda) << " k^-" << schedule.p.to_string() << '\n';
        for (TheoremId id : kAllTheorems)
        {
            out << predicted_rates(schedule, id, context).to_string();
        }
    }
    catch (const std::invalid_argument& e)
    {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}

int cli_sweep(const ExperimentConfig& config, std::ostream& out, std::ostream& err)
{
    if (!config.sweep)
    {
        err << "config error: no [sweep] section\n";
        return kExitConfig;
    }
    const SweepSpec& sw = *config.sweep;
    const std::size_t cells = sw.p_grid.size() * sw.q_grid.size();
    if (sw.empirical && cells > sw.cell_cap)
    {
        err << "config error: empirical sweep has " << cells << " cells, cap is " << sw.cell_cap << '\n';
        return kExitConfig;
    }
    SweepResult result;
    try
    {
        if (sw.empirical)
        {
            ExperimentProblem built = build_experiment_problem(config);
            if (!built.oracle->min_norm())
            {
                throw ConfigError("empirical sweep needs x_*, which is unavailable for this problem size");
            }
            EmpiricalSweepOptions options;
            options.mode = sw.mode;
            options.xi = sw.xi;
            options.beta_gap = sw.beta_gap;
            options.tail_fraction = config.tail_fraction;
            result = empirical_sweep(*built.problem, config.optimizer, sw.p_grid, sw.q_grid, config.n_replicas,
                                     config.master_seed, *built.oracle, options);
        }
        else
        {
            result = theoretical_heatmap(sw.mode, sw.xi, sw.p_grid, sw.q_grid, sw.beta_gap);
        }
    }
    catch (const ConfigError& e)
    {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (const IoError& e)
    {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    }
    catch (const std::invalid_argument& e)
    {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    const SweepCell& best = result.best();
    out << "mode " << to_string(result.mode) << ", xi = " << format_double(result.xi) << ", " << cells << " cells\n";
    out << "theoretical max " << format_double(best.theoretical) << " at p = " << format_double(best.p)
        << ", q = " << format_double(best.q) << '\n';
    const OptimalSchedule optimum = optimal_schedule(result.xi, result.mode);
    out << "closed-form optimum p = " << format_double(optimum.p) << ", q = " << format_double(optimum.q)
        << ", rate = " << format_double(optimum.rate) << '\n';
    if (result.has_empirical)
    {
        for (const SweepCell& cell : result.cells)
        {
            out << "cell p = " << format_double(cell.p) << ", q = " << format_double(cell.q) << ": theory "
                << format_double(cell.theoretical) << ", empirical "
                << (cell.empirical ? format_double(*cell.empirical) : std::string("n/a"));
            if (!cell.message.empty())
            {
                out << " (" << cell.message << ")";
            }
            out << '\n';
        }
    }
    try
    {
        std::filesystem::create_directories(config.output_dir);
        std::ostringstream csv;
        write_heatmap_csv(csv, result);
        write_text_file(config.output_dir / (config.name + "_heatmap.csv"), csv.str());
        if (config.emit_svg || config.emit_heatmap)
        {
            std::ostringstream svg;
            write_heatmap_svg(svg, result, config_digest(config));
            write_text_file(config.output_dir / (config.name + "_heatmap.svg"), svg.str());
        }
    }
    catch (const IoError& e)
    {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    }
    catch (const std::filesystem::filesystem_error& e)
    {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    }
    out << "artifacts in " << config.output_dir.string() << '\n';
    return kExitOk;
}

int cli_oracle(const ExperimentConfig& config, std::ostream& out, std::ostream& err)
{
    std::unique_ptr<LinearProblem> problem;
    try
    {
        problem = std::make_unique<LinearProblem>(build_problem(config.problem));
    }
    catch (const ConfigError& e)
    {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (const IoError& e)
    {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    }
    if (problem->dimension() > kSpectralOracleMaxDimension)
    {
        err << "oracle: dimension " << problem->dimension() << " exceeds the dense SVD cap of "
            << kSpectralOracleMaxDimension << '\n';
        return kExitOracleTooLarge;
    }
    const SpectralDecomposition decomp = SpectralDecomposition::compute(problem->op());
    const Vector x_star = min_norm_solution(decomp, problem->data());
    const ViscosityCurve curve = viscosity_curve(decomp, problem->data(), config.oracle_lambdas);

    out << "problem " << problem->name() << ": d = " << problem->dimension() << ", rank = " << decomp.rank()
        << ", sigma_1 = " << format_double(decomp.singular_values().size() ? decomp.singular_values()[0] : 0.0)
        << '\n';
    out << "|x_*| = " << format_double(x_star.norm()) << '\n';
    if (problem->ground_truth())
    {
        out << "|x_* - ground truth| = " << format_double((x_star - *problem->ground_truth()).norm()) << '\n';
    }
    if (curve.xi_hat)
    {
        out << "fitted xi = " << format_double(*curve.xi_hat) << '\n';
    }
    else
    {
        out << "fitted xi = n/a (fewer than 3 usable points)\n";
    }
    try
    {
        std::filesystem::create_directories(config.output_dir);
        const int side = config.problem.kind == ProblemKind::Radon ? config.problem.image_size : 0;
        if (side > 0)
        {
            DenseMatrix image(side, side);
            for (int i = 0; i < side; ++i)
            {
                for (int j = 0; j < side; ++j)
                {
                    image(i, j) = x_star[i * side + j];
                }
            }
            write_matrix(config.output_dir / (config.name + "_xstar.txt"), image);
        }
        else
        {
            write_vector(config.output_dir / (config.name + "_xstar.txt"), x_star);
        }
        std::ostringstream csv;
        csv << "lambda,dist_to_xstar,norm_gap\n";
        for (const auto& point : curve.points)
        {
            csv << format_double(point.lambda) << ',' << format_double(point.dist_to_xstar) << ','
                << format_double(point.norm_gap) << '\n';
        }
        write_text_file(config.output_dir / (config.name + "_viscosity.csv"), csv.str());
    }
    catch (const IoError& e)
    {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    }
    catch (const std::filesystem::filesystem_error& e)
    {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    }
    out << "artifacts in " << config.output_dir.string() << '\n';
    return kExitOk;
}

}  // namespace regdescent

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

#include "regdescent/io.hpp"

#include "regdescent/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#ifndef REG_DESCENT_VERSION
#define REG_DESCENT_VERSION "unknown"
#endif

namespace regdescent
{

DenseMatrix read_matrix(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw IoError("cannot open matrix file '" + path.string() + "'");
    }
    long long rows = -1;
    long long cols = -1;
    if (!(in >> rows >> cols) || rows < 0 || cols < 0)
    {
        throw IoError("'" + path.string() + "': bad 'rows cols' header");
    }
    DenseMatrix matrix(rows, cols);
    for (long long i = 0; i < rows; ++i)
    {
        for (long long j = 0; j < cols; ++j)
        {
            std::string token;
            if (!(in >> token))
            {
                throw IoError("'" + path.string() + "': expected " + std::to_string(rows * cols) + " values");
            }
            try
            {
                matrix(i, j) = parse_double(token, path.string());
            }
            catch (const ConfigError& e)
            {
                throw IoError(e.what());
            }
        }
    }
    std::string extra;
    if (in >> extra)
    {
        throw IoError("'" + path.string() + "': trailing data after " + std::to_string(rows * cols) + " values");
    }
    return matrix;
}

void write_matrix(const std::filesystem::path& path, const DenseMatrix& matrix)
{
    std::ostringstream out;
    out << matrix.rows() << ' ' << matrix.cols() << '\n';
    for (Eigen::Index i = 0; i < matrix.rows(); ++i)
    {
        for (Eigen::Index j = 0; j < matrix.cols(); ++j)
        {
            out << (j == 0 ? "" : " ") << format_double(matrix(i, j));
        }
        out << '\n';
    }
    write_text_file(path, out.str());
}

Vector read_vector(const std::filesystem::path& path)
{
    const DenseMatrix m = read_matrix(path);
    if (m.cols() == 1)
    {
        return m.col(0);
    }
    if (m.rows() == 1)
    {
        return m.row(0).transpose();
    }
    throw IoError("'" + path.string() + "': expected a vector, got " + std::to_string(m.rows()) + "x" +
                  std::to_string(m.cols()));
}

void write_vector(const std::filesystem::path& path, const Vector& vector)
{
    write_matrix(path, DenseMatrix(vector));
}

namespace
{

void field(std::ostream& out, const std::vector<double>& column, std::size_t i)
{
    out << ',';
    if (i < column.size() && std::isfinite(column[i]))
    {
        out << format_double(column[i]);
    }
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& t)
{
    out << kTrajectoryHeader << '\n';
    for (std::size_t i = 0; i < t.size(); ++i)
    {
        out << t.iterations[i];
        field(out, t.alpha, i);
        field(out, t.lambda, i);
        field(out, t.f_gap, i);
        field(out, t.dist_sq_to_xstar, i);
        field(out, t.dist_sq_to_xlambda, i);
        field(out, t.energy, i);
        field(out, t.max_norm, i);
        out << '\n';
    }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory)
{
    std::ostringstream out;
    write_trajectory_csv(out, trajectory);
    write_text_file(path, out.str());
}

void write_heatmap_csv(std::ostream& out, const SweepResult& sweep)
{
    out << "p,q,theoretical_exponent,empirical_exponent,valid\n";
    for (const SweepCell& cell : sweep.cells)
    {
        const bool valid = sweep.has_empirical ? cell.valid : cell.theory_applies;
        out << format_double(cell.p) << ',' << format_double(cell.q) << ',' << format_double(cell.theoretical) << ','
            << (cell.empirical ? format_double(*cell.empirical) : std::string()) << ',' << (valid ? 1 : 0) << '\n';
    }
}

std::string fnv1a_hex(std::string_view text)
{
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text)
    {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << hash;
    return out.str();
}

namespace
{

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 150.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 52.0;

std::string escape(std::string_view text)
{
    std::string out;
    for (char c : text)
    {
        switch (c)
        {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

std::string num(double v)
{
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << v;
    return out.str();
}

void header(std::ostream& out, std::string_view digest)
{
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<!-- generator: reg_descent " << REG_DESCENT_VERSION << " -->\n";
    out << "<!-- config-digest: fnv1a64:" << digest << " -->\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

struct LogAxis
{
    double lo;
    double hi;
    double pixel_lo;
    double pixel_hi;

    double map(double v) const
    {
        return pixel_lo + (std::log10(v) - lo) / (hi - lo) * (pixel_hi - pixel_lo);
    }
};

}  // namespace

void write_loglog_svg(std::ostream& out, const PlotSpec& spec)
{
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    double ymin = xmin;
    double ymax = -xmin;
    for (const auto& s : spec.series)
    {
        for (std::size_t i = 0; i < std::min(s.xs.size(), s.ys.size()); ++i)
        {
            if (s.xs[i] > 0 && s.ys[i] > 0 && std::isfinite(s.ys[i]))
            {
                xmin = std::min(xmin, s.xs[i]);
                xmax = std::max(xmax, s.xs[i]);
                ymin = std::min(ymin, s.ys[i]);
                ymax = std::max(ymax, s.ys[i]);
            }
        }
    }
    header(out, spec.digest);
    out << "<text x=\"" << num(kWidth / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">"
        << escape(spec.title) << "</text>\n";
    if (!(xmin < xmax) || !(ymin <= ymax))
    {
        out << "<text x=\"" << num(kWidth / 2) << "\" y=\"" << num(kHeight / 2)
            << "\" text-anchor=\"middle\">no positive data</text>\n</svg>\n";
        return;
    }
    const LogAxis x{std::floor(std::log10(xmin)), std::ceil(std::log10(xmax)), kLeft, kWidth - kRight};
    double ylo = std::floor(std::log10(ymin));
    double yhi = std::ceil(std::log10(ymax));
    if (ylo == yhi)
    {
        yhi += 1;
    }
    const LogAxis y{ylo, yhi, kHeight - kBottom, kTop};

    out << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
    for (int e = static_cast<int>(x.lo); e <= static_cast<int>(x.hi); ++e)
    {
        const double px = x.map(std::pow(10.0, e));
        out << "<line x1=\"" << num(px) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(px) << "\" y2=\""
            << num(kHeight - kBottom) << "\"/>\n";
    }
    for (int e = static_cast<int>(y.lo); e <= static_cast<int>(y.hi); ++e)
    {
        const double py = y.map(std::pow(10.0, e));
        out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py) << "\" x2=\"" << num(kWidth - kRight)
            << "\" y2=\"" << num(py) << "\"/>\n";
    }
    out << "</g>\n";
    out << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(kWidth - kLeft - kRight)
        << "\" height=\"" << num(kHeight - kTop - kBottom) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int e = static_cast<int>(x.lo); e <= static_cast<int>(x.hi); ++e)
    {
        out << "<text x=\"" << num(x.map(std::pow(10.0, e))) << "\" y=\"" << num(kHeight - kBottom + 16)
            << "\" text-anchor=\"middle\">1e" << e << "</text>\n";
    }
    for (int e = static_cast<int>(y.lo); e <= static_cast<int>(y.hi); ++e)
    {
        out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y.map(std::pow(10.0, e)) + 4)
            << "\" text-anchor=\"end\">1e" << e << "</text>\n";
    }
    out << "<text x=\"" << num((kLeft + kWidth - kRight) / 2) << "\" y=\"" << num(kHeight - 12)
        << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << num((kTop + kHeight - kBottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << num((kTop + kHeight - kBottom) / 2) << ")\">" << escape(spec.y_label) << "</text>\n";

    double legend_y = kTop + 10;
    auto legend = [&](const std::string& label, const std::string& color, bool dashed) {
        out << "<line x1=\"" << num(kWidth - kRight + 10) << "\" y1=\"" << num(legend_y) << "\" x2=\""
            << num(kWidth - kRight + 30) << "\" y2=\"" << num(legend_y) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"" << (dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
        out << "<text x=\"" << num(kWidth - kRight + 34) << "\" y=\"" << num(legend_y + 4) << "\">" << escape(label)
            << "</text>\n";
        legend_y += 16;
    };

    for (const auto& s : spec.series)
    {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
            << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
        bool first = true;
        for (std::size_t i = 0; i < std::min(s.xs.size(), s.ys.size()); ++i)
        {
            if (s.xs[i] > 0 && s.ys[i] > 0 && std::isfinite(s.ys[i]))
            {
                out << (first ? "" : " ") << num(x.map(s.xs[i])) << ',' << num(y.map(s.ys[i]));
                first = false;
            }
        }
        out << "\"/>\n";
        legend(s.label, s.color, s.dashed);
    }

    if (spec.guide_exponent && !spec.series.empty())
    {
        // Anchor at the middle of the first series so the slope is comparable by eye.
        const PlotSeries& s = spec.series.front();
        std::vector<std::size_t> usable;
        for (std::size_t i = 0; i < std::min(s.xs.size(), s.ys.size()); ++i)
        {
            if (s.xs[i] > 0 && s.ys[i] > 0 && std::isfinite(s.ys[i]))
            {
                usable.push_back(i);
            }
        }
        if (!usable.empty())
        {
            const std::size_t anchor = usable[usable.size() / 2];
            const double c = s.ys[anchor] * std::pow(s.xs[anchor], *spec.guide_exponent);
            const double x0 = s.xs[anchor];
            const double x1 = xmax;
            double y0 = c * std::pow(x0, -*spec.guide_exponent);
            double y1 = c * std::pow(x1, -*spec.guide_exponent);
            y0 = std::clamp(y0, std::pow(10.0, y.lo), std::pow(10.0, y.hi));
            y1 = std::clamp(y1, std::pow(10.0, y.lo), std::pow(10.0, y.hi));
            out << "<line x1=\"" << num(x.map(x0)) << "\" y1=\"" << num(y.map(y0)) << "\" x2=\"" << num(x.map(x1))
                << "\" y2=\"" << num(y.map(y1)) << "\" stroke=\"black\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n";
            std::ostringstream label;
            label << "k^-" << std::setprecision(3) << *spec.guide_exponent;
            legend(label.str(), "black", true);
        }
    }
    out << "</svg>\n";
}

namespace
{

std::string heat_color(double value, double vmax)
{
    if (!(vmax > 0.0) || value <= 0.0)
    {
        return "#f0f0f0";
    }
    const double t = std::clamp(value / vmax, 0.0, 1.0);
    // White to dark blue.
    const int r = static_cast<int>(std::lround(255 * (1 - t) + 8 * t));
    const int g = static_cast<int>(std::lround(255 * (1 - t) + 48 * t));
    const int b = static_cast<int>(std::lround(255 * (1 - t) + 107 * t));
    std::ostringstream out;
    out << '#' << std::hex << std::setfill('0') << std::setw(2) << r << std::setw(2) << g << std::setw(2) << b;
    return out.str();
}

void heat_panel(std::ostream& out, const SweepResult& sweep, bool empirical, double x0, double width,
                std::string_view title)
{
    const double y0 = kTop;
    const double height = kHeight - kTop - kBottom;
    const std::size_t np = sweep.p_grid.size();
    const std::size_t nq = sweep.q_grid.size();
    const double cw = width / static_cast<double>(np);
    const double ch = height / static_cast<double>(nq);
    double vmax = 0.0;
    for (const auto& cell : sweep.cells)
    {
        vmax = std::max(vmax, empirical ? cell.empirical.value_or(0.0) : cell.theoretical);
    }
    out << "<text x=\"" << num(x0 + width / 2) << "\" y=\"" << num(y0 - 8) << "\" text-anchor=\"middle\">"
        << escape(title) << " (max " << format_double(vmax) << ")</text>\n";
    for (std::size_t i = 0; i < np; ++i)
    {
        for (std::size_t j = 0; j < nq; ++j)
        {
            const SweepCell& cell = sweep.at(i, j);
            const double v = empirical ? (cell.valid ? cell.empirical.value_or(0.0) : 0.0) : cell.theoretical;
            // q grows upwards.
            out << "<rect x=\"" << num(x0 + i * cw) << "\" y=\"" << num(y0 + height - (j + 1) * ch) << "\" width=\""
                << num(cw + 0.3) << "\" height=\"" << num(ch + 0.3) << "\" fill=\"" << heat_color(v, vmax)
                << "\"/>\n";
        }
    }
    if (!empirical)
    {
        const std::size_t i = sweep.argmax / nq;
        const std::size_t j = sweep.argmax % nq;
        out << "<rect x=\"" << num(x0 + i * cw) << "\" y=\"" << num(y0 + height - (j + 1) * ch) << "\" width=\""
            << num(cw) << "\" height=\"" << num(ch) << "\" fill=\"none\" stroke=\"red\" stroke-width=\"1.5\"/>\n";
    }
    out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(width) << "\" height=\""
        << num(height) << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(x0 + width / 2) << "\" y=\"" << num(kHeight - 24) << "\" text-anchor=\"middle\">p ["
        << format_double(sweep.p_grid.front()) << ", " << format_double(sweep.p_grid.back()) << "]</text>\n";
    out << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(y0 + height / 2)
        << "\" text-anchor=\"end\">q</text>\n";
    out << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(y0 + height) << "\" text-anchor=\"end\">"
        << format_double(sweep.q_grid.front()) << "</text>\n";
    out << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(y0 + 10) << "\" text-anchor=\"end\">"
        << format_double(sweep.q_grid.back()) << "</text>\n";
}

}  // namespace

void write_heatmap_svg(std::ostream& out, const SweepResult& sweep, std::string_view digest)
{
    header(out, digest);
    const std::string mode(to_string(sweep.mode));
    if (sweep.has_empirical)
    {
        const double width = (kWidth - 2 * kLeft - 20) / 2;
        heat_panel(out, sweep, false, kLeft, width, "theory " + mode + ", xi=" + format_double(sweep.xi));
        heat_panel(out, sweep, true, 2 * kLeft + width - 20, width, "empirical");
    }
    else
    {
        heat_panel(out, sweep, false, kLeft, kWidth - kLeft - 40, "theory " + mode + ", xi=" + format_double(sweep.xi));
    }
    out << "</svg>\n";
}

void write_text_file(const std::filesystem::path& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        throw IoError("cannot write '" + path.string() + "'");
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out)
    {
        throw IoError("write failed for '" + path.string() + "'");
    }
}

}  // namespace regdescent

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

#include "regdescent/regression.hpp"

#include <algorithm>
#include <stdexcept>

namespace regdescent
{

LineFit fit_line(std::span<const double> xs, std::span<const double> ys)
{
    if (xs.size() != ys.size())
    {
        throw std::invalid_argument("fit_line: length mismatch");
    }
    const std::size_t n = xs.size();
    if (n < 2)
    {
        throw std::invalid_argument("fit_line: need at least two points");
    }
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double dx = xs[i] - mean_x;
        const double dy = ys[i] - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0)
    {
        throw std::invalid_argument("fit_line: x values are all equal");
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    fit.n_points = n;
    if (syy == 0.0)
    {
        fit.r_squared = 1.0;
    }
    else
    {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
            ss_res += r * r;
        }
        fit.r_squared = std::max(0.0, 1.0 - ss_res / syy);
    }
    return fit;
}

}  // namespace regdescent

#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace sctree {

/// Discrete-time controlled system with box state/control constraints.
/// Scalar state and control; costs are nonnegative by convention.
struct SystemModel {
    int horizon = 0;
    double x_min = 0.0, x_max = 0.0;
    double u_min = 0.0, u_max = 0.0;
    double x0 = 0.0;
    std::function<double(int, double, double, double)> dynamics;      // (k, x, u, w)
    std::function<double(int, double, double, double)> running_cost;  // (k, x, u, w)
    std::function<double(double)> terminal_cost;
};

/// Throws std::runtime_error when bounds are inverted, x0 leaves X, the
/// horizon is not positive, or a cost/dynamics callback is missing.
void validate_model(const SystemModel& model);

/// The benchmark plant: x_{k+1} = 0.9 x_k + u_k - w_k, running cost u_k^2,
/// terminal cost (-2 - x_N)^2, X = [-2, 2], U = [0, 1.6], x_0 = 1.8.
SystemModel reference_plant(int horizon = 10);

/// Uniform state/control grids spanning the box bounds inclusive.
/// Point counts are round((max-min)/step)+1, values are evenly spaced so
/// both endpoints are exact grid points.
struct Grid {
    double x_min = 0.0, x_max = 0.0, x_step = 0.0;
    double u_min = 0.0, u_max = 0.0, u_step = 0.0;
    std::vector<double> x_values;
    std::vector<double> u_values;

    int nx() const { return static_cast<int>(x_values.size()); }
    int nu() const { return static_cast<int>(u_values.size()); }
    double x(int i) const { return x_values[static_cast<std::size_t>(i)]; }
    double u(int i) const { return u_values[static_cast<std::size_t>(i)]; }

    /// Nearest x grid index; exact midpoints round up, results clamp to the
    /// grid range.
    int resolve_x(double value) const {
        if (x_values.size() < 2) return 0;
        const double spacing = (x_max - x_min) / static_cast<double>(x_values.size() - 1);
        const long idx = std::lround((value - x_min) / spacing);
        if (idx < 0) return 0;
        if (idx >= static_cast<long>(x_values.size())) return nx() - 1;
        return static_cast<int>(idx);
    }
};

Grid make_grid(const SystemModel& model, double x_step = 0.02, double u_step = 0.02);

/// Grid from explicit bounds, used when loading a stored policy.
Grid make_grid(double x_min, double x_max, double x_step, double u_min, double u_max,
               double u_step);

}  // namespace sctree

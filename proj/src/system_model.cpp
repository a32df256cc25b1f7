#include "sctree/system_model.hpp"

#include <stdexcept>

namespace sctree {

void validate_model(const SystemModel& model) {
    if (model.horizon <= 0) throw std::runtime_error("system model: horizon must be positive");
    if (!(model.x_min < model.x_max)) throw std::runtime_error("system model: x bounds inverted");
    if (!(model.u_min <= model.u_max)) throw std::runtime_error("system model: u bounds inverted");
    if (model.x0 < model.x_min || model.x0 > model.x_max)
        throw std::runtime_error("system model: x0 outside the state bounds");
    if (!model.dynamics || !model.running_cost || !model.terminal_cost)
        throw std::runtime_error("system model: missing dynamics or cost callback");
}

SystemModel reference_plant(int horizon) {
    SystemModel model;
    model.horizon = horizon;
    model.x_min = -2.0;
    model.x_max = 2.0;
    model.u_min = 0.0;
    model.u_max = 1.6;
    model.x0 = 1.8;
    model.dynamics = [](int, double x, double u, double w) { return 0.9 * x + u - w; };
    model.running_cost = [](int, double, double u, double) { return u * u; };
    model.terminal_cost = [](double x) { return (-2.0 - x) * (-2.0 - x); };
    validate_model(model);
    return model;
}

namespace {

std::vector<double> spread(double lo, double hi, double step) {
    if (lo == hi) return {lo};
    const int count = static_cast<int>(std::lround((hi - lo) / step)) + 1;
    std::vector<double> values(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        values[static_cast<std::size_t>(i)] =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return values;
}

}  // namespace

Grid make_grid(const SystemModel& model, double x_step, double u_step) {
    validate_model(model);
    return make_grid(model.x_min, model.x_max, x_step, model.u_min, model.u_max, u_step);
}

Grid make_grid(double x_min, double x_max, double x_step, double u_min, double u_max,
               double u_step) {
    if (!(x_step > 0.0) || !(u_step > 0.0))
        throw std::runtime_error("grid: step sizes must be positive");
    if (!(x_min < x_max)) throw std::runtime_error("grid: x bounds inverted");
    if (!(u_min <= u_max)) throw std::runtime_error("grid: u bounds inverted");
    Grid grid;
    grid.x_min = x_min;
    grid.x_max = x_max;
    grid.x_step = x_step;
    grid.u_min = u_min;
    grid.u_max = u_max;
    grid.u_step = u_step;
    grid.x_values = spread(x_min, x_max, x_step);
    grid.u_values = spread(u_min, u_max, u_step);
    return grid;
}

}  // namespace sctree

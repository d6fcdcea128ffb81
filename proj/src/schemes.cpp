#include "cevsim/schemes.hpp"

#include <cmath>
#include <sstream>

#include "cevsim/step_kernel.hpp"

namespace cevsim {

std::string_view to_string(SchemeId scheme) {
    switch (scheme) {
        case SchemeId::SMS: return "sms";
        case SchemeId::PMS: return "pms";
        case SchemeId::SES: return "ses";
        case SchemeId::AIS: return "ais";
    }
    return "?";
}

SchemeId scheme_from_string(std::string_view name) {
    if (name == "sms" || name == "SMS") return SchemeId::SMS;
    if (name == "pms" || name == "PMS") return SchemeId::PMS;
    if (name == "ses" || name == "SES") return SchemeId::SES;
    if (name == "ais" || name == "AIS") return SchemeId::AIS;
    throw std::invalid_argument("unknown scheme id: " + std::string(name));
}

namespace {

void require_step_inputs(double dt, double x, const char* op) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument(std::string(op) + ": dt must be positive");
    }
    if (!(x >= 0.0)) {
        throw std::invalid_argument(std::string(op) + ": state must be nonnegative");
    }
}

detail::SqrtImplicitCoeffs ais_coeffs(const CevModel& model, double dt) {
    if (model.alpha != 0.5) {
        throw UnsupportedParameters("ais: requires alpha = 1/2");
    }
    if (!model.drift.is_linear()) {
        throw UnsupportedParameters("ais: requires a linear drift a - b*x");
    }
    const auto& lin = model.drift.as_linear();
    if (!(4.0 * lin.level > model.sigma * model.sigma)) {
        std::ostringstream msg;
        msg << "ais: requires 4a > sigma^2 (a = " << lin.level
            << ", sigma^2 = " << model.sigma * model.sigma << ")";
        throw UnsupportedParameters(msg.str());
    }
    if (!(1.0 + 0.5 * lin.reversion * dt > 0.0)) {
        throw UnsupportedParameters("ais: requires 1 + b*dt/2 > 0");
    }
    return detail::SqrtImplicitCoeffs{lin.level, lin.reversion, model.sigma};
}

} // namespace

StepOutcome sms_step(const CevModel& model, double dt, double x, double dw) {
    require_step_inputs(dt, x, "sms_step");
    const double z = detail::StepCoeffs(model).milstein_z(x, dt, dw);
    return StepOutcome{std::abs(z), z, z <= 0.0};
}

StepOutcome pms_step(const CevModel& model, double dt, double x, double dw) {
    require_step_inputs(dt, x, "pms_step");
    const double z = detail::StepCoeffs(model).milstein_z(x, dt, dw);
    return StepOutcome{z > 0.0 ? z : 0.0, z, z <= 0.0};
}

StepOutcome ses_step(const CevModel& model, double dt, double x, double dw) {
    require_step_inputs(dt, x, "ses_step");
    const double z = detail::StepCoeffs(model).euler_z(x, dt, dw);
    return StepOutcome{std::abs(z), z, z <= 0.0};
}

StepOutcome ais_step(const CevModel& model, double dt, double x, double dw) {
    require_step_inputs(dt, x, "ais_step");
    const double y = ais_coeffs(model, dt).next_y(std::sqrt(x), dt, dw);
    const double next = y * y;
    return StepOutcome{next, next, false};
}

SchemePath SchemePath::from_states(GridSpec grid, std::vector<double> states) {
    if (states.size() != grid.n_steps + 1) {
        throw std::invalid_argument("SchemePath::from_states: need n_steps + 1 states");
    }
    SchemePath path{grid, std::move(states), 0, 0.0};
    const double dt = grid.dt();
    double integral = 0.0;
    for (std::uint64_t k = 0; k < grid.n_steps; ++k) {
        integral += 0.5 * dt * (path.states[k] + path.states[k + 1]);
    }
    path.integral_trapezoid = integral;
    return path;
}

SchemePath simulate_path(SchemeId scheme, const CevModel& model,
                         const BrownianGrid& brownian) {
    if (brownian.spec.horizon != model.horizon) {
        throw std::invalid_argument("simulate_path: grid horizon differs from model horizon");
    }
    const GridSpec grid = brownian.spec;
    const double dt = grid.dt();

    SchemePath path;
    path.grid = grid;
    path.states.resize(grid.n_steps + 1);
    path.states[0] = model.x0;

    double integral = 0.0;
    std::uint64_t reflections = 0;

    if (scheme == SchemeId::AIS) {
        const auto coeffs = ais_coeffs(model, dt);
        double y = std::sqrt(model.x0);
        double x = model.x0;
        for (std::uint64_t k = 0; k < grid.n_steps; ++k) {
            y = coeffs.next_y(y, dt, brownian.increments[k]);
            const double next = y * y;
            integral += 0.5 * dt * (x + next);
            x = next;
            path.states[k + 1] = next;
        }
    } else {
        const detail::StepCoeffs coeffs(model);
        const bool milstein = scheme != SchemeId::SES;
        const bool project = scheme == SchemeId::PMS;
        double x = model.x0;
        for (std::uint64_t k = 0; k < grid.n_steps; ++k) {
            const double z = milstein ? coeffs.milstein_z(x, dt, brownian.increments[k])
                                      : coeffs.euler_z(x, dt, brownian.increments[k]);
            if (z <= 0.0) ++reflections;
            const double next = project ? (z > 0.0 ? z : 0.0) : std::abs(z);
            integral += 0.5 * dt * (x + next);
            x = next;
            path.states[k + 1] = next;
        }
    }
    path.integral_trapezoid = integral;
    path.reflect_count = reflections;
    return path;
}

CevModel inverse_cev_model(const ThreeHalvesModel& m, double horizon) {
    if (!(m.c1 > 0.0 && m.c2 > 0.0 && m.c3 >= 0.0 && m.r0 > 0.0)) {
        throw std::invalid_argument(
            "inverse_cev_model: require c1, c2, r0 > 0 and c3 >= 0");
    }
    return CevModel(1.0 / m.r0, m.c3, 0.5,
                    DriftSpec::linear(m.c1 + m.c3 * m.c3, m.c1 * m.c2), horizon);
}

SchemePath simulate_three_halves(const ThreeHalvesModel& m, const BrownianGrid& brownian) {
    const CevModel v_model = inverse_cev_model(m, brownian.spec.horizon);

    // v is driven by B = -W.
    BrownianGrid negated = brownian;
    for (double& dw : negated.increments) dw = -dw;
    const SchemePath v_path = simulate_path(SchemeId::SMS, v_model, negated);

    SchemePath path;
    path.grid = v_path.grid;
    path.reflect_count = v_path.reflect_count;
    path.states.resize(v_path.states.size());
    const double dt = path.grid.dt();
    double integral = 0.0;
    for (std::size_t k = 0; k < v_path.states.size(); ++k) {
        const double v = v_path.states[k];
        if (v == 0.0) {
            std::ostringstream msg;
            msg << "simulate_three_halves: v state hit 0 at step " << k;
            throw ZeroStateInversion(msg.str());
        }
        path.states[k] = 1.0 / v;
        if (k > 0) integral += 0.5 * dt * (path.states[k - 1] + path.states[k]);
    }
    path.integral_trapezoid = integral;
    return path;
}

} // namespace cevsim

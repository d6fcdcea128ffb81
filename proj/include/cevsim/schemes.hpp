#ifndef CEVSIM_SCHEMES_HPP
#define CEVSIM_SCHEMES_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cevsim/model.hpp"
#include "cevsim/paths.hpp"

namespace cevsim {

struct UnsupportedParameters : std::runtime_error {
    explicit UnsupportedParameters(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroStateInversion : std::runtime_error {
    explicit ZeroStateInversion(const std::string& what) : std::runtime_error(what) {}
};

// SMS: Milstein step + absolute value. PMS: Milstein step + positive part.
// SES: Euler step + absolute value. AIS: drift-implicit square-root Euler,
// explicit only in the CIR case (alpha = 1/2, linear drift).
enum class SchemeId { SMS, PMS, SES, AIS };

std::string_view to_string(SchemeId scheme);
SchemeId scheme_from_string(std::string_view name);

struct StepOutcome {
    double next_state;
    // Raw increment value before symmetrization/projection. AIS has no such
    // value; it reports next_state here and never sets `reflected`.
    double pre_reflection_z;
    bool reflected; // pre_reflection_z <= 0
};

StepOutcome sms_step(const CevModel& model, double dt, double x, double dw);
StepOutcome pms_step(const CevModel& model, double dt, double x, double dw);
StepOutcome ses_step(const CevModel& model, double dt, double x, double dw);
// Requires alpha = 1/2, linear drift a - b*x with 4a > sigma^2, and
// 1 + b*dt/2 > 0; throws UnsupportedParameters otherwise.
StepOutcome ais_step(const CevModel& model, double dt, double x, double dw);

struct SchemePath {
    GridSpec grid;
    std::vector<double> states; // n_steps + 1 values, states[0] = x0
    std::uint64_t reflect_count = 0;
    double integral_trapezoid = 0.0;

    // Builds a path from explicit states, recomputing the trapezoid integral.
    static SchemePath from_states(GridSpec grid, std::vector<double> states);
};

SchemePath simulate_path(SchemeId scheme, const CevModel& model,
                         const BrownianGrid& brownian);

// dr = c1 r (c2 - r) dt + c3 r^{3/2} dW, simulated through v = 1/r: the
// inverse solves a CIR-type equation in the Brownian motion B = -W, is run
// with the SMS, and is inverted pathwise.
struct ThreeHalvesModel {
    double c1;
    double c2;
    double c3;
    double r0;
};

// The induced model for v = 1/r: dv = ((c1 + c3^2) - c1 c2 v) dt + c3 sqrt(v) dB.
CevModel inverse_cev_model(const ThreeHalvesModel& m, double horizon);

// Throws ZeroStateInversion if the simulated v path touches 0 exactly.
SchemePath simulate_three_halves(const ThreeHalvesModel& m, const BrownianGrid& brownian);

} // namespace cevsim

#endif // CEVSIM_SCHEMES_HPP

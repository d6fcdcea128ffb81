#ifndef CEVSIM_MODEL_HPP
#define CEVSIM_MODEL_HPP

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>

namespace cevsim {

// Raised when b(0) <= 2*alpha*(1-alpha)^2*sigma^2, in which case the
// equilibrium level x_bar and the maximum step size are undefined.
struct NonPositiveBSigma : std::runtime_error {
    explicit NonPositiveBSigma(const std::string& what) : std::runtime_error(what) {}
};

struct LinearDrift {
    double level;     // a in b(x) = a - b*x
    double reversion; // b
};

struct CustomDrift {
    std::function<double(double)> evaluator;
    double lipschitz_k;  // declared, not derived
    double value_at_zero; // declared b(0); cross-checked against evaluator(0)
};

// Drift coefficient of the SDE. Linear drifts carry their constants exactly;
// custom drifts declare K and b(0) since neither is mechanically derivable
// from a black-box evaluator.
class DriftSpec {
public:
    static DriftSpec linear(double level, double reversion);
    static DriftSpec custom(std::function<double(double)> evaluator,
                            double lipschitz_k, double value_at_zero);

    double operator()(double x) const;

    double value_at_zero() const;
    double lipschitz_constant() const;
    bool is_linear() const { return std::holds_alternative<LinearDrift>(impl_); }
    const LinearDrift& as_linear() const { return std::get<LinearDrift>(impl_); }

private:
    explicit DriftSpec(std::variant<LinearDrift, CustomDrift> impl) : impl_(std::move(impl)) {}
    std::variant<LinearDrift, CustomDrift> impl_;
};

double drift_eval(const DriftSpec& drift, double x);

// dX = b(X) dt + sigma |X|^alpha dW on [0, horizon], X_0 = x0 > 0.
// sigma = 0 is accepted so the deterministic degenerate cases remain
// expressible; alpha is restricted to [1/2, 1).
struct CevModel {
    CevModel(double x0, double sigma, double alpha, DriftSpec drift, double horizon);

    double x0;
    double sigma;
    double alpha;
    DriftSpec drift;
    double horizon;
};

// Constants derived from the model parameters: the drift margin b_sigma(alpha),
// the effective Lipschitz rate K(alpha), their ratio x_bar, and the largest
// admissible step size. x_bar and delta_max exist only when b_sigma > 0.
class DerivedConstants {
public:
    double b_sigma_alpha() const { return b_sigma_; }
    double k_alpha() const { return k_alpha_; }
    double x_bar() const;     // throws NonPositiveBSigma when b_sigma <= 0
    double delta_max() const; // throws NonPositiveBSigma when b_sigma <= 0

private:
    friend DerivedConstants derive_constants(const CevModel&);
    double b_sigma_ = 0.0;
    double k_alpha_ = 0.0;
    double x_bar_ = 0.0;
    double delta_max_ = 0.0;
    bool defined_ = false;
};

DerivedConstants derive_constants(const CevModel& model);

struct HypothesisReport {
    bool h1_ok = false;
    std::map<double, bool> h2_i_ok_for_p;
    bool h2_ii_assumed = false; // true when drift smoothness cannot be checked
    std::string notes;
};

// Evaluates the sufficient moment conditions for the requested order p.
// Failing them never blocks a simulation; the report is informational.
HypothesisReport check_hypotheses(const CevModel& model, double p);

} // namespace cevsim

#endif // CEVSIM_MODEL_HPP

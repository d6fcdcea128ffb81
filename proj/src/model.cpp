#include "cevsim/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace cevsim {

namespace {

// Treat alpha as 1/2 inside this window; the exponent in K(alpha) is a 0/0
// form there and the limit value is exact.
constexpr double kAlphaHalfWindow = 1e-8;

bool is_alpha_half(double alpha) { return std::abs(2.0 * alpha - 1.0) < kAlphaHalfWindow; }

} // namespace

DriftSpec DriftSpec::linear(double level, double reversion) {
    if (!(level > 0.0)) {
        throw std::invalid_argument("DriftSpec::linear: drift level a must be positive");
    }
    return DriftSpec(LinearDrift{level, reversion});
}

DriftSpec DriftSpec::custom(std::function<double(double)> evaluator,
                            double lipschitz_k, double value_at_zero) {
    if (!evaluator) {
        throw std::invalid_argument("DriftSpec::custom: evaluator must be callable");
    }
    if (!(value_at_zero > 0.0)) {
        throw std::invalid_argument("DriftSpec::custom: declared b(0) must be positive");
    }
    if (!(lipschitz_k >= 0.0)) {
        throw std::invalid_argument("DriftSpec::custom: declared Lipschitz constant must be nonnegative");
    }
    const double at_zero = evaluator(0.0);
    if (std::abs(at_zero - value_at_zero) > 1e-12 * std::abs(value_at_zero)) {
        std::ostringstream msg;
        msg << "DriftSpec::custom: evaluator(0) = " << at_zero
            << " disagrees with declared b(0) = " << value_at_zero;
        throw std::invalid_argument(msg.str());
    }
    return DriftSpec(CustomDrift{std::move(evaluator), lipschitz_k, value_at_zero});
}

double DriftSpec::operator()(double x) const {
    if (const auto* lin = std::get_if<LinearDrift>(&impl_)) {
        return lin->level - lin->reversion * x;
    }
    return std::get<CustomDrift>(impl_).evaluator(x);
}

double DriftSpec::value_at_zero() const {
    if (const auto* lin = std::get_if<LinearDrift>(&impl_)) {
        return lin->level;
    }
    return std::get<CustomDrift>(impl_).value_at_zero;
}

double DriftSpec::lipschitz_constant() const {
    if (const auto* lin = std::get_if<LinearDrift>(&impl_)) {
        return std::abs(lin->reversion);
    }
    return std::get<CustomDrift>(impl_).lipschitz_k;
}

double drift_eval(const DriftSpec& drift, double x) { return drift(x); }

CevModel::CevModel(double x0_, double sigma_, double alpha_, DriftSpec drift_, double horizon_)
    : x0(x0_), sigma(sigma_), alpha(alpha_), drift(std::move(drift_)), horizon(horizon_) {
    if (!(x0 > 0.0)) throw std::invalid_argument("CevModel: x0 must be positive");
    if (!(sigma >= 0.0)) throw std::invalid_argument("CevModel: sigma must be nonnegative");
    if (!(alpha >= 0.5 && alpha < 1.0)) {
        throw std::invalid_argument("CevModel: alpha must lie in [0.5, 1)");
    }
    if (!(horizon > 0.0)) throw std::invalid_argument("CevModel: horizon must be positive");
    if (!(drift.value_at_zero() > 0.0)) {
        throw std::invalid_argument("CevModel: b(0) must be positive");
    }
}

double DerivedConstants::x_bar() const {
    if (!defined_) {
        throw NonPositiveBSigma("x_bar undefined: b_sigma(alpha) <= 0");
    }
    return x_bar_;
}

double DerivedConstants::delta_max() const {
    if (!defined_) {
        throw NonPositiveBSigma("delta_max undefined: b_sigma(alpha) <= 0");
    }
    return delta_max_;
}

DerivedConstants derive_constants(const CevModel& model) {
    const double alpha = model.alpha;
    const double sigma2 = model.sigma * model.sigma;
    const double b0 = model.drift.value_at_zero();
    const double big_k = model.drift.lipschitz_constant();

    DerivedConstants out;
    out.b_sigma_ = b0 - 2.0 * (1.0 - alpha) * (1.0 - alpha) * alpha * sigma2;

    if (is_alpha_half(alpha)) {
        out.k_alpha_ = big_k;
    } else {
        // [2(1-alpha)]^(-2(1-alpha)/(2alpha-1)) via log/exp; both factors are
        // well conditioned away from alpha = 1/2.
        const double two_one_minus_a = 2.0 * (1.0 - alpha);
        const double expo = -two_one_minus_a / (2.0 * alpha - 1.0);
        const double bracket = std::exp(expo * std::log(two_one_minus_a));
        out.k_alpha_ = big_k + 0.5 * alpha * sigma2 * (2.0 * alpha - 1.0) * bracket;
    }

    if (out.b_sigma_ > 0.0) {
        out.defined_ = true;
        out.x_bar_ = out.b_sigma_ / out.k_alpha_;
        const double first = model.x0 / ((1.0 - std::sqrt(alpha)) * out.b_sigma_);
        double second;
        if (is_alpha_half(alpha)) {
            second = std::min(big_k > 0.0 ? 1.0 / (4.0 * big_k)
                                          : std::numeric_limits<double>::infinity(),
                              model.x0);
        } else {
            second = 1.0 / (4.0 * alpha * out.k_alpha_);
        }
        out.delta_max_ = std::min(first, second);
    }
    return out;
}

HypothesisReport check_hypotheses(const CevModel& model, double p) {
    if (!(p >= 1.0)) {
        throw std::invalid_argument("check_hypotheses: moment order p must be >= 1");
    }
    const double sigma2 = model.sigma * model.sigma;
    const double b0 = model.drift.value_at_zero();
    const double big_k = model.drift.lipschitz_constant();

    HypothesisReport report;
    report.h1_ok = (big_k > 0.0) && (b0 > 0.0) &&
                   (model.alpha >= 0.5 && model.alpha < 1.0);
    report.h2_ii_assumed = !model.drift.is_linear();

    std::ostringstream notes;
    bool ok;
    if (model.alpha > 0.5) {
        ok = b0 > 2.0 * model.alpha * (1.0 - model.alpha) * (1.0 - model.alpha) * sigma2;
        notes << "alpha > 1/2: condition b(0) > 2*alpha*(1-alpha)^2*sigma^2 = "
              << 2.0 * model.alpha * (1.0 - model.alpha) * (1.0 - model.alpha) * sigma2;
    } else {
        const double threshold = 3.0 * (2.0 * std::max(p, 2.0) + 1.0) * sigma2 / 2.0;
        ok = b0 > threshold;
        notes << "alpha = 1/2: condition b(0) > 3*(2*max(p,2)+1)*sigma^2/2 = " << threshold
              << "; alternative local-error form 3*(2p+1)*sigma^2/2 = "
              << 3.0 * (2.0 * p + 1.0) * sigma2 / 2.0
              << " (gates use the first form)";
    }
    report.h2_i_ok_for_p[p] = ok;
    if (!ok) {
        notes << "; condition violated - it is sufficient, not necessary, so "
                 "simulation proceeds";
    }
    if (report.h2_ii_assumed) {
        notes << "; custom drift smoothness (C^2, polynomially growing b'') is "
                 "assumed, not verified";
    }
    report.notes = notes.str();
    return report;
}

} // namespace cevsim

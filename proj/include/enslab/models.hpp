// The four imperfect forecast models: a truncated Taylor expansion of the
// exponential (I), a truncated log-space expansion (II), a Fourier series fit
// over [0, pi] (III), and a parameter-shifted copy of the system (IV).
#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <cfloat>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "enslab/chaos.hpp"
#include "enslab/errors.hpp"

namespace enslab {

enum class ModelId { I = 0, II = 1, III = 2, IV = 3 };

inline const char* model_name(ModelId id) {
    switch (id) {
        case ModelId::I: return "I";
        case ModelId::II: return "II";
        case ModelId::III: return "III";
        case ModelId::IV: return "IV";
    }
    return "?";
}

constexpr std::array<ModelId, 4> all_models{ModelId::I, ModelId::II, ModelId::III, ModelId::IV};

enum class CoefficientRounding { half_away_from_zero, truncate };

struct PolynomialModel {
    std::vector<double> coefficients;
    int truncation_decimals = 0;
};

struct FourierModel {
    std::vector<double> a_coeffs;  // a0..a10
    std::vector<double> b_coeffs;  // b1..b10
};

struct ShiftedModel {
    double delta = 0.02;
    double lambda = 3.0;
};

namespace detail {

// Exact decimal reduction of the positive rational num/den: the stored
// coefficient is (num/den) rounded (or truncated) at `decimals` places,
// computed in integer arithmetic so no binary-float artifact leaks in.
inline double reduce_rational(std::uint64_t num, std::uint64_t den, int decimals,
                              CoefficientRounding mode) {
    std::uint64_t scale = 1;
    for (int i = 0; i < decimals; ++i) scale *= 10;
    // scaled = num*10^decimals / den, rounded per mode
    unsigned __int128 n = static_cast<unsigned __int128>(num) * scale;
    std::uint64_t q;
    if (mode == CoefficientRounding::half_away_from_zero)
        q = static_cast<std::uint64_t>((2 * n + den) / (2 * static_cast<unsigned __int128>(den)));
    else
        q = static_cast<std::uint64_t>(n / den);
    return static_cast<double>(q) / static_cast<double>(scale);
}

inline std::uint64_t factorial_u64(unsigned k) {
    std::uint64_t f = 1;
    for (unsigned i = 2; i <= k; ++i) f *= i;
    return f;
}

inline std::uint64_t pow_u64(std::uint64_t base, unsigned k) {
    std::uint64_t p = 1;
    for (unsigned i = 0; i < k; ++i) p *= base;
    return p;
}

}  // namespace detail

// Coefficients of (1-x)^k, k = 0..12: 3^k/k! reduced to 3 decimals.
inline PolynomialModel build_model_one(
    CoefficientRounding mode = CoefficientRounding::half_away_from_zero) {
    PolynomialModel m;
    m.truncation_decimals = 3;
    for (unsigned k = 0; k <= 12; ++k)
        m.coefficients.push_back(
            detail::reduce_rational(detail::pow_u64(3, k), detail::factorial_u64(k), 3, mode));
    return m;
}

// Coefficients of (log x)^k, k = 1..8: -2 for k=1 and -3/k! for k>=2,
// reduced to 4 decimals.
inline PolynomialModel build_model_two(
    CoefficientRounding mode = CoefficientRounding::half_away_from_zero) {
    PolynomialModel m;
    m.truncation_decimals = 4;
    m.coefficients.push_back(-detail::reduce_rational(2, 1, 4, mode));
    for (unsigned k = 2; k <= 8; ++k)
        m.coefficients.push_back(-detail::reduce_rational(3, detail::factorial_u64(k), 4, mode));
    return m;
}

// Fourier coefficients of x e^{lambda(1-x)} over [0, pi] by adaptive
// Gauss-Kronrod quadrature, absolute accuracy 1e-8.
inline FourierModel build_model_three(double lambda, double abs_tol = 1e-8) {
    using boost::math::quadrature::gauss_kronrod;
    FourierModel m;
    const double pi = 3.14159265358979323846;
    auto coefficient = [&](int i, bool cosine) {
        auto f = [&](double x) {
            double base = x * std::exp(lambda * (1.0 - x));
            return cosine ? base * std::cos(2.0 * i * x) : base * std::sin(2.0 * i * x);
        };
        double err = 0.0;
        double v = gauss_kronrod<double, 61>::integrate(f, 0.0, pi, 15, 1e-14, &err);
        if (!(err <= abs_tol))
            throw QuadratureError(err, "Fourier coefficient quadrature did not reach tolerance");
        return v * 2.0 / pi;
    };
    for (int i = 0; i <= 10; ++i) m.a_coeffs.push_back(coefficient(i, true));
    for (int i = 1; i <= 10; ++i) m.b_coeffs.push_back(coefficient(i, false));
    return m;
}

struct ModelBank {
    PolynomialModel one;
    PolynomialModel two;
    FourierModel three;
    ShiftedModel four;
};

inline ModelBank build_model_bank(
    double lambda = 3.0,
    CoefficientRounding mode = CoefficientRounding::half_away_from_zero) {
    ModelBank b;
    b.one = build_model_one(mode);
    b.two = build_model_two(mode);
    b.three = build_model_three(lambda);
    b.four = ShiftedModel{0.02, lambda};
    return b;
}

inline double model_one_step(const PolynomialModel& m, double x) {
    if (!std::isfinite(x) || x < 0.0)
        throw std::domain_error("model I: input state out of domain");
    double u = 1.0 - x;
    double p = 0.0;
    for (std::size_t k = m.coefficients.size(); k-- > 0;) p = p * u + m.coefficients[k];
    return x * p;
}

// Evaluated in log space throughout one step; exp underflow is clamped to
// DBL_MIN so trash trajectories stay positive instead of taking log(0).
inline double model_two_step(const PolynomialModel& m, double x) {
    if (!std::isfinite(x) || x <= 0.0)
        throw std::domain_error("model II: input state out of log domain");
    double u = std::log(x);
    double p = 0.0;
    for (std::size_t k = m.coefficients.size(); k-- > 0;) p = p * u + m.coefficients[k];
    double lf = p * u;  // coefficients start at k=1
    double f = std::exp(lf);
    if (f <= 0.0 || !std::isfinite(f)) {
        if (lf > 0.0) throw std::domain_error("model II: overflow in log-space step");
        f = DBL_MIN;
    }
    return f;
}

inline double model_three_step(const FourierModel& m, double x) {
    if (!std::isfinite(x)) throw std::domain_error("model III: non-finite input state");
    double v = 0.5 * m.a_coeffs[0];
    for (std::size_t i = 1; i < m.a_coeffs.size(); ++i) {
        double arg = 2.0 * static_cast<double>(i) * x;
        v += m.a_coeffs[i] * std::cos(arg) + m.b_coeffs[i - 1] * std::sin(arg);
    }
    return v;
}

inline double model_four_step(const ShiftedModel& m, double x) {
    if (!std::isfinite(x) || x < 0.0)
        throw std::domain_error("model IV: input state out of domain");
    return x * std::exp(m.lambda * (1.0 - m.delta - x));
}

inline double model_step(const ModelBank& bank, ModelId id, double x) {
    switch (id) {
        case ModelId::I: return model_one_step(bank.one, x);
        case ModelId::II: return model_two_step(bank.two, x);
        case ModelId::III: return model_three_step(bank.three, x);
        case ModelId::IV: return model_four_step(bank.four, x);
    }
    throw std::logic_error("model_step: bad model id");
}

// (initial condition, model-minus-system error after `steps` iterations),
// initial conditions sampled from the natural measure via a long run.
template <typename Stepper>
std::vector<std::pair<double, double>> error_pairs_against_system(
    Stepper&& model_step_fn, const SystemParams& params, std::size_t n_points,
    unsigned steps, std::uint64_t rng_seed) {
    if (n_points == 0) throw std::invalid_argument("error_pairs_against_system: n_points must be >= 1");
    if (steps != 1 && steps != 2)
        throw std::invalid_argument("error_pairs_against_system: steps must be 1 or 2");
    Trajectory traj = generate_trajectory(params, 0.3, n_points, rng_seed);
    std::vector<std::pair<double, double>> out;
    out.reserve(n_points);
    for (double x0 : traj.states) {
        double xm = x0, xs = x0;
        for (unsigned s = 0; s < steps; ++s) {
            xm = model_step_fn(xm);
            xs = system_step(xs, params.lambda);
        }
        out.emplace_back(x0, xm - xs);
    }
    return out;
}

inline std::vector<std::pair<double, double>> model_error_histogram(
    const ModelBank& bank, ModelId id, const SystemParams& params,
    std::size_t n_points, unsigned steps, std::uint64_t rng_seed) {
    return error_pairs_against_system(
        [&](double x) { return model_step(bank, id, x); }, params, n_points, steps, rng_seed);
}

}  // namespace enslab

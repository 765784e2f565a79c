// Predictive densities: Gaussian kernel dressing of an ensemble, a kernel
// climatology, the climatology blend, multi-model mixtures, and the
// Ignorance score.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "enslab/stats.hpp"

namespace enslab {

inline constexpr double inv_sqrt_2pi = 0.39894228040143267794;

struct DressedDensity {
    std::vector<double> centers;
    double sigma = 1.0;
};

// p(y) = (1/(N sigma)) sum_i K((y - x_i)/sigma), K standard normal.
inline double dressed_pdf(const DressedDensity& d, double y) {
    if (!(d.sigma > 0.0)) throw std::invalid_argument("dressed_pdf: sigma must be > 0");
    if (d.centers.empty()) throw std::invalid_argument("dressed_pdf: no centers");
    double s = 0.0;
    for (double c : d.centers) {
        double z = (y - c) / d.sigma;
        s += std::exp(-0.5 * z * z);
    }
    return s * inv_sqrt_2pi / (static_cast<double>(d.centers.size()) * d.sigma);
}

struct Climatology {
    std::vector<double> sample;
    double bandwidth = 0.0;
};

// Gaussian KDE with Silverman's bandwidth 0.9 min(sd, IQR/1.34) n^{-1/5}.
inline Climatology make_climatology(std::vector<double> sample) {
    if (sample.size() < 2048)
        throw std::invalid_argument("make_climatology: need at least 2048 samples");
    Climatology c;
    double sd = sample_sd(sample);
    double spread = std::min(sd, iqr(sample) / 1.34);
    c.bandwidth = 0.9 * spread * std::pow(static_cast<double>(sample.size()), -0.2);
    if (!(c.bandwidth > 0.0))
        throw std::invalid_argument("make_climatology: degenerate sample, zero bandwidth");
    c.sample = std::move(sample);
    return c;
}

inline double climatology_pdf(const Climatology& c, double y) {
    if (c.sample.empty()) throw std::invalid_argument("climatology_pdf: empty climatology");
    double s = 0.0;
    for (double x : c.sample) {
        double z = (y - x) / c.bandwidth;
        s += std::exp(-0.5 * z * z);
    }
    return s * inv_sqrt_2pi / (static_cast<double>(c.sample.size()) * c.bandwidth);
}

struct BlendedDensity {
    DressedDensity model_part;
    const Climatology* climo = nullptr;
    double alpha = 0.0;
};

inline double blend_values(double pm, double pc, double alpha) {
    return alpha * pm + (1.0 - alpha) * pc;
}

inline double blended_pdf(const BlendedDensity& b, double y) {
    if (b.alpha < 0.0 || b.alpha > 1.0)
        throw std::invalid_argument("blended_pdf: alpha outside [0,1]");
    if (!b.climo) throw std::invalid_argument("blended_pdf: missing climatology");
    return blend_values(dressed_pdf(b.model_part, y), climatology_pdf(*b.climo, y), b.alpha);
}

struct WeightVector {
    std::vector<double> omega;  // indexed by model, one lead at a time
};

struct MultiModelDensity {
    std::vector<BlendedDensity> components;
    WeightVector weights;
};

inline double multimodel_pdf(const MultiModelDensity& m, double y) {
    if (m.components.size() != m.weights.omega.size())
        throw std::invalid_argument("multimodel_pdf: component/weight size mismatch");
    double wsum = 0.0;
    for (double w : m.weights.omega) {
        if (w < 0.0) throw std::invalid_argument("multimodel_pdf: negative weight");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-12)
        throw std::invalid_argument("multimodel_pdf: weights must sum to 1");
    double v = 0.0;
    for (std::size_t i = 0; i < m.components.size(); ++i)
        v += m.weights.omega[i] * blended_pdf(m.components[i], y);
    return v;
}

// -log2 p(Y). Zero density is a hard bust: +inf sentinel, never clipped.
inline double ignorance(double p_at_outcome) {
    if (p_at_outcome < 0.0) throw std::invalid_argument("ignorance: negative density");
    if (p_at_outcome == 0.0) return std::numeric_limits<double>::infinity();
    return -std::log2(p_at_outcome);
}

inline double empirical_ignorance(const std::vector<double>& densities_at_outcomes) {
    if (densities_at_outcomes.empty())
        throw std::invalid_argument("empirical_ignorance: empty archive");
    double s = 0.0;
    for (double p : densities_at_outcomes) s += ignorance(p);
    return s / static_cast<double>(densities_at_outcomes.size());
}

}  // namespace enslab

// Parameter fitting by empirical-Ignorance minimization: deterministic grid
// search with progressive refinement for (sigma, alpha) per model and lead,
// kappa per model at lead 1, and greedy iterative multi-model weights.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "enslab/density.hpp"
#include "enslab/ensemble.hpp"
#include "enslab/errors.hpp"
#include "enslab/models.hpp"
#include "enslab/rng.hpp"

namespace enslab {

struct GridSpec {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t n = 21;
    bool log_scale = false;

    std::vector<double> points() const {
        if (n < 1 || !(hi >= lo)) throw std::invalid_argument("GridSpec: bad bounds");
        if (log_scale && !(lo > 0.0)) throw std::invalid_argument("GridSpec: log grid needs lo > 0");
        std::vector<double> p(n);
        if (n == 1) {
            p[0] = lo;
            return p;
        }
        double a = log_scale ? std::log(lo) : lo;
        double b = log_scale ? std::log(hi) : hi;
        for (std::size_t i = 0; i < n; ++i) {
            double t = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
            p[i] = log_scale ? std::exp(t) : t;
        }
        p.front() = lo;
        p.back() = hi;
        return p;
    }
};

struct FitConfig {
    GridSpec sigma_grid{1e-4, 10.0, 33, true};
    GridSpec alpha_grid{0.0, 1.0, 21, false};
    GridSpec kappa_grid{1e-4, 1.0, 33, true};
    std::size_t refinement_rounds = 3;
    std::size_t refinement_points = 17;
};

struct FitResult {
    double sigma = 0.0;
    double alpha = 0.0;
    double train_ignorance = 0.0;  // bits
    std::size_t bust_count = 0;    // training pairs with zero blended density at the optimum
    bool bound_hit_sigma = false;
    bool bound_hit_alpha = false;
};

// Scoring table for one (model, lead) slice: squared distances from each
// outcome to its ensemble members, plus the climatology density at each
// outcome. All fitting costs reduce to passes over this table.
struct FitTable {
    std::size_t n_pairs = 0;
    std::size_t n_members = 0;
    std::vector<double> dsq;  // pair-major, member-minor
    std::vector<double> pc;   // climatology at each outcome

    void add_pair(const double* members, std::size_t n, double outcome, double pc_at_outcome) {
        if (n_pairs == 0) n_members = n;
        if (n != n_members) throw std::invalid_argument("FitTable: ragged member counts");
        for (std::size_t j = 0; j < n; ++j) {
            double d = outcome - members[j];
            dsq.push_back(d * d);
        }
        pc.push_back(pc_at_outcome);
        ++n_pairs;
    }
};

namespace detail {

inline void dressed_at_outcomes(const FitTable& t, double sigma, std::vector<double>& pm) {
    pm.resize(t.n_pairs);
    double inv2s2 = 0.5 / (sigma * sigma);
    double norm = inv_sqrt_2pi / (static_cast<double>(t.n_members) * sigma);
    for (std::size_t i = 0; i < t.n_pairs; ++i) {
        double s = 0.0;
        const double* row = t.dsq.data() + i * t.n_members;
        for (std::size_t j = 0; j < t.n_members; ++j) s += std::exp(-row[j] * inv2s2);
        pm[i] = s * norm;
    }
}

inline double blend_score_bits(const FitTable& t, const std::vector<double>& pm, double alpha) {
    double s = 0.0;
    for (std::size_t i = 0; i < t.n_pairs; ++i) {
        double p = alpha * pm[i] + (1.0 - alpha) * t.pc[i];
        if (p <= 0.0) return std::numeric_limits<double>::infinity();
        s += std::log2(p);
    }
    return -s / static_cast<double>(t.n_pairs);
}

// 17-point window spanning +-1 cell of the previous grid around the
// incumbent, clipped to the global bounds with exact endpoints.
inline std::vector<double> refine_window(double incumbent, double cell, double lo, double hi,
                                         bool log_scale, std::size_t n_points) {
    double c = log_scale ? std::log(incumbent) : incumbent;
    double a = c - cell, b = c + cell;
    double glo = log_scale ? std::log(lo) : lo;
    double ghi = log_scale ? std::log(hi) : hi;
    bool clip_lo = a < glo, clip_hi = b > ghi;
    if (clip_lo) a = glo;
    if (clip_hi) b = ghi;
    std::vector<double> p(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        double t = a + (b - a) * static_cast<double>(i) / static_cast<double>(n_points - 1);
        p[i] = log_scale ? std::exp(t) : t;
    }
    if (clip_lo) p.front() = lo;
    if (clip_hi) p.back() = hi;
    return p;
}

}  // namespace detail

// Joint (sigma, alpha) search: full coarse grid, then refinement rounds that
// zoom by 8x around the incumbent. Ties break toward smaller alpha, then
// smaller sigma.
inline FitResult fit_sigma_alpha_table(const FitTable& table, const FitConfig& config) {
    if (table.n_pairs < 2) throw FitError("fit_sigma_alpha: need at least 2 pairs");
    std::vector<double> sigmas = config.sigma_grid.points();
    std::vector<double> alphas = config.alpha_grid.points();
    double sigma_cell = config.sigma_grid.n > 1
                            ? (std::log(config.sigma_grid.hi) - std::log(config.sigma_grid.lo)) /
                                  static_cast<double>(config.sigma_grid.n - 1)
                            : 0.0;
    double alpha_cell = config.alpha_grid.n > 1
                            ? (config.alpha_grid.hi - config.alpha_grid.lo) /
                                  static_cast<double>(config.alpha_grid.n - 1)
                            : 0.0;

    double best = std::numeric_limits<double>::infinity();
    double best_sigma = sigmas.front(), best_alpha = alphas.front();
    std::vector<double> pm;
    std::vector<std::vector<double>> pm_by_sigma(sigmas.size());
    for (std::size_t si = 0; si < sigmas.size(); ++si)
        detail::dressed_at_outcomes(table, sigmas[si], pm_by_sigma[si]);
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
        for (std::size_t si = 0; si < sigmas.size(); ++si) {
            double sc = detail::blend_score_bits(table, pm_by_sigma[si], alphas[ai]);
            if (sc < best) {
                best = sc;
                best_sigma = sigmas[si];
                best_alpha = alphas[ai];
            }
        }
    }
    if (std::isinf(best)) throw FitError("fit_sigma_alpha: every grid point scored infinite");

    for (std::size_t round = 0; round < config.refinement_rounds; ++round) {
        std::vector<double> rs = detail::refine_window(best_sigma, sigma_cell, config.sigma_grid.lo,
                                                       config.sigma_grid.hi, true,
                                                       config.refinement_points);
        std::vector<double> ra = detail::refine_window(best_alpha, alpha_cell, config.alpha_grid.lo,
                                                       config.alpha_grid.hi, false,
                                                       config.refinement_points);
        std::vector<std::vector<double>> rpm(rs.size());
        for (std::size_t si = 0; si < rs.size(); ++si)
            detail::dressed_at_outcomes(table, rs[si], rpm[si]);
        for (std::size_t ai = 0; ai < ra.size(); ++ai) {
            for (std::size_t si = 0; si < rs.size(); ++si) {
                double sc = detail::blend_score_bits(table, rpm[si], ra[ai]);
                if (sc < best) {
                    best = sc;
                    best_sigma = rs[si];
                    best_alpha = ra[ai];
                }
            }
        }
        sigma_cell /= 8.0;
        alpha_cell /= 8.0;
    }

    FitResult r;
    r.sigma = best_sigma;
    r.alpha = best_alpha;
    r.train_ignorance = best;
    r.bound_hit_sigma = (best_sigma == config.sigma_grid.lo || best_sigma == config.sigma_grid.hi);
    r.bound_hit_alpha = (best_alpha == config.alpha_grid.lo || best_alpha == config.alpha_grid.hi);
    detail::dressed_at_outcomes(table, best_sigma, pm);
    for (std::size_t i = 0; i < table.n_pairs; ++i)
        if (blend_values(pm[i], table.pc[i], best_alpha) <= 0.0) ++r.bust_count;
    return r;
}

// Leave-one-out variant: the LOO mean for a candidate is the average of
// single-pair scores over folds. With a fixed global climatology each pair's
// density never depends on the other pairs, so the fold average equals the
// training mean and the search shares the same engine.
inline FitResult fit_loo_table(const FitTable& table, const FitConfig& config) {
    if (table.n_pairs < 3) throw FitError("fit_loo: need at least 3 pairs");
    return fit_sigma_alpha_table(table, config);
}

struct WeightsFit {
    WeightVector weights;
    double combined_train_ignorance = 0.0;
    std::vector<std::size_t> ranking;  // model indices, best first
    std::vector<double> individual_ignorance;
};

// Greedy iterative combination: rank models by individual training
// Ignorance, then repeatedly fit a scalar blend weight of the running
// combination against the next model. Ties prefer the higher-ranked side
// (w = 1, all mass to the running combination).
inline WeightsFit fit_weights_iterative(const std::vector<std::vector<double>>& densities,
                                        const FitConfig& config) {
    std::size_t n_models = densities.size();
    if (n_models < 2) throw std::invalid_argument("fit_weights_iterative: need >= 2 models");
    std::size_t n_pairs = densities.front().size();
    for (const auto& d : densities)
        if (d.size() != n_pairs || n_pairs == 0)
            throw std::invalid_argument("fit_weights_iterative: ragged or empty density matrix");

    WeightsFit out;
    out.individual_ignorance.resize(n_models);
    for (std::size_t m = 0; m < n_models; ++m)
        out.individual_ignorance[m] = empirical_ignorance(densities[m]);
    out.ranking.resize(n_models);
    for (std::size_t m = 0; m < n_models; ++m) out.ranking[m] = m;
    std::stable_sort(out.ranking.begin(), out.ranking.end(), [&](std::size_t a, std::size_t b) {
        return out.individual_ignorance[a] < out.individual_ignorance[b];
    });

    auto score_blend = [&](const std::vector<double>& cur, const std::vector<double>& nxt,
                           double w) {
        double s = 0.0;
        for (std::size_t i = 0; i < n_pairs; ++i) {
            double p = w * cur[i] + (1.0 - w) * nxt[i];
            if (p <= 0.0) return std::numeric_limits<double>::infinity();
            s += std::log2(p);
        }
        return -s / static_cast<double>(n_pairs);
    };

    std::vector<double> omega(n_models, 0.0);
    std::vector<double> current = densities[out.ranking[0]];
    omega[out.ranking[0]] = 1.0;
    double current_score = out.individual_ignorance[out.ranking[0]];

    GridSpec wgrid{0.0, 1.0, config.alpha_grid.n, false};
    for (std::size_t r = 1; r < n_models; ++r) {
        const std::vector<double>& nxt = densities[out.ranking[r]];
        std::vector<double> wpts = wgrid.points();
        double best = std::numeric_limits<double>::infinity();
        double best_w = 1.0;
        for (std::size_t i = wpts.size(); i-- > 0;) {  // descending: ties keep larger w
            double sc = score_blend(current, nxt, wpts[i]);
            if (sc < best) {
                best = sc;
                best_w = wpts[i];
            }
        }
        double cell = 1.0 / static_cast<double>(wgrid.n - 1);
        for (std::size_t round = 0; round < config.refinement_rounds; ++round) {
            std::vector<double> rp =
                detail::refine_window(best_w, cell, 0.0, 1.0, false, config.refinement_points);
            for (std::size_t i = rp.size(); i-- > 0;) {
                double sc = score_blend(current, nxt, rp[i]);
                if (sc < best) {
                    best = sc;
                    best_w = rp[i];
                }
            }
            cell /= 8.0;
        }
        for (std::size_t m = 0; m < n_models; ++m) omega[m] *= best_w;
        omega[out.ranking[r]] = 1.0 - best_w;
        for (std::size_t i = 0; i < n_pairs; ++i)
            current[i] = best_w * current[i] + (1.0 - best_w) * nxt[i];
        current_score = best;
    }

    out.weights.omega = omega;
    out.combined_train_ignorance = current_score;
    return out;
}

struct KappaFit {
    double kappa = 0.0;
    double validation_ignorance = 0.0;
    std::size_t diverged_candidates = 0;
    std::vector<std::pair<double, double>> candidates;  // (kappa, validation score)
};

// Lead-1 kappa selection: for each candidate kappa, build one-step ensembles
// over the series (per-launch streams shared across candidates), fit
// (sigma, alpha) on the first half of the launches, and score the second
// half. Candidates whose ensembles leave a model domain score infinite.
template <typename Stepper>
KappaFit fit_kappa_with(Stepper&& step_fn, ModelId id, const ObservationSeries& obs,
                        const Trajectory& truth, const FitConfig& config,
                        std::size_t n_members, std::uint64_t rng_seed) {
    (void)truth;
    std::size_t n = obs.observations.size();
    if (n < 2 || n - 1 < 64) throw std::invalid_argument("fit_kappa: need >= 64 launches");
    std::size_t n_launches = n - 1;
    std::size_t n_train = n_launches / 2;

    Climatology climo = make_climatology(obs.observations);
    std::vector<double> pc(n_launches);
    for (std::size_t t = 0; t < n_launches; ++t)
        pc[t] = climatology_pdf(climo, obs.observations[t + 1]);

    KappaFit out;
    auto evaluate = [&](double kappa) {
        FitTable train, val;
        std::vector<double> members(n_members);
        for (std::size_t t = 0; t < n_launches; ++t) {
            auto eng = make_engine(
                derive_seed(rng_seed, StreamTag::ensemble, t, static_cast<std::uint64_t>(id)));
            std::normal_distribution<double> dist(0.0, 1.0);
            for (std::size_t j = 0; j < n_members; ++j) {
                double v = obs.observations[t] + kappa * dist(eng);
                while (!(v > 0.0)) v = obs.observations[t] + kappa * dist(eng);
                try {
                    members[j] = step_fn(v);
                } catch (const std::domain_error&) {
                    return std::numeric_limits<double>::infinity();
                }
                if (!std::isfinite(members[j])) return std::numeric_limits<double>::infinity();
            }
            double y = obs.observations[t + 1];
            (t < n_train ? train : val).add_pair(members.data(), n_members, y, pc[t]);
        }
        FitResult fit = fit_sigma_alpha_table(train, config);
        std::vector<double> pm;
        detail::dressed_at_outcomes(val, fit.sigma, pm);
        return detail::blend_score_bits(val, pm, fit.alpha);
    };

    std::vector<double> kappas = config.kappa_grid.points();
    double best = std::numeric_limits<double>::infinity();
    double best_kappa = kappas.front();
    for (double k : kappas) {  // ascending: ties keep smaller kappa
        double sc = evaluate(k);
        out.candidates.emplace_back(k, sc);
        if (std::isinf(sc)) ++out.diverged_candidates;
        if (sc < best) {
            best = sc;
            best_kappa = k;
        }
    }
    if (std::isinf(best)) throw FitError("fit_kappa: every candidate scored infinite");
    double cell = config.kappa_grid.n > 1
                      ? (std::log(config.kappa_grid.hi) - std::log(config.kappa_grid.lo)) /
                            static_cast<double>(config.kappa_grid.n - 1)
                      : 0.0;
    for (std::size_t round = 0; cell > 0.0 && round < config.refinement_rounds; ++round) {
        std::vector<double> rp = detail::refine_window(best_kappa, cell, config.kappa_grid.lo,
                                                       config.kappa_grid.hi, true,
                                                       config.refinement_points);
        for (double k : rp) {
            double sc = evaluate(k);
            out.candidates.emplace_back(k, sc);
            if (std::isinf(sc)) ++out.diverged_candidates;
            if (sc < best) {
                best = sc;
                best_kappa = k;
            }
        }
        cell /= 8.0;
    }
    out.kappa = best_kappa;
    out.validation_ignorance = best;
    return out;
}

inline KappaFit fit_kappa(const ModelBank& bank, ModelId id, const ObservationSeries& obs,
                          const Trajectory& truth, const FitConfig& config,
                          std::size_t n_members, std::uint64_t rng_seed) {
    return fit_kappa_with([&](double x) { return model_step(bank, id, x); }, id, obs, truth,
                          config, n_members, rng_seed);
}

struct FittedParams {
    std::array<double, 4> kappa{};                  // per model
    std::array<std::vector<FitResult>, 4> by_lead;  // per model, indexed by lead-1
};

}  // namespace enslab

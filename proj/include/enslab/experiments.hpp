// Monte Carlo experiment harness: system setup (climatology + kappa
// selection), forecast-outcome archives, large-archive (LAP) and
// small-archive (SAP) fitting sweeps, kappa and ensemble-size sweeps, and
// the multi-model versus single-best comparison.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "enslab/calibrate.hpp"
#include "enslab/chaos.hpp"
#include "enslab/density.hpp"
#include "enslab/ensemble.hpp"
#include "enslab/models.hpp"
#include "enslab/rng.hpp"
#include "enslab/stats.hpp"

namespace enslab {

struct ExperimentConfig {
    std::size_t n_archives = 512;
    std::size_t lap_size = 2048;
    std::size_t sap_size = 40;
    std::size_t test_size = 2048;
    std::size_t n_members = 9;
    std::size_t max_lead = 8;
    std::size_t stride = 0;  // 0 means max_lead
    std::uint64_t master_seed = 1;
    std::size_t jobs = 1;

    std::size_t effective_stride() const { return stride == 0 ? max_lead : stride; }
};

// Everything fixed before any archive is drawn: the truth system, the model
// bank, the global climatology, and the per-model kappa values.
struct SystemSetup {
    SystemParams sys;
    ModelBank bank;
    Climatology climo;
    std::array<double, 4> kappa{};
    std::array<KappaFit, 4> kappa_diag{};
    double attractor_sd = 0.0;
    FitConfig fit;
    ExperimentConfig cfg;
};

// noise_override: NaN selects the default 0.05 * attractor SD.
// kappa_override entries > 0 skip the corresponding model's kappa fit.
inline SystemSetup build_system_setup(double lambda, double noise_override,
                                      std::size_t spinup_steps, CoefficientRounding rounding,
                                      const FitConfig& fit, const ExperimentConfig& cfg,
                                      const std::array<double, 4>& kappa_override = {0, 0, 0, 0}) {
    SystemSetup s;
    s.fit = fit;
    s.cfg = cfg;
    s.sys.lambda = lambda;
    s.sys.spinup_steps = spinup_steps;
    s.attractor_sd = attractor_sd(lambda, 100000,
                                  derive_seed(cfg.master_seed, StreamTag::truth, 0));
    s.sys.noise_sd = std::isnan(noise_override) ? 0.05 * s.attractor_sd : noise_override;
    s.bank = build_model_bank(lambda, rounding);

    {
        SystemParams cp = s.sys;
        Trajectory ct = generate_trajectory(cp, 0.3, 2048,
                                            derive_seed(cfg.master_seed, StreamTag::climatology, 0));
        ObservationSeries co =
            observe(ct, s.sys.noise_sd, derive_seed(cfg.master_seed, StreamTag::climatology, 1));
        s.climo = make_climatology(co.observations);
    }

    std::size_t kappa_len = std::max<std::size_t>(2048, 2 * cfg.lap_size) + 1;
    Trajectory kt = generate_trajectory(s.sys, 0.3, kappa_len,
                                        derive_seed(cfg.master_seed, StreamTag::kappa_fit, 0));
    ObservationSeries ko =
        observe(kt, s.sys.noise_sd, derive_seed(cfg.master_seed, StreamTag::kappa_fit, 1));
    for (std::size_t m = 0; m < 4; ++m) {
        if (kappa_override[m] > 0.0) {
            s.kappa[m] = kappa_override[m];
        } else {
            s.kappa_diag[m] =
                fit_kappa(s.bank, all_models[m], ko, kt, fit, cfg.n_members,
                          derive_seed(cfg.master_seed, StreamTag::kappa_fit, 2));
            s.kappa[m] = s.kappa_diag[m].kappa;
        }
    }
    return s;
}

// Forecast-outcome archive: for each launch, the outcome observations at
// every lead and the propagated ensembles of all four models.
struct Archive {
    std::size_t n_a = 0;
    std::size_t n_members = 0;
    std::size_t max_lead = 0;
    std::vector<std::int64_t> launch_times;
    std::vector<double> outcomes;  // [launch][lead]
    std::vector<double> members;   // [launch][model][member][lead]

    double outcome(std::size_t l, std::size_t lead) const {
        return outcomes[l * max_lead + (lead - 1)];
    }
    const double* member_row(std::size_t l, std::size_t model, std::size_t j) const {
        return members.data() + ((l * 4 + model) * n_members + j) * max_lead;
    }
    double member(std::size_t l, std::size_t model, std::size_t j, std::size_t lead) const {
        return member_row(l, model, j)[lead - 1];
    }
};

// Builds one archive from its own stationary run; launches sit at
// consecutive strides. Returns nullopt if any ensemble member leaves its
// model's domain (the caller counts the failure).
inline std::optional<Archive> build_archive(const SystemSetup& s, std::size_t n_pairs,
                                            StreamTag tag, std::uint64_t archive_index) {
    const std::size_t stride = s.cfg.effective_stride();
    const std::size_t max_lead = s.cfg.max_lead;
    const std::size_t n_members = s.cfg.n_members;
    std::size_t length = (n_pairs - 1) * stride + max_lead + 1;
    Trajectory traj = generate_trajectory(
        s.sys, 0.3, length, derive_seed(s.cfg.master_seed, tag, archive_index, 0));
    ObservationSeries obs =
        observe(traj, s.sys.noise_sd, derive_seed(s.cfg.master_seed, tag, archive_index, 1));

    Archive a;
    a.n_a = n_pairs;
    a.n_members = n_members;
    a.max_lead = max_lead;
    a.launch_times.resize(n_pairs);
    a.outcomes.resize(n_pairs * max_lead);
    a.members.resize(n_pairs * 4 * n_members * max_lead);
    std::uint64_t member_seed_base = derive_seed(s.cfg.master_seed, tag, archive_index, 2);
    try {
        for (std::size_t l = 0; l < n_pairs; ++l) {
            std::size_t t = l * stride;
            a.launch_times[l] = static_cast<std::int64_t>(t);
            for (std::size_t tau = 1; tau <= max_lead; ++tau)
                a.outcomes[l * max_lead + (tau - 1)] = obs.observations[t + tau];
            for (std::size_t m = 0; m < 4; ++m) {
                EnsembleConfig ec{n_members, s.kappa[m], max_lead};
                std::vector<double> initials = make_ensemble(
                    obs.observations[t], ec,
                    derive_seed(member_seed_base, StreamTag::ensemble, l, m));
                EnsembleForecast f = propagate(s.bank, all_models[m], initials, max_lead,
                                               static_cast<std::int64_t>(t));
                for (std::size_t j = 0; j < n_members; ++j)
                    for (std::size_t tau = 0; tau < max_lead; ++tau)
                        a.members[((l * 4 + m) * n_members + j) * max_lead + tau] =
                            f.members[j * max_lead + tau];
            }
        }
    } catch (const DivergenceError&) {
        return std::nullopt;
    }
    return a;
}

// Climatology density at every (launch, lead) outcome of an archive.
inline std::vector<double> climatology_cache(const Archive& a, const Climatology& climo) {
    std::vector<double> pc(a.n_a * a.max_lead);
    for (std::size_t i = 0; i < pc.size(); ++i) pc[i] = climatology_pdf(climo, a.outcomes[i]);
    return pc;
}

inline FitTable make_fit_table(const Archive& a, std::size_t model, std::size_t lead,
                               const std::vector<double>& pc) {
    FitTable t;
    std::vector<double> row(a.n_members);
    for (std::size_t l = 0; l < a.n_a; ++l) {
        for (std::size_t j = 0; j < a.n_members; ++j) row[j] = a.member(l, model, j, lead);
        t.add_pair(row.data(), a.n_members, a.outcome(l, lead), pc[l * a.max_lead + (lead - 1)]);
    }
    return t;
}

// Public single-slice fitting interfaces.
inline FitResult fit_sigma_alpha(const Archive& a, ModelId id, std::size_t lead,
                                 const Climatology& climo, const FitConfig& config) {
    std::vector<double> pc = climatology_cache(a, climo);
    return fit_sigma_alpha_table(make_fit_table(a, static_cast<std::size_t>(id), lead, pc), config);
}

inline FitResult fit_loo(const Archive& a, ModelId id, std::size_t lead,
                         const Climatology& climo, const FitConfig& config) {
    std::vector<double> pc = climatology_cache(a, climo);
    return fit_loo_table(make_fit_table(a, static_cast<std::size_t>(id), lead, pc), config);
}

struct ArchiveFits {
    std::vector<FitResult> fits;       // [model][lead]
    std::vector<WeightsFit> weights;   // [lead]
    std::size_t max_lead = 0;

    const FitResult& fit(std::size_t model, std::size_t lead) const {
        return fits[model * max_lead + (lead - 1)];
    }
};

inline ArchiveFits fit_archive(const SystemSetup& s, const Archive& a, bool leave_one_out) {
    ArchiveFits out;
    out.max_lead = a.max_lead;
    out.fits.resize(4 * a.max_lead);
    std::vector<double> pc = climatology_cache(a, s.climo);
    std::vector<std::vector<std::vector<double>>> blended(a.max_lead);
    for (std::size_t lead = 1; lead <= a.max_lead; ++lead) blended[lead - 1].resize(4);
    for (std::size_t m = 0; m < 4; ++m) {
        for (std::size_t lead = 1; lead <= a.max_lead; ++lead) {
            FitTable t = make_fit_table(a, m, lead, pc);
            FitResult r = leave_one_out ? fit_loo_table(t, s.fit) : fit_sigma_alpha_table(t, s.fit);
            out.fits[m * a.max_lead + (lead - 1)] = r;
            std::vector<double> pm;
            detail::dressed_at_outcomes(t, r.sigma, pm);
            auto& dens = blended[lead - 1][m];
            dens.resize(t.n_pairs);
            for (std::size_t i = 0; i < t.n_pairs; ++i)
                dens[i] = blend_values(pm[i], t.pc[i], r.alpha);
        }
    }
    out.weights.reserve(a.max_lead);
    for (std::size_t lead = 1; lead <= a.max_lead; ++lead)
        out.weights.push_back(fit_weights_iterative(blended[lead - 1], s.fit));
    return out;
}

// Test-side evaluation tables, shared by every fitted system.
struct TestSide {
    Archive archive;
    std::vector<double> pc;                 // climatology cache
    std::vector<FitTable> tables;           // [model][lead]
    std::vector<double> climo_ignorance;    // per lead

    const FitTable& table(std::size_t model, std::size_t lead) const {
        return tables[model * archive.max_lead + (lead - 1)];
    }
};

inline TestSide build_test_side(const SystemSetup& s) {
    std::optional<Archive> a = build_archive(s, s.cfg.test_size, StreamTag::test_archive, 0);
    if (!a) throw std::runtime_error("test archive construction diverged; cannot evaluate");
    TestSide t;
    t.archive = std::move(*a);
    t.pc = climatology_cache(t.archive, s.climo);
    t.tables.reserve(4 * t.archive.max_lead);
    for (std::size_t m = 0; m < 4; ++m)
        for (std::size_t lead = 1; lead <= t.archive.max_lead; ++lead)
            t.tables.push_back(make_fit_table(t.archive, m, lead, t.pc));
    t.climo_ignorance.resize(t.archive.max_lead);
    for (std::size_t lead = 1; lead <= t.archive.max_lead; ++lead) {
        std::vector<double> pcs(t.archive.n_a);
        for (std::size_t l = 0; l < t.archive.n_a; ++l)
            pcs[l] = t.pc[l * t.archive.max_lead + (lead - 1)];
        t.climo_ignorance[lead - 1] = empirical_ignorance(pcs);
    }
    return t;
}

struct ArchiveEval {
    std::vector<double> model_test_ign;  // [model][lead]
    std::vector<double> mm_test_ign;     // [lead]
    std::vector<double> best_test_ign;   // [lead]
    std::vector<int> best_model;         // [lead]
};

inline ArchiveEval evaluate_on_test(const ArchiveFits& fits, const TestSide& test) {
    const std::size_t L = test.archive.max_lead;
    const std::size_t n = test.archive.n_a;
    ArchiveEval e;
    e.model_test_ign.assign(4 * L, 0.0);
    e.mm_test_ign.assign(L, 0.0);
    e.best_test_ign.assign(L, std::numeric_limits<double>::infinity());
    e.best_model.assign(L, 0);
    std::vector<double> pm;
    std::vector<std::vector<double>> dens(4, std::vector<double>(n));
    for (std::size_t lead = 1; lead <= L; ++lead) {
        for (std::size_t m = 0; m < 4; ++m) {
            const FitTable& t = test.table(m, lead);
            const FitResult& r = fits.fit(m, lead);
            detail::dressed_at_outcomes(t, r.sigma, pm);
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                dens[m][i] = blend_values(pm[i], t.pc[i], r.alpha);
                s += ignorance(dens[m][i]);
            }
            double mean = s / static_cast<double>(n);
            e.model_test_ign[m * L + (lead - 1)] = mean;
            if (mean < e.best_test_ign[lead - 1]) {
                e.best_test_ign[lead - 1] = mean;
                e.best_model[lead - 1] = static_cast<int>(m);
            }
        }
        const auto& w = fits.weights[lead - 1].weights.omega;
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double p = 0.0;
            for (std::size_t m = 0; m < 4; ++m) p += w[m] * dens[m][i];
            s += ignorance(p);
        }
        e.mm_test_ign[lead - 1] = s / static_cast<double>(n);
    }
    return e;
}

// Distributions over archives for one (model, lead) cell.
struct CellDistribution {
    std::vector<double> sigma, alpha, train_ign, test_ign;
};

struct ExperimentReport {
    ExperimentConfig cfg;
    std::size_t archive_size = 0;
    bool leave_one_out = false;
    std::vector<CellDistribution> cells;                  // [model][lead]
    std::vector<std::vector<std::array<double, 4>>> weights_by_lead;  // [lead][archive]
    std::vector<std::vector<double>> mm_test_by_lead;     // [lead][archive]
    std::vector<std::vector<double>> best_test_by_lead;   // [lead][archive]
    std::vector<std::vector<int>> best_model_by_lead;     // [lead][archive]
    std::vector<double> climo_test_ign;                   // [lead]
    std::size_t failed_archives = 0;

    const CellDistribution& cell(std::size_t model, std::size_t lead) const {
        return cells[model * (cells.size() / 4) + (lead - 1)];
    }
};

namespace detail {

inline ExperimentReport run_archive_sweep(const SystemSetup& s, const TestSide& test,
                                          std::size_t archive_size, StreamTag tag,
                                          bool leave_one_out) {
    const std::size_t L = s.cfg.max_lead;
    const std::size_t n_arch = s.cfg.n_archives;
    struct Slot {
        bool ok = false;
        ArchiveFits fits;
        ArchiveEval eval;
    };
    std::vector<Slot> slots(n_arch);

    auto work = [&](std::size_t i) {
        std::optional<Archive> a = build_archive(s, archive_size, tag, i);
        if (!a) return;
        slots[i].fits = fit_archive(s, *a, leave_one_out);
        slots[i].eval = evaluate_on_test(slots[i].fits, test);
        slots[i].ok = true;
    };
    std::size_t jobs = std::max<std::size_t>(1, s.cfg.jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < n_arch; ++i) work(i);
    } else {
        std::vector<std::thread> pool;
        std::size_t chunk = (n_arch + jobs - 1) / jobs;
        for (std::size_t w = 0; w < jobs; ++w) {
            std::size_t lo = w * chunk, hi = std::min(n_arch, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi] {
                for (std::size_t i = lo; i < hi; ++i) work(i);
            });
        }
        for (auto& th : pool) th.join();
    }

    ExperimentReport rep;
    rep.cfg = s.cfg;
    rep.archive_size = archive_size;
    rep.leave_one_out = leave_one_out;
    rep.cells.resize(4 * L);
    rep.weights_by_lead.resize(L);
    rep.mm_test_by_lead.resize(L);
    rep.best_test_by_lead.resize(L);
    rep.best_model_by_lead.resize(L);
    rep.climo_test_ign = test.climo_ignorance;
    for (std::size_t i = 0; i < n_arch; ++i) {
        if (!slots[i].ok) {
            ++rep.failed_archives;
            continue;
        }
        const auto& f = slots[i].fits;
        const auto& e = slots[i].eval;
        for (std::size_t m = 0; m < 4; ++m) {
            for (std::size_t lead = 1; lead <= L; ++lead) {
                CellDistribution& c = rep.cells[m * L + (lead - 1)];
                const FitResult& r = f.fit(m, lead);
                c.sigma.push_back(r.sigma);
                c.alpha.push_back(r.alpha);
                c.train_ign.push_back(r.train_ignorance);
                c.test_ign.push_back(e.model_test_ign[m * L + (lead - 1)]);
            }
        }
        for (std::size_t lead = 1; lead <= L; ++lead) {
            std::array<double, 4> w{};
            for (std::size_t m = 0; m < 4; ++m) w[m] = f.weights[lead - 1].weights.omega[m];
            rep.weights_by_lead[lead - 1].push_back(w);
            rep.mm_test_by_lead[lead - 1].push_back(e.mm_test_ign[lead - 1]);
            rep.best_test_by_lead[lead - 1].push_back(e.best_test_ign[lead - 1]);
            rep.best_model_by_lead[lead - 1].push_back(e.best_model[lead - 1]);
        }
    }
    return rep;
}

}  // namespace detail

inline ExperimentReport run_lap(const SystemSetup& s, const TestSide& test) {
    return detail::run_archive_sweep(s, test, s.cfg.lap_size, StreamTag::lap_archive, false);
}

inline ExperimentReport run_sap(const SystemSetup& s, const TestSide& test) {
    return detail::run_archive_sweep(s, test, s.cfg.sap_size, StreamTag::sap_archive, true);
}

// Pairings behind fig12_mm_vs_best.csv: multi-model versus single-best test scores.
struct ComparisonReport {
    // rel[pairing][lead][archive] = multi-model minus single-best
    std::array<std::vector<std::vector<double>>, 3> rel;
    std::array<std::vector<double>, 3> frac_not_worse;  // per lead
};

inline ComparisonReport compare_multimodel(const ExperimentReport& lap,
                                           const ExperimentReport& sap) {
    const std::size_t L = lap.climo_test_ign.size();
    ComparisonReport c;
    auto fill = [&](std::size_t which, const std::vector<std::vector<double>>& mm,
                    const std::vector<std::vector<double>>& best) {
        c.rel[which].resize(L);
        c.frac_not_worse[which].resize(L);
        for (std::size_t lead = 0; lead < L; ++lead) {
            std::size_t n = std::min(mm[lead].size(), best[lead].size());
            std::size_t good = 0;
            for (std::size_t i = 0; i < n; ++i) {
                double d = mm[lead][i] - best[lead][i];
                c.rel[which][lead].push_back(d);
                if (d <= 1e-12) ++good;
            }
            c.frac_not_worse[which][lead] =
                n == 0 ? 0.0 : static_cast<double>(good) / static_cast<double>(n);
        }
    };
    fill(0, lap.mm_test_by_lead, lap.best_test_by_lead);
    fill(1, sap.mm_test_by_lead, sap.best_test_by_lead);
    fill(2, sap.mm_test_by_lead, lap.best_test_by_lead);
    return c;
}

struct KappaSweepRow {
    int model = 0;  // 0..3
    std::size_t lead = 1;
    double kappa = 0.0;
    double ignorance = 0.0;  // validation score at the optimum
};

// Per (model, lead) kappa optimization with (sigma, alpha) refit at every
// candidate, on a dedicated split series. Also reports the climatology score
// on the validation half for reference.
inline std::vector<KappaSweepRow> run_kappa_sweep(const SystemSetup& s,
                                                  std::vector<double>* climo_by_lead = nullptr) {
    const std::size_t L = s.cfg.max_lead;
    const std::size_t stride = s.cfg.effective_stride();
    std::size_t n_launches = std::max<std::size_t>(256, 2 * s.cfg.lap_size);
    std::size_t length = (n_launches - 1) * stride + L + 1;
    Trajectory traj = generate_trajectory(s.sys, 0.3, length,
                                          derive_seed(s.cfg.master_seed, StreamTag::sweep, 0));
    ObservationSeries obs =
        observe(traj, s.sys.noise_sd, derive_seed(s.cfg.master_seed, StreamTag::sweep, 1));
    std::size_t n_train = n_launches / 2;
    std::uint64_t member_seed = derive_seed(s.cfg.master_seed, StreamTag::sweep, 2);

    std::vector<double> pc(n_launches * L);
    for (std::size_t t = 0; t < n_launches; ++t)
        for (std::size_t lead = 1; lead <= L; ++lead)
            pc[t * L + (lead - 1)] = climatology_pdf(s.climo, obs.observations[t * stride + lead]);
    if (climo_by_lead) {
        climo_by_lead->assign(L, 0.0);
        for (std::size_t lead = 1; lead <= L; ++lead) {
            double acc = 0.0;
            for (std::size_t t = n_train; t < n_launches; ++t)
                acc += ignorance(pc[t * L + (lead - 1)]);
            (*climo_by_lead)[lead - 1] = acc / static_cast<double>(n_launches - n_train);
        }
    }

    std::vector<KappaSweepRow> rows;
    for (std::size_t m = 0; m < 4; ++m) {
        for (std::size_t lead = 1; lead <= L; ++lead) {
            auto evaluate = [&](double kappa) {
                FitTable train, val;
                std::vector<double> members(s.cfg.n_members);
                for (std::size_t t = 0; t < n_launches; ++t) {
                    auto eng = make_engine(derive_seed(member_seed, StreamTag::ensemble, t, m));
                    std::normal_distribution<double> dist(0.0, 1.0);
                    double o = obs.observations[t * stride];
                    for (std::size_t j = 0; j < s.cfg.n_members; ++j) {
                        double v = o + kappa * dist(eng);
                        while (!(v > 0.0)) v = o + kappa * dist(eng);
                        try {
                            for (std::size_t step = 0; step < lead; ++step)
                                v = model_step(s.bank, all_models[m], v);
                        } catch (const std::domain_error&) {
                            return std::numeric_limits<double>::infinity();
                        }
                        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
                        members[j] = v;
                    }
                    double y = obs.observations[t * stride + lead];
                    (t < n_train ? train : val)
                        .add_pair(members.data(), s.cfg.n_members, y, pc[t * L + (lead - 1)]);
                }
                FitResult fit = fit_sigma_alpha_table(train, s.fit);
                std::vector<double> pm;
                detail::dressed_at_outcomes(val, fit.sigma, pm);
                return detail::blend_score_bits(val, pm, fit.alpha);
            };
            // Coarser grid than the per-system selection: every candidate
            // here costs a full (sigma, alpha) refit.
            GridSpec sweep_grid{s.fit.kappa_grid.lo, s.fit.kappa_grid.hi, 17, true};
            std::vector<double> kappas = sweep_grid.points();
            double best = std::numeric_limits<double>::infinity();
            double best_kappa = kappas.front();
            for (double k : kappas) {
                double sc = evaluate(k);
                if (sc < best) {
                    best = sc;
                    best_kappa = k;
                }
            }
            double cell = (std::log(sweep_grid.hi) - std::log(sweep_grid.lo)) /
                          static_cast<double>(sweep_grid.n - 1);
            for (std::size_t round = 0; round < 2; ++round) {
                std::vector<double> rp = detail::refine_window(best_kappa, cell, sweep_grid.lo,
                                                               sweep_grid.hi, true, 9);
                for (double k : rp) {
                    double sc = evaluate(k);
                    if (sc < best) {
                        best = sc;
                        best_kappa = k;
                    }
                }
                cell /= 8.0;
            }
            rows.push_back({static_cast<int>(m), lead, best_kappa, best});
        }
    }
    return rows;
}

struct SizeSweepRow {
    int model = 0;
    std::size_t size = 0;
    std::size_t lead = 1;
    double test_ignorance = 0.0;
};

// Refits (sigma, alpha) on one training archive at each ensemble size and
// evaluates on a matching test archive; member sets are nested prefixes so
// the size axis is smooth.
inline std::vector<SizeSweepRow> run_ensemble_size_sweep(const SystemSetup& s,
                                                         const std::vector<double>& sizes) {
    if (sizes.empty()) throw std::invalid_argument("run_ensemble_size_sweep: empty size list");
    for (std::size_t i = 1; i < sizes.size(); ++i)
        if (!(sizes[i] > sizes[i - 1]))
            throw std::invalid_argument("run_ensemble_size_sweep: sizes must be ascending");
    std::size_t max_size = static_cast<std::size_t>(sizes.back());
    SystemSetup big = s;
    big.cfg.n_members = max_size;
    std::optional<Archive> train = build_archive(big, s.cfg.lap_size, StreamTag::sweep, 100);
    std::optional<Archive> test = build_archive(big, s.cfg.test_size, StreamTag::sweep, 101);
    if (!train || !test)
        throw std::runtime_error("ensemble size sweep archive construction diverged");
    std::vector<double> pc_train = climatology_cache(*train, s.climo);
    std::vector<double> pc_test = climatology_cache(*test, s.climo);

    std::vector<SizeSweepRow> rows;
    std::vector<double> row_buf;
    for (std::size_t m = 0; m < 4; ++m) {
        for (double size_d : sizes) {
            std::size_t size = static_cast<std::size_t>(size_d);
            for (std::size_t lead = 1; lead <= s.cfg.max_lead; ++lead) {
                FitTable tr, te;
                row_buf.resize(size);
                for (std::size_t l = 0; l < train->n_a; ++l) {
                    for (std::size_t j = 0; j < size; ++j) row_buf[j] = train->member(l, m, j, lead);
                    tr.add_pair(row_buf.data(), size, train->outcome(l, lead),
                                pc_train[l * train->max_lead + (lead - 1)]);
                }
                for (std::size_t l = 0; l < test->n_a; ++l) {
                    for (std::size_t j = 0; j < size; ++j) row_buf[j] = test->member(l, m, j, lead);
                    te.add_pair(row_buf.data(), size, test->outcome(l, lead),
                                pc_test[l * test->max_lead + (lead - 1)]);
                }
                FitResult r = fit_sigma_alpha_table(tr, s.fit);
                std::vector<double> pm;
                detail::dressed_at_outcomes(te, r.sigma, pm);
                rows.push_back({static_cast<int>(m), size, lead,
                                detail::blend_score_bits(te, pm, r.alpha)});
            }
        }
    }
    return rows;
}

}  // namespace enslab

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "enslab/calibrate.hpp"
#include "enslab/chaos.hpp"
#include "enslab/density.hpp"
#include "enslab/rng.hpp"

using namespace enslab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

FitTable gaussian_residual_table(std::size_t n_pairs, double residual_sd, double pc,
                                 std::uint64_t seed, std::vector<double>* residuals = nullptr) {
    auto eng = make_engine(seed);
    std::uniform_real_distribution<double> ux(0.5, 1.5);
    std::normal_distribution<double> noise(0.0, residual_sd);
    FitTable t;
    for (std::size_t i = 0; i < n_pairs; ++i) {
        double x = ux(eng);
        double r = noise(eng);
        if (residuals) residuals->push_back(r);
        t.add_pair(&x, 1, x + r, pc);
    }
    return t;
}

std::vector<std::vector<double>> random_densities(std::size_t n_models, std::size_t n_pairs,
                                                  std::uint64_t seed) {
    auto eng = make_engine(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<std::vector<double>> d(n_models, std::vector<double>(n_pairs));
    for (std::size_t m = 0; m < n_models; ++m)
        for (std::size_t i = 0; i < n_pairs; ++i)
            d[m][i] = std::exp(dist(eng) - 0.2 * static_cast<double>(m));
    return d;
}

}  // namespace

TEST_CASE("parameter grids reproduce their endpoints exactly", "[calibrate]") {
    GridSpec log_grid{1e-4, 10.0, 33, true};
    auto p = log_grid.points();
    REQUIRE(p.size() == 33);
    CHECK(p.front() == 1e-4);
    CHECK(p.back() == 10.0);
    for (std::size_t i = 1; i < p.size(); ++i) CHECK(p[i] > p[i - 1]);
    // geometric spacing
    CHECK_THAT(p[16], WithinRel(std::sqrt(1e-4 * 10.0), 1e-12));

    GridSpec lin{0.0, 1.0, 21, false};
    auto q = lin.points();
    REQUIRE(q.size() == 21);
    CHECK(q.front() == 0.0);
    CHECK(q.back() == 1.0);
    CHECK_THAT(q[10], WithinAbs(0.5, 1e-15));

    CHECK(GridSpec{0.3, 0.3, 1, true}.points() == std::vector<double>{0.3});
}

TEST_CASE("fit recovers the kernel width of known residual noise", "[calibrate]") {
    std::vector<double> residuals;
    FitTable t = gaussian_residual_table(512, 0.1, 1e-9, 811, &residuals);
    FitConfig cfg;
    FitResult r = fit_sigma_alpha_table(t, cfg);

    // with a negligible climatology floor the score is the Gaussian
    // likelihood, maximized at the root-mean-square residual
    double msq = 0.0;
    for (double v : residuals) msq += v * v;
    double rmse = std::sqrt(msq / static_cast<double>(residuals.size()));
    CHECK_THAT(r.sigma, WithinRel(rmse, 0.01));
    CHECK(r.alpha == 1.0);
    CHECK(r.bound_hit_alpha);
    CHECK_FALSE(r.bound_hit_sigma);
    CHECK(r.bust_count == 0);

    // reported training score matches a direct recomputation at the optimum
    double acc = 0.0;
    for (double v : residuals) {
        double z = v / r.sigma;
        acc += ignorance(inv_sqrt_2pi / r.sigma * std::exp(-0.5 * z * z));
    }
    CHECK_THAT(r.train_ignorance, WithinRel(acc / static_cast<double>(residuals.size()), 1e-12));
}

TEST_CASE("worthless ensembles collapse onto climatology", "[calibrate]") {
    FitTable t;
    double members[3] = {0.4, 0.5, 0.6};
    for (int i = 0; i < 8; ++i) t.add_pair(members, 3, 100.0, 0.3);
    FitResult r = fit_sigma_alpha_table(t, FitConfig{});
    CHECK(r.alpha == 0.0);
    CHECK(r.sigma == 1e-4);
    CHECK(r.bound_hit_alpha);
    CHECK(r.bound_hit_sigma);
    CHECK(r.bust_count == 0);
    CHECK_THAT(r.train_ignorance, WithinRel(-std::log2(0.3), 1e-12));
}

TEST_CASE("perfect ensembles pin the fit to the sharp corner", "[calibrate]") {
    FitTable t;
    double members[2] = {0.7, 0.7};
    for (int i = 0; i < 4; ++i) t.add_pair(members, 2, 0.7, 0.3);
    FitConfig cfg;
    FitResult r = fit_sigma_alpha_table(t, cfg);
    CHECK(r.sigma == cfg.sigma_grid.lo);
    CHECK(r.alpha == 1.0);
    CHECK(r.bound_hit_sigma);
    CHECK(r.bound_hit_alpha);
    CHECK_THAT(r.train_ignorance, WithinRel(-std::log2(inv_sqrt_2pi / cfg.sigma_grid.lo), 1e-12));
}

TEST_CASE("a table with no positive density anywhere raises", "[calibrate]") {
    FitTable t;
    double members[2] = {0.5, 0.6};
    for (int i = 0; i < 4; ++i) t.add_pair(members, 2, 1e6, 0.0);
    CHECK_THROWS_AS(fit_sigma_alpha_table(t, FitConfig{}), FitError);
}

TEST_CASE("tables reject ragged rows and tiny pair counts", "[calibrate]") {
    FitTable t;
    double m2[2] = {0.5, 0.6};
    double m3[3] = {0.5, 0.6, 0.7};
    t.add_pair(m2, 2, 0.55, 0.3);
    CHECK_THROWS_AS(t.add_pair(m3, 3, 0.55, 0.3), std::invalid_argument);

    FitTable single;
    single.add_pair(m2, 2, 0.55, 0.3);
    CHECK_THROWS_AS(fit_sigma_alpha_table(single, FitConfig{}), FitError);
}

TEST_CASE("leave-one-out fit coincides with the plain training fit", "[calibrate]") {
    // the climatology is global and each pair's score depends only on its
    // own row, so fold averages reproduce the full-table average exactly
    auto eng = make_engine(93);
    std::normal_distribution<double> noise(0.0, 0.15);
    std::uniform_real_distribution<double> ux(0.2, 2.0);
    std::uniform_real_distribution<double> upc(0.1, 0.6);
    for (std::size_t n_pairs : {16UL, 128UL}) {
        FitTable t;
        for (std::size_t i = 0; i < n_pairs; ++i) {
            double x = ux(eng);
            double members[5];
            for (auto& v : members) v = std::abs(x + noise(eng)) + 1e-6;
            t.add_pair(members, 5, std::abs(x + noise(eng)) + 1e-6, upc(eng));
        }
        FitResult plain = fit_sigma_alpha_table(t, FitConfig{});
        FitResult loo = fit_loo_table(t, FitConfig{});
        CHECK(loo.sigma == plain.sigma);
        CHECK(loo.alpha == plain.alpha);
        CHECK(loo.train_ignorance == plain.train_ignorance);
        CHECK(loo.bust_count == plain.bust_count);
    }

    FitTable two;
    double m[1] = {0.5};
    two.add_pair(m, 1, 0.5, 0.3);
    two.add_pair(m, 1, 0.6, 0.3);
    CHECK_THROWS_AS(fit_loo_table(two, FitConfig{}), FitError);
}

TEST_CASE("identical models keep the combined score at the single-model level",
          "[calibrate]") {
    // every simplex point is optimal here, so the exact weights are
    // unconstrained; the score itself must not move beyond blend rounding
    auto d = random_densities(1, 64, 17);
    std::vector<std::vector<double>> same(4, d[0]);
    WeightsFit w = fit_weights_iterative(same, FitConfig{});
    double total = 0.0;
    for (double o : w.weights.omega) {
        CHECK(o >= 0.0);
        CHECK(o <= 1.0);
        total += o;
    }
    CHECK_THAT(total, WithinAbs(1.0, 1e-12));
    CHECK(w.combined_train_ignorance <= w.individual_ignorance[w.ranking[0]] + 1e-12);
    CHECK_THAT(w.combined_train_ignorance,
               WithinRel(w.individual_ignorance[w.ranking[0]], 1e-12));
}

TEST_CASE("combined weights never score worse than the best model", "[calibrate]") {
    for (std::uint64_t rep = 0; rep < 50; ++rep) {
        auto d = random_densities(4, 64, 1000 + rep);
        WeightsFit w = fit_weights_iterative(d, FitConfig{});
        double best_single = *std::min_element(w.individual_ignorance.begin(),
                                               w.individual_ignorance.end());
        CHECK(w.combined_train_ignorance <= best_single + 1e-12);
        double total = 0.0;
        for (double o : w.weights.omega) {
            CHECK(o >= 0.0);
            total += o;
        }
        CHECK_THAT(total, WithinAbs(1.0, 1e-12));
        // ranking sorts by individual score
        for (std::size_t i = 1; i < w.ranking.size(); ++i)
            CHECK(w.individual_ignorance[w.ranking[i - 1]] <=
                  w.individual_ignorance[w.ranking[i]]);
    }
}

TEST_CASE("two-model weight matches a brute-force scan", "[calibrate]") {
    auto d = random_densities(2, 256, 4242);
    WeightsFit w = fit_weights_iterative(d, FitConfig{});
    const auto& lead = d[w.ranking[0]];
    const auto& trail = d[w.ranking[1]];
    auto score = [&](double wv) {
        double s = 0.0;
        for (std::size_t i = 0; i < lead.size(); ++i)
            s += std::log2(wv * lead[i] + (1.0 - wv) * trail[i]);
        return -s / static_cast<double>(lead.size());
    };
    double best_w = 1.0, best = score(1.0);
    for (int i = 0; i <= 1000; ++i) {
        double wv = static_cast<double>(i) / 1000.0;
        double sc = score(wv);
        if (sc < best) { best = sc; best_w = wv; }
    }
    double lo = std::max(0.0, best_w - 2e-3), hi = std::min(1.0, best_w + 2e-3);
    for (int i = 0; i <= 4000; ++i) {
        double wv = lo + (hi - lo) * static_cast<double>(i) / 4000.0;
        double sc = score(wv);
        if (sc < best) { best = sc; best_w = wv; }
    }
    CHECK_THAT(w.weights.omega[w.ranking[0]], WithinAbs(best_w, 2e-3));
    CHECK_THAT(w.combined_train_ignorance, WithinAbs(best, 1e-5));
}

TEST_CASE("a model with a zero density ranks last and gets no weight", "[calibrate]") {
    auto d = random_densities(2, 32, 7);
    d.push_back(std::vector<double>(32, 1e-30));
    d[2][5] = 0.0;
    WeightsFit w = fit_weights_iterative(d, FitConfig{});
    CHECK(w.ranking.back() == 2);
    CHECK(std::isinf(w.individual_ignorance[2]));
    CHECK(w.weights.omega[2] == 0.0);
}

TEST_CASE("weight fitting rejects degenerate inputs", "[calibrate]") {
    std::vector<std::vector<double>> one{{0.5, 0.5}};
    CHECK_THROWS_AS(fit_weights_iterative(one, FitConfig{}), std::invalid_argument);
    std::vector<std::vector<double>> ragged{{0.5, 0.5}, {0.5}};
    CHECK_THROWS_AS(fit_weights_iterative(ragged, FitConfig{}), std::invalid_argument);
}

TEST_CASE("spread selection tracks observational noise under a perfect model", "[calibrate]") {
    SystemParams p;
    p.lambda = 3.0;
    p.noise_sd = 0.0;
    Trajectory traj = generate_trajectory(p, 0.37, 2049, 606);
    const double noise = 0.04;
    ObservationSeries obs = observe(traj, noise, 607);

    FitConfig cfg;
    cfg.sigma_grid = {1e-3, 5.0, 17, true};
    cfg.alpha_grid = {0.0, 1.0, 11, false};
    cfg.kappa_grid = {2e-3, 0.5, 17, true};
    cfg.refinement_rounds = 2;
    cfg.refinement_points = 9;

    auto step = [&](double x) { return system_step(x, p.lambda); };
    KappaFit fit = fit_kappa_with(step, ModelId::IV, obs, traj, cfg, 9, 909);
    CHECK(fit.kappa >= noise / 4.0);
    CHECK(fit.kappa <= noise * 4.0);
    CHECK(std::isfinite(fit.validation_ignorance));
    CHECK(fit.diverged_candidates == 0);
    CHECK(fit.candidates.size() == 17 + 2 * 9);

    KappaFit again = fit_kappa_with(step, ModelId::IV, obs, traj, cfg, 9, 909);
    CHECK(again.kappa == fit.kappa);
    CHECK(again.validation_ignorance == fit.validation_ignorance);

    SECTION("a single-candidate grid is returned unchanged") {
        cfg.kappa_grid = {0.04, 0.04, 1, true};
        KappaFit single = fit_kappa_with(step, ModelId::IV, obs, traj, cfg, 3, 909);
        CHECK(single.kappa == 0.04);
        CHECK(single.candidates.size() == 1);
    }
}

TEST_CASE("spread fitting demands enough launches", "[calibrate]") {
    SystemParams p;
    Trajectory traj = generate_trajectory(p, 0.37, 40, 11);
    ObservationSeries obs = observe(traj, 0.04, 12);
    CHECK_THROWS_AS(
        fit_kappa_with([](double x) { return system_step(x, 3.0); }, ModelId::I, obs, traj,
                       FitConfig{}, 9, 13),
        std::invalid_argument);
}

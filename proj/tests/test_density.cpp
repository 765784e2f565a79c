#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "enslab/density.hpp"
#include "enslab/rng.hpp"

using namespace enslab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Simpson integration of a pdf over [lo, hi].
template <typename F>
double integrate(F&& f, double lo, double hi, std::size_t n = 20000) {
    if (n % 2) ++n;
    double h = (hi - lo) / static_cast<double>(n);
    double acc = f(lo) + f(hi);
    for (std::size_t k = 1; k < n; ++k)
        acc += f(lo + h * static_cast<double>(k)) * (k % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

Climatology test_climatology(std::uint64_t seed = 51, std::size_t n = 2048) {
    auto eng = make_engine(seed);
    std::normal_distribution<double> dist(1.0, 0.6);
    std::vector<double> sample(n);
    for (auto& x : sample) x = std::abs(dist(eng)) + 1e-3;
    return make_climatology(std::move(sample));
}

}  // namespace

TEST_CASE("kernel dressing: exact single-kernel values", "[density]") {
    DressedDensity d{{0.0}, 1.0};
    CHECK_THAT(dressed_pdf(d, 0.0), WithinRel(inv_sqrt_2pi, 1e-15));
    DressedDensity half{{1.0}, 2.0};
    CHECK_THAT(dressed_pdf(half, 1.0), WithinRel(inv_sqrt_2pi / 2.0, 1e-15));
    // one standard deviation off the center
    CHECK_THAT(dressed_pdf(d, 1.0), WithinRel(inv_sqrt_2pi * std::exp(-0.5), 1e-14));
}

TEST_CASE("kernel dressing averages over members", "[density]") {
    DressedDensity d{{-1.0, 1.0}, 1.0};
    double expected = 0.5 * (std::exp(-0.5 * 0.0) + std::exp(-0.5 * 4.0)) * inv_sqrt_2pi;
    CHECK_THAT(dressed_pdf(d, -1.0), WithinRel(expected, 1e-14));
    CHECK(dressed_pdf(d, -1.0) == dressed_pdf(d, 1.0));  // symmetry
}

TEST_CASE("dressed density integrates to one", "[density]") {
    auto eng = make_engine(31);
    std::uniform_real_distribution<double> u(0.0, 2.5);
    std::uniform_real_distribution<double> us(0.02, 1.5);
    for (int rep = 0; rep < 5; ++rep) {
        DressedDensity d;
        d.sigma = us(eng);
        for (int j = 0; j < 9; ++j) d.centers.push_back(u(eng));
        double mass = integrate([&](double y) { return dressed_pdf(d, y); }, -15.0, 18.0);
        CHECK_THAT(mass, WithinAbs(1.0, 1e-6));
    }
}

TEST_CASE("dressing rejects degenerate inputs", "[density]") {
    CHECK_THROWS(dressed_pdf(DressedDensity{{}, 1.0}, 0.0));
    CHECK_THROWS(dressed_pdf(DressedDensity{{1.0}, 0.0}, 0.0));
    CHECK_THROWS(dressed_pdf(DressedDensity{{1.0}, -1.0}, 0.0));
}

TEST_CASE("climatology uses Silverman's bandwidth", "[density]") {
    std::vector<double> ramp(2048);
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.001 * static_cast<double>(i);
    Climatology c = make_climatology(ramp);
    CHECK_THAT(c.bandwidth, WithinRel(0.11583021202367179, 1e-12));
    CHECK(c.sample.size() == 2048);
}

TEST_CASE("climatology requires a large sample", "[density]") {
    CHECK_THROWS(make_climatology(std::vector<double>(2047, 1.0)));
    CHECK_THROWS(make_climatology(std::vector<double>(2048, 1.0)));  // zero spread
}

TEST_CASE("climatology density integrates to one", "[density]") {
    Climatology c = test_climatology();
    double mass = integrate([&](double y) { return climatology_pdf(c, y); }, -5.0, 8.0);
    CHECK_THAT(mass, WithinAbs(1.0, 1e-6));
}

TEST_CASE("blend endpoints and interior", "[density]") {
    CHECK(blend_values(0.8, 0.2, 1.0) == 0.8);
    CHECK(blend_values(0.8, 0.2, 0.0) == 0.2);
    CHECK_THAT(blend_values(0.8, 0.2, 0.25), WithinRel(0.35, 1e-15));
}

TEST_CASE("blended density stays between its parts and integrates to one", "[density]") {
    Climatology c = test_climatology();
    BlendedDensity b;
    b.model_part = DressedDensity{{0.4, 0.5, 0.9, 1.4}, 0.2};
    b.climo = &c;
    b.alpha = 0.37;
    for (double y : {0.1, 0.5, 1.0, 2.0, 3.5}) {
        double pm = dressed_pdf(b.model_part, y);
        double pc = climatology_pdf(c, y);
        double p = blended_pdf(b, y);
        CHECK(p >= std::min(pm, pc) - 1e-15);
        CHECK(p <= std::max(pm, pc) + 1e-15);
    }
    double mass = integrate([&](double y) { return blended_pdf(b, y); }, -6.0, 9.0);
    CHECK_THAT(mass, WithinAbs(1.0, 1e-6));
    b.alpha = 1.5;
    CHECK_THROWS(blended_pdf(b, 1.0));
}

TEST_CASE("multi-model mixture validates weights", "[density]") {
    Climatology c = test_climatology();
    MultiModelDensity mm;
    for (double center : {0.5, 1.0}) {
        BlendedDensity b;
        b.model_part = DressedDensity{{center}, 0.3};
        b.climo = &c;
        b.alpha = 0.5;
        mm.components.push_back(b);
    }
    mm.weights.omega = {0.25, 0.75};
    double direct = 0.25 * blended_pdf(mm.components[0], 0.8) +
                    0.75 * blended_pdf(mm.components[1], 0.8);
    CHECK_THAT(multimodel_pdf(mm, 0.8), WithinRel(direct, 1e-15));
    double mass = integrate([&](double y) { return multimodel_pdf(mm, y); }, -6.0, 9.0);
    CHECK_THAT(mass, WithinAbs(1.0, 1e-6));

    mm.weights.omega = {0.5, 0.6};
    CHECK_THROWS(multimodel_pdf(mm, 0.8));
    mm.weights.omega = {-0.2, 1.2};
    CHECK_THROWS(multimodel_pdf(mm, 0.8));
    mm.weights.omega = {1.0};
    CHECK_THROWS(multimodel_pdf(mm, 0.8));
}

TEST_CASE("ignorance of one half is exactly one bit", "[density]") {
    CHECK(ignorance(0.5) == 1.0);
    CHECK(ignorance(1.0) == 0.0);
    CHECK(ignorance(0.25) == 2.0);
}

TEST_CASE("zero density is an infinite bust, never clipped", "[density]") {
    CHECK(std::isinf(ignorance(0.0)));
    CHECK(ignorance(0.0) > 0);
    CHECK_THROWS(ignorance(-0.1));
    CHECK(std::isinf(empirical_ignorance({0.5, 0.0, 0.5})));
}

TEST_CASE("empirical ignorance averages pointwise scores", "[density]") {
    CHECK_THAT(empirical_ignorance({0.5, 0.25}), WithinRel(1.5, 1e-15));
    CHECK_THROWS(empirical_ignorance({}));
}

TEST_CASE("locality: density far from all members is negligible", "[density]") {
    DressedDensity d{{1.0, 1.2, 0.8}, 0.1};
    CHECK(dressed_pdf(d, 50.0) < 1e-300);
    CHECK((std::isinf(ignorance(dressed_pdf(d, 50.0))) ||
           ignorance(dressed_pdf(d, 50.0)) > 900));
}

TEST_CASE("scoring the true density wins on average", "[density]") {
    // Gibbs inequality at modest sample size: true N(0,1) versus shifted
    // and rescaled alternatives, empirical mean difference > 4 SE
    auto eng = make_engine(77);
    std::normal_distribution<double> dist(0.0, 1.0);
    const std::size_t n = 20000;
    auto pdf = [](double x, double mu, double sd) {
        double z = (x - mu) / sd;
        return inv_sqrt_2pi / sd * std::exp(-0.5 * z * z);
    };
    std::vector<std::pair<double, double>> rivals{{0.3, 1.0}, {0.0, 1.3}, {0.0, 0.75}};
    for (auto [mu, sd] : rivals) {
        double mean_diff = 0.0, m2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double x = dist(eng);
            double d = ignorance(pdf(x, 0.0, 1.0)) - ignorance(pdf(x, mu, sd));
            double delta = d - mean_diff;
            mean_diff += delta / static_cast<double>(i + 1);
            m2 += delta * (d - mean_diff);
        }
        double se = std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
        CHECK(mean_diff < -4.0 * se);
    }
}

TEST_CASE("differential entropy of the unit normal in bits", "[density]") {
    // E[-log2 phi(X)] = 0.5 log2(2 pi e)
    auto eng = make_engine(123);
    std::normal_distribution<double> dist(0.0, 1.0);
    const std::size_t n = 100000;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double x = dist(eng);
        acc += ignorance(inv_sqrt_2pi * std::exp(-0.5 * x * x));
    }
    CHECK_THAT(acc / n, WithinAbs(2.047095585180641, 0.02));
}

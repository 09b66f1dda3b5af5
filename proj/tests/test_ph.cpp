#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "survscreen/cox.hpp"
#include "survscreen/datagen.hpp"
#include "survscreen/ph_test.hpp"
#include "survscreen/rng.hpp"

using namespace survscreen;

namespace {

struct PhData {
    Matrix X;
    Vector time;
    std::vector<std::uint8_t> event;
};

// exact proportional-hazards data: T = -ln(U) exp(-beta x)
PhData ph_data(RngStream& rng, std::size_t n, double beta, double censor_rate = 0.2) {
    PhData d;
    d.X = Matrix(n, 1);
    d.time.resize(n);
    d.event.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.X(i, 0) = rng.normal();
        const double t = event_time_from_uniform(rng.uniform_open01(), beta * d.X(i, 0), 1.0);
        if (rng.bernoulli(censor_rate)) {
            d.event[i] = 0;
            d.time[i] = rng.uniform_open01() * t;
        } else {
            d.event[i] = 1;
            d.time[i] = t;
        }
    }
    return d;
}

}  // namespace

TEST_CASE("schoenfeld residual columns sum to zero at the optimum", "[ph]") {
    RngStream rng = derive_stream(80, 0, 0);
    for (int rep = 0; rep < 5; ++rep) {
        const std::size_t n = 150;
        PhData d = ph_data(rng, n, 0.8);
        Matrix X2(n, 2);
        for (std::size_t i = 0; i < n; ++i) {
            X2(i, 0) = d.X(i, 0);
            X2(i, 1) = rng.normal();
        }
        const CoxFit fit = fit_cox(X2, d.time, d.event);
        REQUIRE(fit.converged);
        const Matrix res = schoenfeld_residuals(fit, X2, d.time, d.event);
        for (std::size_t j = 0; j < 2; ++j) {
            double sum = 0.0;
            for (std::size_t r = 0; r < res.rows(); ++r) sum += res(r, j);
            CHECK(std::fabs(sum) < 1e-6);
        }
    }
}

TEST_CASE("single-event dataset gives one residual row", "[ph]") {
    Matrix X(3, 1);
    X(0, 0) = 1.0;
    X(1, 0) = 0.0;
    X(2, 0) = -1.0;
    const Vector time = {1.0, 2.0, 3.0};
    const std::vector<std::uint8_t> event = {1, 0, 0};
    CoxFit fake;  // schoenfeld_residuals only reads coefficients and converged
    fake.coefficients = {0.0};
    fake.converged = true;
    const Matrix res = schoenfeld_residuals(fake, X, time, event);
    REQUIRE(res.rows() == 1);
    // risk set is everyone; uniform weights at beta=0
    CHECK(res(0, 0) == Catch::Approx(1.0 - 0.0 / 3.0).margin(1e-12));
}

TEST_CASE("residual rows match the per-event score decomposition", "[ph]") {
    RngStream rng = derive_stream(81, 0, 0);
    const std::size_t n = 60;
    PhData d = ph_data(rng, n, 0.5);
    const CoxFit fit = fit_cox(d.X, d.time, d.event);
    REQUIRE(fit.converged);
    const Matrix res = schoenfeld_residuals(fit, d.X, d.time, d.event);

    // independent construction: finite differences of each event's own term
    // l_i(b) = b x_i - ln sum_{t_j >= t_i} exp(b x_j)
    std::vector<std::size_t> events;
    for (std::size_t i = 0; i < n; ++i)
        if (d.event[i]) events.push_back(i);
    std::sort(events.begin(), events.end(),
              [&](std::size_t a, std::size_t b) { return d.time[a] < d.time[b]; });
    REQUIRE(events.size() == res.rows());
    for (std::size_t k = 0; k < events.size(); ++k) {
        const std::size_t i = events[k];
        auto term = [&](double b) {
            double denom = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (d.time[j] >= d.time[i]) denom += std::exp(b * d.X(j, 0));
            return b * d.X(i, 0) - std::log(denom);
        };
        const double h = 1e-6;
        const double fd = (term(fit.coefficients[0] + h) - term(fit.coefficients[0] - h)) /
                          (2.0 * h);
        CHECK(res(k, 0) == Catch::Approx(fd).margin(1e-8));
    }
}

TEST_CASE("km transform values on a hand-checked sample", "[ph]") {
    const Vector time = {1.0, 2.0, 3.0, 4.0};
    const std::vector<std::uint8_t> event = {1, 1, 1, 1};
    const Vector g = detail::km_transform(time, event);
    REQUIRE(g.size() == 4);
    CHECK(g[0] == Catch::Approx(0.0).margin(1e-14));        // 1 - S(t1-) = 1 - 1
    CHECK(g[1] == Catch::Approx(0.25).margin(1e-14));       // 1 - 3/4
    CHECK(g[2] == Catch::Approx(0.5).margin(1e-14));        // 1 - 1/2
    CHECK(g[3] == Catch::Approx(0.75).margin(1e-14));       // 1 - 1/4
    // censored subject thins the risk set without moving the curve
    const std::vector<std::uint8_t> with_censor = {1, 0, 1, 1};
    const Vector g2 = detail::km_transform(time, with_censor);
    REQUIRE(g2.size() == 3);
    CHECK(g2[0] == Catch::Approx(0.0).margin(1e-14));
    CHECK(g2[1] == Catch::Approx(0.25).margin(1e-14));      // 1 - 3/4, risk set {3,4}
    CHECK(g2[2] == Catch::Approx(1.0 - 0.75 * 0.5).margin(1e-14));
}

TEST_CASE("ph test output has valid ranges and all transforms run", "[ph]") {
    RngStream rng = derive_stream(82, 0, 0);
    PhData d = ph_data(rng, 200, 0.6);
    const CoxFit fit = fit_cox(d.X, d.time, d.event);
    REQUIRE(fit.converged);
    for (TimeTransform t : {TimeTransform::km, TimeTransform::rank, TimeTransform::identity}) {
        const PhTestResult res = ph_test(fit, d.X, d.time, d.event, t);
        REQUIRE(res.per_covariate_chisq.size() == 1);
        CHECK(res.per_covariate_chisq[0] >= 0.0);
        CHECK(res.per_covariate_p[0] >= 0.0);
        CHECK(res.per_covariate_p[0] <= 1.0);
        CHECK(res.global_chisq >= 0.0);
        CHECK(res.n_events >= 10);
    }
}

TEST_CASE("ph test is invariant to subject permutation", "[ph]") {
    RngStream rng = derive_stream(83, 0, 0);
    const std::size_t n = 120;
    PhData d = ph_data(rng, n, 0.4);
    const CoxFit fit = fit_cox(d.X, d.time, d.event);
    REQUIRE(fit.converged);
    const PhTestResult base = ph_test(fit, d.X, d.time, d.event);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
    PhData shuffled;
    shuffled.X = Matrix(n, 1);
    shuffled.time.resize(n);
    shuffled.event.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        shuffled.X(i, 0) = d.X(perm[i], 0);
        shuffled.time[i] = d.time[perm[i]];
        shuffled.event[i] = d.event[perm[i]];
    }
    const CoxFit fit2 = fit_cox(shuffled.X, shuffled.time, shuffled.event);
    const PhTestResult moved = ph_test(fit2, shuffled.X, shuffled.time, shuffled.event);
    CHECK(moved.per_covariate_chisq == base.per_covariate_chisq);
    CHECK(moved.global_chisq == base.global_chisq);
}

TEST_CASE("ph test error paths", "[ph]") {
    RngStream rng = derive_stream(84, 0, 0);
    PhData d = ph_data(rng, 80, 0.3);
    CoxFit unconverged = fit_cox(d.X, d.time, d.event);
    unconverged.converged = false;
    CHECK_THROWS_AS(ph_test(unconverged, d.X, d.time, d.event), PhTestFailure);

    // fewer than 10 events
    PhData tiny = ph_data(rng, 60, 0.3);
    std::size_t kept = 0;
    for (auto& e : tiny.event) {
        if (e && kept < 8)
            ++kept;
        else
            e = 0;
    }
    const CoxFit fit = fit_cox(tiny.X, tiny.time, tiny.event);
    if (fit.converged) CHECK_THROWS_AS(ph_test(fit, tiny.X, tiny.time, tiny.event), PhTestFailure);
}

TEST_CASE("ph test null rejection rate near five percent under exact PH", "[ph]") {
    RngStream rng = derive_stream(85, 0, 0);
    const int reps = 10000;
    std::size_t rejected = 0, usable = 0;
    for (int rep = 0; rep < reps; ++rep) {
        PhData d = ph_data(rng, 120, 0.2, 0.15);
        try {
            const CoxFit fit = fit_cox(d.X, d.time, d.event);
            if (!fit.converged) continue;
            const PhTestResult res = ph_test(fit, d.X, d.time, d.event);
            ++usable;
            rejected += res.per_covariate_p[0] < 0.05;
        } catch (const std::exception&) {
        }
    }
    REQUIRE(usable > 9500);
    CHECK(static_cast<double>(rejected) / static_cast<double>(usable) ==
          Catch::Approx(0.05).margin(0.01));
}

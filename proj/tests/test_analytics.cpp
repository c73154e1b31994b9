#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "hazardcp/analytics.hpp"
#include "hazardcp/model.hpp"
#include "hazardcp/quadrature.hpp"

using namespace hazardcp;
using Catch::Approx;

namespace {

ModelParams table2() { return new_params(0.0, 0.25, 0.0366, 0.1148, 0.15); }

// Mixture quadrature over the change-point law; independent of kappa.
double survival_oracle(const ModelParams& p, double T, double pi) {
    const double quad = adaptive_simpson(
        [&](double x) {
            return p.lambda * std::exp(-p.lambda * x) * std::exp(-cumulative_hazard(p, x, T));
        },
        0.0, T, 1e-13, 48);
    return pi * std::exp(-p.mu2 * T) + (1.0 - pi) * (quad + std::exp(-(p.mu1 + p.lambda) * T));
}

std::vector<double> interior_grid(double T, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = T * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    return g;
}

}  // namespace

TEST_CASE("full-information survival: terminal and absorbed cases", "[analytics]") {
    const ModelParams p = table2();
    CHECK(survival_full(p, FullInfoState{10.0, 10.0, false, true}) == 1.0);
    CHECK(survival_full(p, FullInfoState{10.0, 10.0, true, true}) == 0.0);
    CHECK(survival_full(p, FullInfoState{2.0, 10.0, true, false}) == 0.0);
    CHECK_THROWS_AS(survival_full(p, FullInfoState{11.0, 10.0, false, true}), DomainError);
}

TEST_CASE("time-zero survival agrees with the mixture quadrature", "[analytics][oracle]") {
    const ModelParams p = table2();
    const double cf = survival_full(p, FullInfoState{0.0, 10.0, false, true});
    CHECK(cf == Approx(survival_oracle(p, 10.0, 0.0)).margin(1e-9));
    CHECK(cf == Approx(0.4358).margin(5e-4));

    // post-change branch is a plain exponential
    const double post = survival_full(p, FullInfoState{0.0, 10.0, false, false});
    CHECK(post == Approx(std::exp(-p.mu2 * 10.0)).margin(1e-14));
}

TEST_CASE("partial survival is the affine mix of the full branches", "[analytics]") {
    const ModelParams p = table2();
    const double t = 1.5, T = 10.0;
    const double f1 = survival_full(p, FullInfoState{t, T, false, true});
    const double f2 = survival_full(p, FullInfoState{t, T, false, false});
    CHECK(survival_partial(p, PartialInfoState{t, T, false, 0.0}) == Approx(f1).margin(1e-15));
    CHECK(survival_partial(p, PartialInfoState{t, T, false, 1.0}) == Approx(f2).margin(1e-15));
    for (double pi : {0.1, 0.37, 0.62, 0.94}) {
        const double s = survival_partial(p, PartialInfoState{t, T, false, pi});
        CHECK(s == Approx((1.0 - pi) * f1 + pi * f2).margin(1e-15));
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }
    CHECK(survival_partial(p, PartialInfoState{T, T, false, 0.5}) == 1.0);
    CHECK(survival_partial(p, PartialInfoState{T, T, true, 0.5}) == 0.0);
    CHECK_THROWS_AS(survival_partial(p, PartialInfoState{1.0, 10.0, false, 1.5}), DomainError);
}

TEST_CASE("survival is nonincreasing in the horizon", "[analytics][property]") {
    const ModelParams p = table2();
    for (double pi : {0.0, 0.4, 1.0}) {
        double prev = 1.0;
        for (double T = 0.5; T <= 20.0; T += 0.5) {
            const double s = survival_partial(p, PartialInfoState{0.0, T, false, pi});
            CHECK(s <= prev + 1e-14);
            prev = s;
        }
    }
}

TEST_CASE("degenerate-case survival is the limit of the general case", "[analytics]") {
    const double lam = 0.25, mu1 = 0.0366, beta = 0.15;
    const ModelParams deg = new_params(0.0, lam, mu1, mu1 + lam, beta);
    REQUIRE(deg.degenerate());
    const PartialInfoState st{1.0, 10.0, false, 0.3};
    for (double eps : {1e-9, -1e-9}) {
        const ModelParams near = new_params(0.0, lam, mu1, mu1 + lam + eps, beta, 1e-12);
        REQUIRE_FALSE(near.degenerate());
        CHECK(std::fabs(survival_partial(deg, st) - survival_partial(near, st)) <= 1e-6);
    }
}

TEST_CASE("partial density: absorbed state, endpoints, integral identity", "[analytics][oracle]") {
    const ModelParams p = table2();
    const double t = 1.0, T = 10.0;
    CHECK(density_partial(p, PartialInfoState{t, T, true, 0.4}, 3.0) == 0.0);
    CHECK_THROWS_AS(density_partial(p, PartialInfoState{t, T, false, 0.4}, 0.5), DomainError);

    // pi = 1 collapses to the post-change exponential density
    for (double s : {1.0, 2.5, 7.0}) {
        CHECK(density_partial(p, PartialInfoState{t, T, false, 1.0}, s) ==
              Approx(p.mu2 * std::exp(-p.mu2 * (s - t))).margin(1e-14));
    }

    for (double pi : {0.0, 0.3, 0.8}) {
        const PartialInfoState st{t, T, false, pi};
        const double integral =
            adaptive_simpson([&](double s) { return density_partial(p, st, s); }, t, T, 1e-12, 48);
        CHECK(std::fabs(integral + survival_partial(p, st) - 1.0) <= 1e-8);
    }
}

TEST_CASE("density equals the negative horizon derivative of survival", "[analytics][oracle]") {
    const ModelParams p = table2();
    const double t = 2.0;
    for (double pi : {0.0, 0.5, 1.0}) {
        for (double T : {4.0, 8.0}) {
            const double h = 1e-5;
            const auto surv = [&](double TT) {
                return survival_partial(p, PartialInfoState{t, TT, false, pi});
            };
            const double deriv = -(surv(T + h) - surv(T - h)) / (2.0 * h);
            const double dens = density_partial(p, PartialInfoState{t, T, false, pi}, T);
            CHECK(std::fabs(deriv - dens) <= 1e-6);
        }
    }
}

TEST_CASE("full-information density: instantaneous hazard before the change", "[analytics]") {
    const ModelParams p = table2();
    const double t = 3.0;
    // algebraic identity (mu1+lambda) kappa + mu2 (1 - kappa) = mu1
    const double kappa = *p.kappa;
    CHECK((p.mu1 + p.lambda) * kappa + p.mu2 * (1.0 - kappa) == Approx(p.mu1).margin(1e-12));
    CHECK(density_full(p, FullInfoState{t, 10.0, false, true}, t) == Approx(p.mu1).margin(1e-12));
    // after the change the density is the mu2 exponential
    for (double s : {3.0, 5.0}) {
        CHECK(density_full(p, FullInfoState{t, 10.0, false, false}, s) ==
              Approx(p.mu2 * std::exp(-p.mu2 * (s - t))).margin(1e-14));
    }
    const FullInfoState pre{t, 10.0, false, true};
    const double integral =
        adaptive_simpson([&](double s) { return density_full(p, pre, s); }, t, 10.0, 1e-12, 48);
    CHECK(std::fabs(integral + survival_full(p, pre) - 1.0) <= 1e-8);
}

TEST_CASE("densities stay nonnegative across parameter signs", "[analytics][property]") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int rep = 0; rep < 500; ++rep) {
        const double mu1 = 0.01 + unif(rng);
        const double mu2 = 0.01 + unif(rng);  // either sign of delta_mu
        const double lam = 0.01 + unif(rng);
        const ModelParams p = new_params(0.0, lam, mu1, mu2, 1.0);
        const double pi = unif(rng);
        const double u = 10.0 * unif(rng);
        const double d = density_partial(p, PartialInfoState{0.0, 20.0, false, pi}, u);
        CHECK(d >= 0.0);
    }
}

TEST_CASE("generator residual vanishes on the closed form", "[analytics][oracle]") {
    const ModelParams p = table2();
    const auto grid = interior_grid(10.0, 100);
    CHECK(generator_residual(p, 10.0, grid, 1e-5) <= 1e-6);

    // degenerate-case formulas satisfy the same ODE system
    const ModelParams deg = new_params(0.0, 0.25, 0.0366, 0.2866, 0.15);
    CHECK(generator_residual(deg, 10.0, grid, 1e-5) <= 1e-6);
}

TEST_CASE("generator residual flags a perturbed candidate", "[analytics]") {
    const ModelParams p = table2();
    const auto grid = interior_grid(10.0, 100);
    const auto f = closed_form_survival(p, 10.0);
    const auto perturbed = [&f](double t, bool post, int h) {
        return f(t, post, h) + ((!post && h == 0) ? 1e-3 : 0.0);
    };
    CHECK(ode_residual_max(p, 10.0, grid, 1e-5, perturbed) >= p.lambda * 5e-4);
}

TEST_CASE("partial survival second derivative in pi is numerically zero", "[analytics]") {
    const ModelParams p = table2();
    const auto t_grid = interior_grid(10.0, 7);
    const std::vector<double> pis = {0.2, 0.5, 0.8};
    CHECK(pi_second_derivative_max(p, 10.0, t_grid, pis) <= 1e-9);
}

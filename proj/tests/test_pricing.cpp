#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hazardcp/model.hpp"
#include "hazardcp/montecarlo.hpp"
#include "hazardcp/pricing.hpp"
#include "hazardcp/quadrature.hpp"

using namespace hazardcp;
using Catch::Approx;

namespace {

ModelParams table2() { return new_params(0.0, 0.25, 0.0366, 0.1148, 0.15); }
constexpr double kR = 0.0263;
constexpr double kT = 10.0;

// Romberg integration; a second, structurally different quadrature used as
// an oracle against the adaptive Simpson in the pricing legs.
template <typename F>
double romberg(const F& f, double a, double b, int levels = 18) {
    std::vector<std::vector<double>> r(levels, std::vector<double>(levels, 0.0));
    double h = b - a;
    r[0][0] = 0.5 * h * (f(a) + f(b));
    for (int i = 1; i < levels; ++i) {
        h *= 0.5;
        double sum = 0.0;
        const long terms = 1L << (i - 1);
        for (long k = 1; k <= terms; ++k) sum += f(a + (2.0 * k - 1.0) * h);
        r[i][0] = 0.5 * r[i - 1][0] + h * sum;
        double factor = 4.0;
        for (int j = 1; j <= i; ++j) {
            r[i][j] = (factor * r[i][j - 1] - r[i - 1][j - 1]) / (factor - 1.0);
            factor *= 4.0;
        }
    }
    return r[levels - 1][levels - 1];
}

}  // namespace

TEST_CASE("adaptive Simpson hits smooth integrals and reports failure", "[quadrature]") {
    CHECK(adaptive_simpson([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-12) ==
          Approx(std::exp(1.0) - 1.0).margin(1e-11));
    CHECK(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-12) ==
          Approx(2.0).margin(1e-11));
    CHECK_THROWS_AS(adaptive_simpson([](double x) { return x < 0.5 ? 0.0 : 1.0; }, 0.0, 1.0, 1e-14, 16),
                    QuadratureError);
}

TEST_CASE("pure discounted-survival contract prices as disc times survival", "[pricing]") {
    const ModelParams p = table2();
    ContractSpec c = ContractSpec::coupon_bond(kT, RateCurve::constant(kR), 1.0, nullptr, nullptr);
    for (double pi : {0.0, 0.4, 1.0}) {
        const PartialInfoState st{0.0, kT, false, pi};
        const double expected = std::exp(-kR * kT) * survival_partial(p, st);
        CHECK(price_general(p, c, st) == Approx(expected).margin(1e-12));
    }
    CHECK(price_general(p, c, PartialInfoState{0.0, kT, true, 0.4}) == 0.0);
}

TEST_CASE("general pricer matches the zero-coupon closed form", "[pricing][oracle]") {
    const ModelParams p = table2();
    for (double delta : {0.0, 0.5, 1.0}) {
        const ContractSpec c = ContractSpec::zcb(kT, RateCurve::constant(kR), delta);
        for (double pi : {0.0, 0.3, 0.9}) {
            for (double t : {0.0, 4.0}) {
                const PartialInfoState st{t, kT, false, pi};
                CHECK(price_general(p, c, st) ==
                      Approx(price_dzcb_partial(p, kR, delta, st)).margin(1e-8));
            }
        }
    }
}

TEST_CASE("zero-coupon closed form hits the calibrated preset values", "[pricing]") {
    const ModelParams p = table2();
    const PartialInfoState st{0.0, kT, false, 0.0};
    const double p0 = price_dzcb_partial(p, kR, 0.0, st);
    CHECK(p0 == Approx(std::exp(-kR * kT) *
                       survival_partial(p, PartialInfoState{0.0, kT, false, 0.0}))
                    .margin(1e-12));
    CHECK(p0 == Approx(0.3350).margin(5e-4));
    CHECK(price_dzcb_partial(p, kR, 0.5, st) == Approx(0.5832).margin(1e-3));
    CHECK(price_dzcb_partial(p, kR, 0.5, PartialInfoState{kT, kT, false, 0.3}) == 1.0);
    CHECK(price_dzcb_partial(p, kR, 0.5, PartialInfoState{2.0, kT, true, 0.3}) == 0.0);
}

TEST_CASE("zero-coupon price bounds and monotonicity in pi", "[pricing][property]") {
    const ModelParams p = table2();
    for (double delta : {0.0, 0.5, 1.0}) {
        for (double t : {0.0, 3.0, 9.5}) {
            double prev = 2.0;
            for (double pi = 0.0; pi <= 1.0001; pi += 0.05) {
                const double v = price_dzcb_partial(p, kR, delta, PartialInfoState{t, kT, false, std::min(pi, 1.0)});
                CHECK(v >= 0.0);
                CHECK(v <= 1.0 + 1e-12);
                if (delta < 1.0) CHECK(v <= prev + 1e-12);  // higher pi cannot raise the price
                prev = v;
            }
        }
    }
    // full recovery floors the price at the riskless discount
    for (double t : {0.0, 5.0}) {
        for (double pi : {0.0, 0.5, 1.0}) {
            CHECK(price_dzcb_partial(p, kR, 1.0, PartialInfoState{t, kT, false, pi}) >=
                  std::exp(-kR * (kT - t)) - 1e-12);
        }
    }
}

TEST_CASE("full-information price agrees with the filter endpoints and drops at the change",
          "[pricing]") {
    const ModelParams p = table2();
    for (double delta : {0.0, 0.5}) {
        for (double t : {0.0, 4.0}) {
            const double pre = price_dzcb_full(p, kR, delta, FullInfoState{t, kT, false, true});
            const double post = price_dzcb_full(p, kR, delta, FullInfoState{t, kT, false, false});
            CHECK(pre == Approx(price_dzcb_partial(p, kR, delta, PartialInfoState{t, kT, false, 0.0}))
                             .margin(1e-14));
            CHECK(post == Approx(price_dzcb_partial(p, kR, delta, PartialInfoState{t, kT, false, 1.0}))
                              .margin(1e-14));
            CHECK(pre > post);
        }
    }
}

TEST_CASE("degenerate-case prices are the limit of the general case", "[pricing]") {
    const double lam = 0.25, mu1 = 0.0366;
    const ModelParams deg = new_params(0.0, lam, mu1, mu1 + lam, 0.15);
    const PartialInfoState st{1.5, kT, false, 0.3};
    for (double delta : {0.0, 0.5, 1.0}) {
        for (double eps : {1e-9, -1e-9}) {
            const ModelParams near = new_params(0.0, lam, mu1, mu1 + lam + eps, 0.15, 1e-12);
            CHECK(std::fabs(price_dzcb_partial(deg, kR, delta, st) -
                            price_dzcb_partial(near, kR, delta, st)) <= 1e-6);
        }
    }
    // and against the general quadrature pricer on the degenerate params
    const ContractSpec c = ContractSpec::zcb(kT, RateCurve::constant(kR), 0.5);
    CHECK(price_general(deg, c, st) == Approx(price_dzcb_partial(deg, kR, 0.5, st)).margin(1e-8));
}

TEST_CASE("swap legs carry the stated signs", "[pricing]") {
    const ModelParams p = table2();
    const PartialInfoState st{0.0, kT, false, 0.0};
    const ContractSpec protection_only =
        ContractSpec::cds(kT, RateCurve::constant(kR), nullptr, [](double) { return 0.6; });
    CHECK(price_cds(p, protection_only, st) > 0.0);
    const ContractSpec premium_only =
        ContractSpec::cds(kT, RateCurve::constant(kR), [](double) { return 0.02; }, nullptr);
    CHECK(price_cds(p, premium_only, st) < 0.0);
    CHECK(price_cds(p, premium_only, PartialInfoState{0.0, kT, true, 0.0}) == 0.0);
    const ContractSpec bond = ContractSpec::zcb(kT, RateCurve::constant(kR), 0.5);
    CHECK_THROWS_AS(price_cds(p, bond, st), DomainError);
}

TEST_CASE("fair swap spread zeroes the Monte Carlo value", "[pricing][statistical]") {
    const ModelParams p = table2();
    const PartialInfoState st{0.0, kT, false, 0.0};
    const double w = 0.6;
    const auto value_at = [&](double spread) {
        const ContractSpec c = ContractSpec::cds(
            kT, RateCurve::constant(kR), [spread](double) { return spread; },
            [w](double) { return w; });
        return price_cds(p, c, st);
    };
    double lo = 0.0, hi = 0.5;
    REQUIRE(value_at(hi) < 0.0);
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (value_at(mid) > 0.0 ? lo : hi) = mid;
    }
    const double fair = 0.5 * (lo + hi);

    // pathwise swap value at the fair spread, exact event times
    const std::size_t n = 200000;
    std::vector<double> vals(n);
    Rng rng = make_rng(31415);
    std::exponential_distribution<double> expo(1.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double xi = sample_change_point(p, rng);
        const double tau = sample_default_time(p, xi, expo(rng));
        const double stop = std::min(tau, kT);
        const double annuity = (1.0 - std::exp(-kR * stop)) / kR;
        const double prot = tau <= kT ? w * std::exp(-kR * tau) : 0.0;
        vals[k] = prot - fair * annuity;
    }
    const MeanSe m = mean_and_se(vals);
    CHECK(std::fabs(m.mean) <= 3.0 * m.std_error);
}

TEST_CASE("market-factor pricing reduces to the plain legs for constants", "[pricing]") {
    const ModelParams p = table2();
    const RateCurve rate = RateCurve::constant(kR);
    const PartialInfoState st{0.0, kT, false, 0.2};

    MarketFactorHooks hooks;
    hooks.expect_psi_at = [](double) { return 0.6; };
    hooks.expect_phi_T = 1.0;
    const ContractSpec c = ContractSpec::coupon_bond(kT, rate, 1.0, nullptr, [](double) { return 0.6; });
    CHECK(price_with_market_factor(p, hooks, rate, st, kT) ==
          Approx(price_general(p, c, st)).margin(1e-10));

    MarketFactorHooks survival_only;
    survival_only.expect_psi_at = [](double) { return 0.0; };
    survival_only.expect_phi_T = 1.0;
    CHECK(price_with_market_factor(p, survival_only, rate, st, kT) ==
          Approx(std::exp(-kR * kT) * survival_partial(p, st)).margin(1e-12));
}

TEST_CASE("market-factor pricing matches an independent integrator", "[pricing][oracle]") {
    const ModelParams p = table2();
    const RateCurve rate = RateCurve::constant(kR);
    const PartialInfoState st{0.0, kT, false, 0.2};
    const double g = 0.03;
    MarketFactorHooks hooks;
    hooks.expect_psi_at = [g](double s) { return std::exp(g * s); };
    hooks.expect_phi_T = 2.0;
    const double got = price_with_market_factor(p, hooks, rate, st, kT);
    const double leg = romberg(
        [&](double s) {
            return std::exp(-kR * s) * std::exp(g * s) * density_partial(p, st, s);
        },
        0.0, kT);
    const double expected = leg + std::exp(-kR * kT) * 2.0 * survival_partial(p, st);
    CHECK(got == Approx(expected).margin(1e-8));
}

TEST_CASE("non-constant rate curve discounts through quadrature", "[pricing]") {
    const RateCurve curve = RateCurve::from_function([](double t) { return 0.02 + 0.01 * t; });
    const double a = 1.0, b = 4.0;
    const double exact = 0.02 * (b - a) + 0.005 * (b * b - a * a);
    CHECK(curve.integral(a, b) == Approx(exact).margin(1e-10));
    CHECK(curve.discount(a, b) == Approx(std::exp(-exact)).margin(1e-10));
    CHECK_THROWS_AS(RateCurve::constant(0.0), DomainError);
    const RateCurve bad = RateCurve::from_function([](double) { return -0.01; });
    CHECK_THROWS_AS(bad.integral(0.0, 1.0), DomainError);
}

TEST_CASE("recovery outside its bounds is rejected", "[pricing]") {
    const ModelParams p = table2();
    const ContractSpec c = ContractSpec::coupon_bond(kT, RateCurve::constant(kR), 1.0, nullptr,
                                                     [](double) { return 1.5; });
    CHECK_THROWS_AS(price_general(p, c, PartialInfoState{0.0, kT, false, 0.0}), DomainError);
}

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "hazardcp/errors.hpp"
#include "hazardcp/filter.hpp"
#include "hazardcp/model.hpp"

namespace hazardcp {

// Valuation state when the regime indicator is observable: carries 1{xi > t}.
struct FullInfoState {
    double t = 0.0;
    double horizon_T = 0.0;
    bool defaulted = false;   // H_t
    bool pre_change = true;   // 1{xi > t}
};

// Valuation state under the observation filtration: carries the filter value.
struct PartialInfoState {
    double t = 0.0;
    double horizon_T = 0.0;
    bool defaulted = false;  // H_t
    double pi = 0.0;         // Pi_t
};

namespace detail {

inline void check_window(double t, double T) {
    if (!(t <= T)) throw DomainError("t", "must not exceed horizon_T");
}

// Survival weight sigma = 1 - Pi (partial) or 1{xi > t} (full). The
// non-degenerate branch uses expm1((delta_mu - lambda) theta)/(delta_mu -
// lambda), which is the kappa form rewritten so it stays accurate and tends
// to the degenerate branch as mu2 -> mu1 + lambda.
inline double survival_weighted(const ModelParams& p, double sigma, double theta) {
    if (p.degenerate()) return (1.0 + p.lambda * theta * sigma) * std::exp(-p.mu2 * theta);
    const double d = p.delta_mu - p.lambda;
    return std::exp(-p.mu2 * theta) * (1.0 + sigma * p.delta_mu * std::expm1(d * theta) / d);
}

inline double density_weighted(const ModelParams& p, double sigma, double u) {
    if (p.degenerate()) {
        return std::exp(-p.mu2 * u) * (p.mu2 * (1.0 + p.lambda * sigma * u) - p.lambda * sigma);
    }
    const double d = p.delta_mu - p.lambda;
    return std::exp(-p.mu2 * u) *
           (p.mu2 + sigma * p.delta_mu * (p.mu2 * std::expm1(d * u) / d - std::exp(d * u)));
}

}  // namespace detail

inline double survival_full(const ModelParams& p, const FullInfoState& s) {
    detail::check_window(s.t, s.horizon_T);
    if (s.defaulted) return 0.0;
    return detail::survival_weighted(p, s.pre_change ? 1.0 : 0.0, s.horizon_T - s.t);
}

// Affine in Pi: f(t, mu1, h)(1 - Pi) + f(t, mu2, h) Pi.
inline double survival_partial(const ModelParams& p, const PartialInfoState& s) {
    detail::check_window(s.t, s.horizon_T);
    if (!(s.pi >= 0.0 && s.pi <= 1.0)) throw DomainError("pi", "must lie in [0,1]");
    if (s.defaulted) return 0.0;
    return detail::survival_weighted(p, 1.0 - s.pi, s.horizon_T - s.t);
}

// Conditional density of the event time at s >= t, full information.
inline double density_full(const ModelParams& p, const FullInfoState& st, double s) {
    detail::check_window(st.t, st.horizon_T);
    if (s < st.t) throw DomainError("s", "must be >= t");
    if (st.defaulted) return 0.0;
    return detail::density_weighted(p, st.pre_change ? 1.0 : 0.0, s - st.t);
}

inline double density_partial(const ModelParams& p, const PartialInfoState& st, double s) {
    detail::check_window(st.t, st.horizon_T);
    if (!(st.pi >= 0.0 && st.pi <= 1.0)) throw DomainError("pi", "must lie in [0,1]");
    if (s < st.t) throw DomainError("s", "must be >= t");
    if (st.defaulted) return 0.0;
    return detail::density_weighted(p, 1.0 - st.pi, s - st.t);
}

// Closed-form survival map (t, regime, h) -> P(tau > T | ...), the function
// whose four nested ODEs the residual checks below differentiate.
inline std::function<double(double, bool, int)> closed_form_survival(const ModelParams& p, double T) {
    return [p, T](double t, bool post_change, int h) {
        FullInfoState s;
        s.t = t;
        s.horizon_T = T;
        s.defaulted = h != 0;
        s.pre_change = !post_change;
        return survival_full(p, s);
    };
}

// Max absolute residual of the four nested regime/indicator ODEs at the
// given interior times, with centered differences of step h_fd in t.
inline double ode_residual_max(const ModelParams& p, double T, std::span<const double> grid,
                               double h_fd, const std::function<double(double, bool, int)>& f) {
    double worst = 0.0;
    for (double t : grid) {
        const auto ddt = [&](bool post, int h) { return (f(t + h_fd, post, h) - f(t - h_fd, post, h)) / (2.0 * h_fd); };
        const double f_pre0 = f(t, false, 0);
        const double f_post0 = f(t, true, 0);
        const double f_pre1 = f(t, false, 1);
        const double f_post1 = f(t, true, 1);
        const double r_post1 = ddt(true, 1);
        const double r_pre1 = ddt(false, 1) + p.lambda * (f_post1 - f_pre1);
        const double r_post0 = ddt(true, 0) + p.mu2 * (f_post1 - f_post0);
        const double r_pre0 = ddt(false, 0) + p.lambda * (f_post0 - f_pre0) + p.mu1 * (f_pre1 - f_pre0);
        worst = std::max({worst, std::fabs(r_post1), std::fabs(r_pre1), std::fabs(r_post0), std::fabs(r_pre0)});
    }
    return worst;
}

// Centered second difference of the partial-information survival in Pi;
// identically zero up to rounding because the map is affine.
inline double pi_second_derivative_max(const ModelParams& p, double T, std::span<const double> t_grid,
                                       std::span<const double> pi_grid, double h_pi = 1e-2) {
    double worst = 0.0;
    for (double t : t_grid) {
        for (double x : pi_grid) {
            if (x - h_pi < 0.0 || x + h_pi > 1.0) continue;
            const auto g = [&](double xx) {
                return survival_partial(p, PartialInfoState{t, T, false, xx});
            };
            worst = std::max(worst, std::fabs((g(x + h_pi) - 2.0 * g(x) + g(x - h_pi)) / (h_pi * h_pi)));
        }
    }
    return worst;
}

// Residual of the (Pi, H)-generator applied to the affine survival map on a
// (t, Pi) lattice. The diffusion term carries x^2 (1-x)^2 and vanishes on
// affine functions, so the check reduces to drift + jump balance.
inline double pi_generator_residual_max(const ModelParams& p, double T, std::span<const double> t_grid,
                                        std::span<const double> pi_grid, double h_fd, double h_pi = 1e-3) {
    double worst = 0.0;
    const auto g = [&](double t, double x, int h) {
        if (h != 0) return 0.0;
        return survival_partial(p, PartialInfoState{t, T, false, x});
    };
    for (double t : t_grid) {
        for (double x : pi_grid) {
            if (x - h_pi < 0.0 || x + h_pi > 1.0) continue;
            for (int h = 0; h <= 1; ++h) {
                const double gt = (g(t + h_fd, x, h) - g(t - h_fd, x, h)) / (2.0 * h_fd);
                const double gx = (g(t, x + h_pi, h) - g(t, x - h_pi, h)) / (2.0 * h_pi);
                const double gxx = (g(t, x + h_pi, h) - 2.0 * g(t, x, h) + g(t, x - h_pi, h)) / (h_pi * h_pi);
                const double drift = (1.0 - x) * (p.lambda - p.delta_mu * x * (1.0 - h)) * gx;
                const double diff2 = 0.5 * std::pow(p.delta_mu / p.beta * x * (1.0 - x), 2) * gxx;
                const double jump = (h == 0)
                                        ? (p.mu1 + p.delta_mu * x) * (g(t, jump_map(p, x), h + 1) - g(t, x, h))
                                        : 0.0;
                worst = std::max(worst, std::fabs(gt + drift + diff2 + jump));
            }
        }
    }
    return worst;
}

// Combined verification residual: nested ODEs on the closed form plus the
// (Pi, H)-generator on the affine survival map.
inline double generator_residual(const ModelParams& p, double T, std::span<const double> grid,
                                 double h_fd = 0.0) {
    if (h_fd <= 0.0) h_fd = 1e-5 * std::max(1.0, T);
    const auto f = closed_form_survival(p, T);
    double worst = ode_residual_max(p, T, grid, h_fd, f);
    std::vector<double> pis = {0.1, 0.3, 0.5, 0.7, 0.9};
    worst = std::max(worst, pi_generator_residual_max(p, T, grid, pis, h_fd));
    return worst;
}

}  // namespace hazardcp

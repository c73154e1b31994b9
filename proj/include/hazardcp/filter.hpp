#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "hazardcp/errors.hpp"
#include "hazardcp/model.hpp"

namespace hazardcp {

// Boundary policy for the Euler schemes: the exact filter stays inside
// [0,1] but an explicit step can overshoot, so step outputs are clamped to
// [kClampEps, 1 - kClampEps]. pi0 = 1 is absorbing and bypasses the clamp.
inline constexpr double kClampEps = 1e-12;

enum class FilterScheme { direct_sde, odds_ratio };

struct FilterPath {
    std::vector<double> grid;
    std::vector<double> pi_g;      // change-point probability given observations + event status
    std::vector<double> pi_f;      // observation-only variant (empty unless computed)
    std::vector<double> mu_hat_g;  // mu1 + delta_mu * pi_g
    std::vector<double> mu_hat_f;
    FilterScheme scheme = FilterScheme::direct_sde;
    std::optional<std::size_t> jump_node;  // grid index of the event time, when on-grid
    std::optional<double> pi_pre_jump;     // filter value at the event node before the jump map
};

// Estimated hazard rate implied by a change-point probability.
inline double hazard_estimate(const ModelParams& p, double pi) {
    return p.mu1 + p.delta_mu * pi;
}

// Exact update of the filter across the event time:
// pi -> mu2 pi / (mu1 + delta_mu pi). Fixed points at 0 and 1; the
// denominator is a convex combination of mu1, mu2 > 0. The result is
// pinned to [0,1], which last-ulp rounding can otherwise breach.
inline double jump_map(const ModelParams& p, double pi_minus) {
    const double v = p.mu2 * pi_minus / (p.mu1 + p.delta_mu * pi_minus);
    return std::min(1.0, std::max(0.0, v));
}

namespace detail {

inline double clamp_unit(double x) {
    if (x < kClampEps) return kClampEps;
    if (x > 1.0 - kClampEps) return 1.0 - kClampEps;
    return x;
}

}  // namespace detail

// One explicit Euler step of the observation-driven filter equation.
// Pre-event the drift carries the extra -delta_mu pi (1-pi) dt term coming
// from "no event yet"; post-event (defaulted_at_start) that term is absent.
// If the event lands at the end of this step, the exact jump map is applied
// after the continuous update.
inline double step_filter_g(const ModelParams& p, double pi_prev, double dY, double dt,
                            bool default_in_step, bool defaulted_at_start = false) {
    if (!(dt > 0.0)) throw DomainError("dt", "must be positive");
    if (!(pi_prev >= 0.0 && pi_prev <= 1.0)) throw DomainError("pi_prev", "must lie in [0,1]");
    if (pi_prev >= 1.0) return 1.0;  // absorbing

    const double g = p.delta_mu / (p.beta * p.beta);
    const double pq = pi_prev * (1.0 - pi_prev);
    double pi = pi_prev + p.lambda * (1.0 - pi_prev) * dt + g * pq * (dY - p.delta_mu * pi_prev * dt);
    if (!defaulted_at_start) pi -= p.delta_mu * pq * dt;
    pi = detail::clamp_unit(pi);
    if (default_in_step) pi = jump_map(p, pi);
    return pi;
}

// Observation-only filter step: no event information, no jump.
inline double step_filter_f(const ModelParams& p, double pi_prev, double dY, double dt) {
    if (!(dt > 0.0)) throw DomainError("dt", "must be positive");
    if (!(pi_prev >= 0.0 && pi_prev <= 1.0)) throw DomainError("pi_prev", "must lie in [0,1]");
    if (pi_prev >= 1.0) return 1.0;
    const double g = p.delta_mu / (p.beta * p.beta);
    const double pq = pi_prev * (1.0 - pi_prev);
    return detail::clamp_unit(pi_prev + p.lambda * (1.0 - pi_prev) * dt +
                              g * pq * (dY - p.delta_mu * pi_prev * dt));
}

namespace detail {

inline std::optional<std::size_t> require_default_node(const ScenarioPath& s) {
    const auto node = default_node(s);
    if (!node.has_value() && !s.grid.empty() && s.tau > 0.0 && s.tau <= s.grid.back()) {
        throw GridError("default time lies in (0, horizon] but is not a grid node");
    }
    return node;
}

}  // namespace detail

// Integrates the filter along a simulated path with the direct Euler scheme,
// applying the exact jump at the event node.
inline FilterPath run_filter_g(const ModelParams& p, const ScenarioPath& s) {
    const auto dnode = detail::require_default_node(s);
    const std::size_t n = s.grid.size();
    FilterPath out;
    out.grid = s.grid;
    out.scheme = FilterScheme::direct_sde;
    out.pi_g.resize(n);
    out.mu_hat_g.resize(n);
    double pi = p.pi0;
    out.pi_g[0] = pi;
    out.mu_hat_g[0] = hazard_estimate(p, pi);
    out.jump_node = dnode;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double dt = s.grid[i + 1] - s.grid[i];
        const double dY = s.y_obs[i + 1] - s.y_obs[i];
        const bool default_here = dnode.has_value() && *dnode == i + 1;
        if (default_here) {
            const double pre = step_filter_g(p, pi, dY, dt, false, false);
            out.pi_pre_jump = pre;
            pi = jump_map(p, pre);
        } else {
            pi = step_filter_g(p, pi, dY, dt, false, s.h_ind[i] != 0);
        }
        out.pi_g[i + 1] = pi;
        out.mu_hat_g[i + 1] = hazard_estimate(p, pi);
    }
    return out;
}

// Integrates the same filter through its odds-ratio representation
// pi = phi / (1 + phi) with phi_t = e^{lambda t} Z_t (pi0/(1-pi0) +
// lambda int_0^t e^{-lambda s}/Z_s ds). Z is the explicit stochastic
// exponential of the observation martingale, accumulated in log space; the
// correction integral uses a left-endpoint Riemann sum. Serves as an
// independent oracle for the direct scheme.
inline FilterPath run_filter_odds(const ModelParams& p, const ScenarioPath& s) {
    if (p.pi0 >= 1.0) throw DomainError("pi0", "odds representation requires pi0 < 1");
    const auto dnode = detail::require_default_node(s);
    const std::size_t n = s.grid.size();
    FilterPath out;
    out.grid = s.grid;
    out.scheme = FilterScheme::odds_ratio;
    out.pi_g.resize(n);
    out.mu_hat_g.resize(n);

    const double c0 = p.pi0 / (1.0 - p.pi0);
    const double g = p.delta_mu / (p.beta * p.beta);
    const double half_sq = 0.5 * (p.delta_mu / p.beta) * (p.delta_mu / p.beta);
    const double log_jump = std::log(p.mu2 / p.mu1);

    double log_z = 0.0;
    double integral = 0.0;  // int_0^t e^{-lambda s} / Z_s ds
    out.pi_g[0] = p.pi0;
    out.mu_hat_g[0] = hazard_estimate(p, p.pi0);
    out.jump_node = dnode;
    const auto eval_pi = [&](double t, double lz, double lin) {
        if (lin <= 0.0) return 0.0;
        const double log_phi = p.lambda * t + lz + std::log(lin);
        return 1.0 / (1.0 + std::exp(-log_phi));
    };
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double dt = s.grid[i + 1] - s.grid[i];
        const double dY = s.y_obs[i + 1] - s.y_obs[i];
        integral += std::exp(-p.lambda * s.grid[i] - log_z) * dt;
        log_z += g * dY - half_sq * dt - (s.h_ind[i] ? 0.0 : p.delta_mu * dt);
        const double lin = c0 + p.lambda * integral;
        if (dnode.has_value() && *dnode == i + 1) {
            out.pi_pre_jump = eval_pi(s.grid[i + 1], log_z, lin);
            log_z += log_jump;
        }
        const double pi = eval_pi(s.grid[i + 1], log_z, lin);
        out.pi_g[i + 1] = pi;
        out.mu_hat_g[i + 1] = hazard_estimate(p, pi);
    }
    return out;
}

// Observation-only filter along the path; continuous across the event time.
inline FilterPath run_filter_f(const ModelParams& p, const ScenarioPath& s) {
    const std::size_t n = s.grid.size();
    FilterPath out;
    out.grid = s.grid;
    out.scheme = FilterScheme::direct_sde;
    out.pi_f.resize(n);
    out.mu_hat_f.resize(n);
    double pi = p.pi0;
    out.pi_f[0] = pi;
    out.mu_hat_f[0] = hazard_estimate(p, pi);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double dt = s.grid[i + 1] - s.grid[i];
        const double dY = s.y_obs[i + 1] - s.y_obs[i];
        pi = step_filter_f(p, pi, dY, dt);
        out.pi_f[i + 1] = pi;
        out.mu_hat_f[i + 1] = hazard_estimate(p, pi);
    }
    return out;
}

}  // namespace hazardcp

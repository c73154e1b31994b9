#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "hazardcp/errors.hpp"
#include "hazardcp/rng.hpp"

namespace hazardcp {

// Hazard regime model: the hazard rate sits at mu1 until an unobservable
// change point xi (atom pi0 at zero, exponential(lambda) tail) and at mu2
// afterwards. The event time tau is doubly stochastic: first crossing of the
// cumulative hazard over an independent unit-exponential level.
struct ModelParams {
    double pi0 = 0.0;
    double lambda = 0.0;
    double mu1 = 0.0;
    double mu2 = 0.0;
    double beta = 0.0;
    double delta_mu = 0.0;              // mu2 - mu1, as stored
    std::optional<double> kappa;        // delta_mu / (delta_mu - lambda); absent near the degenerate line
    double degeneracy_tol = 1e-9;

    // degenerate case: mu2 == mu1 + lambda within tolerance
    bool degenerate() const { return !kappa.has_value(); }
};

inline ModelParams new_params(double pi0, double lambda, double mu1, double mu2, double beta,
                              double degeneracy_tol = 1e-9) {
    if (!(pi0 >= 0.0 && pi0 <= 1.0)) throw DomainError("pi0", "must lie in [0,1]");
    if (!(lambda > 0.0)) throw DomainError("lambda", "must be positive");
    if (!(mu1 > 0.0)) throw DomainError("mu1", "must be positive");
    if (!(mu2 > 0.0)) throw DomainError("mu2", "must be positive");
    if (!(beta > 0.0)) throw DomainError("beta", "must be positive");
    if (!(degeneracy_tol >= 0.0)) throw DomainError("degeneracy_tol", "must be nonnegative");

    ModelParams p;
    p.pi0 = pi0;
    p.lambda = lambda;
    p.mu1 = mu1;
    p.mu2 = mu2;
    p.beta = beta;
    p.delta_mu = mu2 - mu1;
    p.degeneracy_tol = degeneracy_tol;
    if (std::fabs(p.delta_mu - lambda) > degeneracy_tol * std::max(1.0, lambda)) {
        p.kappa = p.delta_mu / (p.delta_mu - lambda);
    }
    return p;
}

// P(xi = 0) = pi0, P(xi > t | xi > 0) = exp(-lambda t).
inline double sample_change_point(const ModelParams& p, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    if (u < p.pi0) return 0.0;
    std::exponential_distribution<double> expo(p.lambda);
    return expo(rng);
}

// Lambda_t = integral of the hazard path: mu1 before xi, mu2 after.
inline double cumulative_hazard(const ModelParams& p, double xi, double t) {
    if (t < 0.0) throw DomainError("t", "must be nonnegative");
    if (xi < 0.0) throw DomainError("xi", "must be nonnegative");
    if (t < xi) return p.mu1 * t;
    return p.mu1 * xi + p.mu2 * (t - xi);
}

// Exact inversion of the piecewise-linear cumulative hazard at level theta.
inline double sample_default_time(const ModelParams& p, double xi, double theta) {
    if (!(theta > 0.0)) throw DomainError("theta", "must be positive");
    if (xi < 0.0) throw DomainError("xi", "must be nonnegative");
    const double pre = p.mu1 * xi;
    if (theta <= pre) return theta / p.mu1;
    return xi + (theta - pre) / p.mu2;
}

// One simulated world on a uniform grid with event times inserted exactly.
struct ScenarioPath {
    std::vector<double> grid;      // t_0 = 0 < ... < t_N = horizon
    double xi = 0.0;               // change point (exact, not grid-snapped)
    double theta = 0.0;            // unit-exponential crossing level
    double tau = 0.0;              // event time (may exceed the horizon)
    std::vector<double> brownian;  // B_{t_i}
    std::vector<double> y_obs;     // Y_{t_i}, drift-removed observation
    std::vector<std::uint8_t> h_ind;  // H_{t_i} = 1{tau <= t_i}
    std::vector<double> mu_path;   // mu_{t_i}
    std::uint64_t seed = 0;        // seed provenance (0 when driven by an external engine)

    std::size_t size() const { return grid.size(); }
};

namespace detail {

inline double grid_merge_tol(double horizon) { return 1e-12 * std::max(1.0, horizon); }

}  // namespace detail

// Uniform step-dt grid over [0, horizon] with each event time in
// (0, horizon) inserted as an extra node (deduplicated within a tiny
// tolerance so no zero-length steps appear).
inline std::vector<double> build_grid(double horizon, double dt, std::span<const double> events = {}) {
    if (!(horizon > 0.0)) throw DomainError("horizon", "must be positive");
    if (!(dt > 0.0 && dt <= horizon)) throw DomainError("dt", "must satisfy 0 < dt <= horizon");
    const double tol = detail::grid_merge_tol(horizon);
    std::vector<double> grid;
    const auto n_steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    grid.reserve(n_steps + 1 + events.size());
    for (std::size_t i = 0; i < n_steps; ++i) grid.push_back(static_cast<double>(i) * dt);
    grid.push_back(horizon);
    for (double e : events) {
        if (e > tol && e < horizon - tol) grid.push_back(e);
    }
    std::sort(grid.begin(), grid.end());
    std::vector<double> out;
    out.reserve(grid.size());
    for (double t : grid) {
        if (out.empty() || t - out.back() > tol) out.push_back(t);
    }
    out.back() = horizon;
    return out;
}

// Fills a scenario for a known (xi, theta) pair; the engine only supplies
// Brownian increments. Increments never straddle xi because xi is a node,
// so each observation drift is piecewise exact.
inline ScenarioPath simulate_scenario_given(const ModelParams& p, double horizon, double dt,
                                            double xi, double theta, Rng& rng,
                                            std::span<const double> extra_times = {}) {
    ScenarioPath s;
    s.xi = xi;
    s.theta = theta;
    s.tau = sample_default_time(p, xi, theta);

    std::vector<double> events;
    events.reserve(2 + extra_times.size());
    events.push_back(xi);
    events.push_back(s.tau);
    events.insert(events.end(), extra_times.begin(), extra_times.end());
    s.grid = build_grid(horizon, dt, events);

    const std::size_t n = s.grid.size();
    s.brownian.resize(n);
    s.y_obs.resize(n);
    s.h_ind.resize(n);
    s.mu_path.resize(n);

    std::normal_distribution<double> gauss(0.0, 1.0);
    const double tol = detail::grid_merge_tol(horizon);
    s.brownian[0] = 0.0;
    s.y_obs[0] = 0.0;
    s.h_ind[0] = s.tau <= 0.0 ? 1 : 0;
    s.mu_path[0] = xi <= 0.0 ? p.mu2 : p.mu1;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double t0 = s.grid[i];
        const double t1 = s.grid[i + 1];
        const double step = t1 - t0;
        const double db = std::sqrt(step) * gauss(rng);
        const double drift = (t0 >= xi - tol) ? p.delta_mu * step : 0.0;
        s.brownian[i + 1] = s.brownian[i] + db;
        s.y_obs[i + 1] = s.y_obs[i] + drift + p.beta * db;
        s.h_ind[i + 1] = (s.tau <= t1 + tol) ? 1 : 0;
        s.mu_path[i + 1] = (t1 >= xi - tol) ? p.mu2 : p.mu1;
    }
    return s;
}

inline ScenarioPath simulate_scenario(const ModelParams& p, double horizon, double dt, Rng& rng,
                                      std::span<const double> extra_times = {}) {
    if (!(horizon > 0.0)) throw DomainError("horizon", "must be positive");
    if (!(dt > 0.0 && dt <= horizon)) throw DomainError("dt", "must satisfy 0 < dt <= horizon");
    const double xi = sample_change_point(p, rng);
    std::exponential_distribution<double> expo(1.0);
    const double theta = expo(rng);
    return simulate_scenario_given(p, horizon, dt, xi, theta, rng, extra_times);
}

// A scenario is a pure function of (params, horizon, dt, seed).
inline ScenarioPath simulate_scenario_seeded(const ModelParams& p, double horizon, double dt,
                                             std::uint64_t seed,
                                             std::span<const double> extra_times = {}) {
    Rng rng = make_rng(seed);
    ScenarioPath s = simulate_scenario(p, horizon, dt, rng, extra_times);
    s.seed = seed;
    return s;
}

// Index of the grid node equal to tau, or nullopt when tau is outside the grid.
inline std::optional<std::size_t> default_node(const ScenarioPath& s) {
    if (s.grid.empty() || s.tau > s.grid.back() + detail::grid_merge_tol(s.grid.back())) return std::nullopt;
    const double tol = detail::grid_merge_tol(s.grid.back());
    auto it = std::lower_bound(s.grid.begin(), s.grid.end(), s.tau - tol);
    if (it == s.grid.end() || std::fabs(*it - s.tau) > tol) return std::nullopt;
    return static_cast<std::size_t>(it - s.grid.begin());
}

}  // namespace hazardcp

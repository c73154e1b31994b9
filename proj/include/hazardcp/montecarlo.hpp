#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "hazardcp/analytics.hpp"
#include "hazardcp/errors.hpp"
#include "hazardcp/filter.hpp"
#include "hazardcp/model.hpp"
#include "hazardcp/pricing.hpp"
#include "hazardcp/quadrature.hpp"
#include "hazardcp/rng.hpp"
#include "hazardcp/stats.hpp"

namespace hazardcp {

struct McReport {
    std::string label;
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
};

// Worker count: explicit argument wins, then HAZARDCP_THREADS, then the
// hardware count. Results never depend on it: every path derives its own
// sub-seed and writes its own slot, and reductions run in index order.
inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("HAZARDCP_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

template <typename Fn>
void parallel_for_indexed(std::size_t n, unsigned threads, Fn&& fn) {
    threads = resolve_threads(threads);
    if (threads <= 1 || n < 2 * threads) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

namespace detail {

inline McReport report_from(std::string label, std::span<const double> samples, std::uint64_t seed) {
    const MeanSe m = mean_and_se(samples);
    return {std::move(label), m.mean, m.std_error, m.n, seed};
}

// Grid index of an evaluation time that was inserted as an extra node.
inline std::size_t node_index(const ScenarioPath& s, double t) {
    const double tol = std::max(1e-12, 1e-9 * std::max(1.0, s.grid.back()));
    auto it = std::lower_bound(s.grid.begin(), s.grid.end(), t - tol);
    if (it == s.grid.end() || std::fabs(*it - t) > tol)
        throw GridError("evaluation time is not a grid node");
    return static_cast<std::size_t>(it - s.grid.begin());
}

}  // namespace detail

// Event-time survival frequency from (xi, Theta) draws alone; no path
// discretization enters, so this is an exact-law oracle for the closed
// forms.
inline McReport mc_unconditional_survival(const ModelParams& p, double T, std::size_t n,
                                          std::uint64_t seed, unsigned threads = 0) {
    if (T < 0.0) throw DomainError("T", "must be nonnegative");
    std::vector<double> hit(n);
    parallel_for_indexed(n, threads, [&](std::size_t k) {
        Rng rng = make_rng(sub_seed(seed, k));
        const double xi = sample_change_point(p, rng);
        std::exponential_distribution<double> expo(1.0);
        const double tau = sample_default_time(p, xi, expo(rng));
        hit[k] = tau > T ? 1.0 : 0.0;
    });
    return detail::report_from("mc_unconditional_survival", hit, seed);
}

// Mean of the partial-information survival evaluated on filtered paths at
// several times; each mean must reproduce the time-0 survival value.
inline std::vector<McReport> mc_tower_multi(const ModelParams& p, std::span<const double> ts, double T,
                                            std::size_t n, double dt, std::uint64_t seed,
                                            unsigned threads = 0) {
    if (ts.empty()) throw DomainError("t", "need at least one evaluation time");
    for (double t : ts) {
        if (!(t > 0.0 && t < T)) throw DomainError("t", "must satisfy 0 < t < T");
    }
    const double horizon = *std::max_element(ts.begin(), ts.end());
    std::vector<std::vector<double>> vals(ts.size(), std::vector<double>(n));
    std::vector<double> times(ts.begin(), ts.end());
    parallel_for_indexed(n, threads, [&](std::size_t k) {
        const ScenarioPath s = simulate_scenario_seeded(p, horizon, dt, sub_seed(seed, k), times);
        const FilterPath f = run_filter_g(p, s);
        for (std::size_t j = 0; j < times.size(); ++j) {
            const std::size_t i = detail::node_index(s, times[j]);
            PartialInfoState st{times[j], T, s.h_ind[i] != 0, f.pi_g[i]};
            vals[j][k] = survival_partial(p, st);
        }
    });
    std::vector<McReport> out;
    out.reserve(ts.size());
    for (std::size_t j = 0; j < times.size(); ++j) {
        McReport r = detail::report_from("mc_tower_check", vals[j], seed);
        r.label += "@t=" + std::to_string(times[j]);
        out.push_back(std::move(r));
    }
    return out;
}

inline McReport mc_tower_check(const ModelParams& p, double t, double T, std::size_t n, double dt,
                               std::uint64_t seed, unsigned threads = 0) {
    const double ts[] = {t};
    return mc_tower_multi(p, ts, T, n, dt, seed, threads).front();
}

// Mean filter value at several times; unbiasedness pins it to the prior
// change-point law pi0 + (1 - pi0)(1 - e^{-lambda t}).
inline std::vector<McReport> mc_mean_filter(const ModelParams& p, std::span<const double> ts,
                                            std::size_t n, double dt, std::uint64_t seed,
                                            unsigned threads = 0) {
    if (ts.empty()) throw DomainError("t", "need at least one evaluation time");
    const double horizon = *std::max_element(ts.begin(), ts.end());
    std::vector<std::vector<double>> vals(ts.size(), std::vector<double>(n));
    std::vector<double> times(ts.begin(), ts.end());
    parallel_for_indexed(n, threads, [&](std::size_t k) {
        const ScenarioPath s = simulate_scenario_seeded(p, horizon, dt, sub_seed(seed, k), times);
        const FilterPath f = run_filter_g(p, s);
        for (std::size_t j = 0; j < times.size(); ++j) vals[j][k] = f.pi_g[detail::node_index(s, times[j])];
    });
    std::vector<McReport> out;
    out.reserve(ts.size());
    for (std::size_t j = 0; j < times.size(); ++j) {
        McReport r = detail::report_from("mc_mean_filter", vals[j], seed);
        r.label += "@t=" + std::to_string(times[j]);
        out.push_back(std::move(r));
    }
    return out;
}

struct MseComparePoint {
    double t = 0.0;
    double mse_g = 0.0;   // event-aware estimate
    double mse_f = 0.0;   // observation-only estimate
    double se_diff = 0.0; // paired standard error of mse_g - mse_f
    std::size_t n = 0;
};

// Pathwise squared estimation errors of the two hazard estimates against
// the simulated hazard, paired per path.
inline std::vector<MseComparePoint> mc_mse_compare(const ModelParams& p, std::span<const double> ts,
                                                   std::size_t n, double dt, std::uint64_t seed,
                                                   unsigned threads = 0) {
    if (ts.empty()) throw DomainError("times", "need at least one evaluation time");
    if (n < 2) throw DomainError("n", "need at least 2 paths");
    const double horizon = *std::max_element(ts.begin(), ts.end());
    std::vector<double> times(ts.begin(), ts.end());
    std::vector<std::vector<double>> sq_g(times.size(), std::vector<double>(n));
    std::vector<std::vector<double>> sq_f(times.size(), std::vector<double>(n));
    parallel_for_indexed(n, threads, [&](std::size_t k) {
        const ScenarioPath s = simulate_scenario_seeded(p, horizon, dt, sub_seed(seed, k), times);
        const FilterPath g = run_filter_g(p, s);
        const FilterPath f = run_filter_f(p, s);
        for (std::size_t j = 0; j < times.size(); ++j) {
            const std::size_t i = detail::node_index(s, times[j]);
            const double mu_true = s.mu_path[i];
            sq_g[j][k] = (g.mu_hat_g[i] - mu_true) * (g.mu_hat_g[i] - mu_true);
            sq_f[j][k] = (f.mu_hat_f[i] - mu_true) * (f.mu_hat_f[i] - mu_true);
        }
    });
    std::vector<MseComparePoint> out;
    out.reserve(times.size());
    for (std::size_t j = 0; j < times.size(); ++j) {
        std::vector<double> diff(n);
        for (std::size_t k = 0; k < n; ++k) diff[k] = sq_g[j][k] - sq_f[j][k];
        const MeanSe mg = mean_and_se(sq_g[j]);
        const MeanSe mf = mean_and_se(sq_f[j]);
        const MeanSe md = mean_and_se(diff);
        out.push_back({times[j], mg.mean, mf.mean, md.std_error, n});
    }
    return out;
}

// Time-0 Monte Carlo value of a contract from exact event times: face on
// survival, discounted premium to tau ^ T, recovery at tau. No path
// discretization enters the payoff.
inline McReport mc_price_check(const ModelParams& p, const ContractSpec& c, std::size_t n,
                               std::uint64_t seed, unsigned threads = 0) {
    std::vector<double> payoff(n);
    const double T = c.maturity_T;
    parallel_for_indexed(n, threads, [&](std::size_t k) {
        Rng rng = make_rng(sub_seed(seed, k));
        const double xi = sample_change_point(p, rng);
        std::exponential_distribution<double> expo(1.0);
        const double tau = sample_default_time(p, xi, expo(rng));
        double v = 0.0;
        if (tau > T) v += c.face_L * c.discount_rate.discount(0.0, T);
        const double stop = std::min(tau, T);
        if (c.premium_rate && stop > 0.0) {
            v += adaptive_simpson(
                [&](double s) { return c.discount_rate.discount(0.0, s) * c.premium_rate(s); }, 0.0,
                stop, 1e-9, kPriceQuadDepth);
        }
        if (c.recovery && tau <= T) v += c.discount_rate.discount(0.0, tau) * c.recovery(tau);
        payoff[k] = v;
    });
    return detail::report_from("mc_price_check", payoff, seed);
}

struct SensitivityResult {
    double beta = 0.0;
    double mu2 = 0.0;
    std::vector<double> times;            // evaluation times as multiples of xi
    std::vector<double> fractions_below;  // per multiple: fraction with Pi < thresholds.first
    std::vector<double> fractions_above;  // per multiple: fraction with Pi > thresholds.second
    std::size_t n_paths = 0;              // paths entering the fractions
    std::size_t n_skipped = 0;            // paths whose largest evaluation time exceeds the horizon
};

// Threshold-crossing study across parameter variants under common random
// numbers: every variant reuses the same per-path sub-seed, hence the same
// (xi, Theta) draw and Gaussian stream. Evaluation times are per-path
// multiples of xi inserted into the grid.
inline std::vector<SensitivityResult> sensitivity_study(std::span<const ModelParams> variants,
                                                        std::pair<double, double> thresholds,
                                                        std::span<const double> xi_multiples,
                                                        std::size_t n, double dt, double horizon,
                                                        std::uint64_t seed, unsigned threads = 0) {
    if (variants.empty()) throw DomainError("params_variants", "need at least one variant");
    if (xi_multiples.empty()) throw DomainError("eval_rule", "need at least one multiple of xi");
    for (std::size_t v = 1; v < variants.size(); ++v) {
        if (variants[v].pi0 != variants[0].pi0 || variants[v].lambda != variants[0].lambda)
            throw DomainError("params_variants", "common random numbers require shared pi0 and lambda");
    }
    const std::size_t m = xi_multiples.size();
    std::vector<SensitivityResult> out(variants.size());
    for (std::size_t v = 0; v < variants.size(); ++v) {
        out[v].beta = variants[v].beta;
        out[v].mu2 = variants[v].mu2;
        out[v].times.assign(xi_multiples.begin(), xi_multiples.end());
        out[v].fractions_below.assign(m, 0.0);
        out[v].fractions_above.assign(m, 0.0);
    }
    // -1 marks a skipped path
    std::vector<std::vector<std::vector<double>>> pi_at(
        variants.size(), std::vector<std::vector<double>>(m, std::vector<double>(n, -1.0)));
    parallel_for_indexed(n, threads, [&](std::size_t k) {
        const std::uint64_t sk = sub_seed(seed, k);
        for (std::size_t v = 0; v < variants.size(); ++v) {
            Rng rng = make_rng(sk);
            const double xi = sample_change_point(variants[v], rng);
            std::exponential_distribution<double> expo(1.0);
            const double theta = expo(rng);
            if (xi <= 0.0 && variants[v].pi0 > 0.0) break;  // protocol presumes xi > 0
            std::vector<double> evals(m);
            bool ok = true;
            for (std::size_t j = 0; j < m; ++j) {
                evals[j] = xi_multiples[j] * xi;
                if (evals[j] <= 0.0 || evals[j] >= horizon) ok = false;
            }
            if (!ok) break;  // same xi across variants, so the skip is shared
            const ScenarioPath s =
                simulate_scenario_given(variants[v], horizon, dt, xi, theta, rng, evals);
            const FilterPath f = run_filter_g(variants[v], s);
            for (std::size_t j = 0; j < m; ++j) pi_at[v][j][k] = f.pi_g[detail::node_index(s, evals[j])];
        }
    });
    for (std::size_t v = 0; v < variants.size(); ++v) {
        std::size_t kept = 0;
        std::size_t skipped = 0;
        std::vector<std::size_t> below(m, 0), above(m, 0);
        for (std::size_t k = 0; k < n; ++k) {
            if (pi_at[v][0][k] < 0.0) {
                ++skipped;
                continue;
            }
            ++kept;
            for (std::size_t j = 0; j < m; ++j) {
                if (pi_at[v][j][k] < thresholds.first) ++below[j];
                if (pi_at[v][j][k] > thresholds.second) ++above[j];
            }
        }
        out[v].n_paths = kept;
        out[v].n_skipped = skipped;
        for (std::size_t j = 0; j < m; ++j) {
            out[v].fractions_below[j] = kept ? static_cast<double>(below[j]) / static_cast<double>(kept) : 0.0;
            out[v].fractions_above[j] = kept ? static_cast<double>(above[j]) / static_cast<double>(kept) : 0.0;
        }
    }
    return out;
}

// Least-squares slope of the tower estimate against dt; |slope| * dt is the
// discretization-bias budget added to the statistical tolerance wherever an
// Euler-integrated filter enters an acceptance comparison.
inline double calibrate_dt_bias(const ModelParams& p, double t, double T, std::span<const double> dts,
                                std::size_t n, std::uint64_t seed, unsigned threads = 0) {
    if (dts.size() < 2) throw DomainError("dts", "need at least two step sizes");
    std::vector<double> est(dts.size());
    for (std::size_t i = 0; i < dts.size(); ++i) {
        est[i] = mc_tower_check(p, t, T, n, dts[i], seed, threads).estimate;
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < dts.size(); ++i) {
        mx += dts[i];
        my += est[i];
    }
    mx /= static_cast<double>(dts.size());
    my /= static_cast<double>(dts.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < dts.size(); ++i) {
        sxy += (dts[i] - mx) * (est[i] - my);
        sxx += (dts[i] - mx) * (dts[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace hazardcp

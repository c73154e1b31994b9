#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include "hazardcp/analytics.hpp"
#include "hazardcp/errors.hpp"
#include "hazardcp/model.hpp"
#include "hazardcp/quadrature.hpp"

namespace hazardcp {

inline constexpr double kPriceQuadTol = 1e-10;
inline constexpr int kPriceQuadDepth = 40;

// Deterministic short-rate curve. The constant case keeps a closed-form
// discount so headline prices carry no quadrature error.
class RateCurve {
public:
    static RateCurve constant(double r) {
        if (!(r > 0.0)) throw DomainError("r", "must be positive");
        RateCurve c;
        c.constant_ = true;
        c.r0_ = r;
        c.fn_ = [r](double) { return r; };
        return c;
    }
    static RateCurve from_function(std::function<double(double)> r) {
        RateCurve c;
        c.fn_ = std::move(r);
        return c;
    }

    double rate(double t) const {
        const double r = fn_(t);
        if (!(r > 0.0)) throw DomainError("discount_rate", "must be positive on [0,T]");
        return r;
    }
    double integral(double a, double b) const {
        if (constant_) return r0_ * (b - a);
        if (a == b) return 0.0;
        return adaptive_simpson([this](double u) { return rate(u); }, a, b, 1e-12, kPriceQuadDepth);
    }
    double discount(double a, double b) const { return std::exp(-integral(a, b)); }
    bool is_constant() const { return constant_; }
    double constant_rate() const { return r0_; }

private:
    bool constant_ = false;
    double r0_ = 0.0;
    std::function<double(double)> fn_;
};

enum class ContractKind { coupon_bond, cds, zcb };

// Payoff description: face paid at maturity on survival, continuous premium
// until the event or maturity, recovery paid at the event.
struct ContractSpec {
    ContractKind kind = ContractKind::zcb;
    double maturity_T = 0.0;
    double face_L = 0.0;
    std::function<double(double)> premium_rate;  // p(s), may be null for no premium
    std::function<double(double)> recovery;      // W(s), may be null for no recovery
    RateCurve discount_rate = RateCurve::constant(1.0);
    double delta = 0.0;  // recovery fraction, zcb only

    static ContractSpec zcb(double T, RateCurve rate, double delta) {
        if (!(T > 0.0)) throw DomainError("maturity_T", "must be positive");
        if (!(delta >= 0.0 && delta <= 1.0)) throw DomainError("delta", "must lie in [0,1]");
        ContractSpec c;
        c.kind = ContractKind::zcb;
        c.maturity_T = T;
        c.face_L = 1.0;
        c.recovery = [delta](double) { return delta; };
        c.discount_rate = std::move(rate);
        c.delta = delta;
        return c;
    }
    static ContractSpec cds(double T, RateCurve rate, std::function<double(double)> premium,
                            std::function<double(double)> protection) {
        if (!(T > 0.0)) throw DomainError("maturity_T", "must be positive");
        ContractSpec c;
        c.kind = ContractKind::cds;
        c.maturity_T = T;
        c.face_L = 0.0;
        c.premium_rate = std::move(premium);
        c.recovery = std::move(protection);
        c.discount_rate = std::move(rate);
        return c;
    }
    static ContractSpec coupon_bond(double T, RateCurve rate, double face,
                                    std::function<double(double)> premium,
                                    std::function<double(double)> recovery) {
        if (!(T > 0.0)) throw DomainError("maturity_T", "must be positive");
        if (!(face >= 0.0)) throw DomainError("face_L", "must be nonnegative");
        ContractSpec c;
        c.kind = ContractKind::coupon_bond;
        c.maturity_T = T;
        c.face_L = face;
        c.premium_rate = std::move(premium);
        c.recovery = std::move(recovery);
        c.discount_rate = std::move(rate);
        return c;
    }
};

namespace detail {

inline double recovery_at(const ContractSpec& c, double s) {
    if (!c.recovery) return 0.0;
    const double w = c.recovery(s);
    if (w < 0.0) throw DomainError("recovery", "must be nonnegative");
    if (c.kind == ContractKind::coupon_bond && w > c.face_L)
        throw DomainError("recovery", "must not exceed face_L");
    return w;
}

}  // namespace detail

// Discounted survival-weighted premium leg: int_t^T S(s) disc(t,s) p(s) ds.
inline double premium_leg(const ModelParams& p, const ContractSpec& c, const PartialInfoState& st) {
    if (!c.premium_rate || st.defaulted) return 0.0;
    const auto f = [&](double s) {
        PartialInfoState q = st;
        q.horizon_T = s;
        return survival_partial(p, q) * c.discount_rate.discount(st.t, s) * c.premium_rate(s);
    };
    return adaptive_simpson(f, st.t, c.maturity_T, kPriceQuadTol, kPriceQuadDepth);
}

// Discounted recovery leg: int_t^T disc(t,s) W(s) density(s) ds.
inline double protection_leg(const ModelParams& p, const ContractSpec& c, const PartialInfoState& st) {
    if (!c.recovery || st.defaulted) return 0.0;
    const auto f = [&](double s) {
        return c.discount_rate.discount(st.t, s) * detail::recovery_at(c, s) * density_partial(p, st, s);
    };
    return adaptive_simpson(f, st.t, c.maturity_T, kPriceQuadTol, kPriceQuadDepth);
}

// General credit-sensitive price: discounted face + premium leg + recovery
// leg. Everything carries the survival indicator, so a defaulted state
// prices to zero.
inline double price_general(const ModelParams& p, const ContractSpec& c, const PartialInfoState& st) {
    if (!(st.t <= c.maturity_T)) throw DomainError("t", "must not exceed maturity_T");
    if (st.defaulted) return 0.0;
    PartialInfoState at_T = st;
    at_T.horizon_T = c.maturity_T;
    const double face = c.face_L * c.discount_rate.discount(st.t, c.maturity_T) * survival_partial(p, at_T);
    return face + premium_leg(p, c, st) + protection_leg(p, c, st);
}

// Swap value to the protection buyer: protection leg minus premium leg.
inline double price_cds(const ModelParams& p, const ContractSpec& c, const PartialInfoState& st) {
    if (c.kind != ContractKind::cds) throw DomainError("kind", "price_cds requires a cds contract");
    if (!(st.t <= c.maturity_T)) throw DomainError("t", "must not exceed maturity_T");
    if (st.defaulted) return 0.0;
    return protection_leg(p, c, st) - premium_leg(p, c, st);
}

namespace detail {

// Closed-form price of a unit-face zero-coupon instrument with constant
// recovery fraction delta; sigma is 1 - Pi (partial) or 1{xi > t} (full).
inline double dzcb_weighted(const ModelParams& p, double r, double delta, double sigma, double theta) {
    if (p.degenerate()) {
        const double a = r + p.mu2;
        const double e = std::exp(-a * theta);
        return (1.0 + p.lambda * theta * sigma * (1.0 - delta * p.mu2 / a)) * e +
               delta / a * (p.mu2 - p.lambda * sigma * (1.0 - p.mu2 / a)) * (1.0 - e);
    }
    const double kappa = *p.kappa;
    const auto leg = [&](double m) {
        const double a = r + m;
        const double e = std::exp(-a * theta);
        return e + delta * m / a * (1.0 - e);
    };
    const double g2 = leg(p.mu2);
    return g2 + kappa * sigma * (leg(p.mu1 + p.lambda) - g2);
}

inline void check_dzcb_args(double r, double delta, double t, double T) {
    if (!(r > 0.0)) throw DomainError("r", "must be positive");
    if (!(delta >= 0.0 && delta <= 1.0)) throw DomainError("delta", "must lie in [0,1]");
    if (!(t <= T)) throw DomainError("t", "must not exceed horizon_T");
}

}  // namespace detail

inline double price_dzcb_partial(const ModelParams& p, double r, double delta, const PartialInfoState& st) {
    detail::check_dzcb_args(r, delta, st.t, st.horizon_T);
    if (!(st.pi >= 0.0 && st.pi <= 1.0)) throw DomainError("pi", "must lie in [0,1]");
    if (st.defaulted) return 0.0;
    return detail::dzcb_weighted(p, r, delta, 1.0 - st.pi, st.horizon_T - st.t);
}

inline double price_dzcb_full(const ModelParams& p, double r, double delta, const FullInfoState& st) {
    detail::check_dzcb_args(r, delta, st.t, st.horizon_T);
    if (st.defaulted) return 0.0;
    return detail::dzcb_weighted(p, r, delta, st.pre_change ? 1.0 : 0.0, st.horizon_T - st.t);
}

// Caller-supplied conditional expectations of an independent market factor.
struct MarketFactorHooks {
    std::function<double(double)> expect_psi_at;  // s -> E[psi(X_s) | market info at t]
    double expect_phi_T = 0.0;                    // E[phi(X_T) | market info at t]
};

// Price of a claim paying psi(X_tau) at the event (if before T) and
// phi(X_T) at T otherwise, with X independent of the event risk:
// int disc * E[psi] * density + disc(T) * E[phi] * survival.
inline double price_with_market_factor(const ModelParams& p, const MarketFactorHooks& hooks,
                                       const RateCurve& rate, const PartialInfoState& st, double T) {
    if (!(st.t <= T)) throw DomainError("t", "must not exceed T");
    if (!hooks.expect_psi_at) throw DomainError("expect_psi_at", "hook must be set");
    if (st.defaulted) return 0.0;
    PartialInfoState q = st;
    q.horizon_T = T;
    const auto f = [&](double s) {
        return rate.discount(st.t, s) * hooks.expect_psi_at(s) * density_partial(p, q, s);
    };
    const double event_leg = adaptive_simpson(f, st.t, T, kPriceQuadTol, kPriceQuadDepth);
    return event_leg + rate.discount(st.t, T) * hooks.expect_phi_T * survival_partial(p, q);
}

}  // namespace hazardcp

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"

namespace adisweep {

// Gradients reject |q| >= 1 - epsilon_domain. The studied dynamics never
// reaches |q| = 1, so this is a guard, not a clamp.
inline constexpr double epsilon_domain = 1e-12;
// |det| below this counts as "exactly at a bifurcation" for classification.
inline constexpr double epsilon_marginal = 1e-10;

struct ModelParams {
    double c;      // self-interaction strength
    double delta;  // imaginary coupling

    void validate() const {
        if (!(c > 0.0) || !(delta > 0.0))
            throw validation_error("model parameters must satisfy c > 0 and delta > 0");
        if (!(c > delta))
            throw validation_error("no bifurcation regime: requires c > delta");
    }
};

// Canonical pair. p is reported wrapped to (-pi, pi]; H itself is 2*pi
// periodic in p so wrapping never changes energies.
struct PhaseState {
    double q;
    double p;

    static PhaseState canonical(double q, double p) { return {q, wrap_angle(p)}; }
};

enum class Stability { StableCenter, UnstableSaddle };

inline const char* to_string(Stability s) {
    return s == Stability::StableCenter ? "StableCenter" : "UnstableSaddle";
}

struct FixedPoint {
    double q_bar;
    double p_bar;
    Stability stability;
};

struct Gradient {
    double dq;  // dH/dq
    double dp;  // dH/dp
};

struct Hessian {
    double qq;
    double qp;
    double pp;
};

namespace detail {

inline void require_q_closed(double q) {
    if (!(std::abs(q) <= 1.0))
        throw state_domain_error("|q| > 1 outside the model domain");
}

inline void require_q_open(double q) {
    if (!(std::abs(q) < 1.0 - epsilon_domain))
        throw state_domain_error("|q| too close to 1; derivatives are singular there");
}

} // namespace detail

// Trig arguments are wrapped first, so storing p wrapped or unwrapped yields
// bit-identical energies and derivatives.
inline double hamiltonian_value(const PhaseState& s, double R, const ModelParams& m) {
    detail::require_q_closed(s.q);
    double pw = wrap_angle(s.p);
    double root = std::sqrt(1.0 - s.q * s.q);
    double sp, cp;
    sin_cos(pw, sp, cp);
    return -0.5 * m.c * s.q * s.q - R * root * cp + m.delta * root * sp;
}

inline Gradient gradient(const PhaseState& s, double R, const ModelParams& m) {
    detail::require_q_open(s.q);
    double pw = wrap_angle(s.p);
    double root = std::sqrt(1.0 - s.q * s.q);
    double sp, cp;
    sin_cos(pw, sp, cp);
    return {-m.c * s.q + (s.q / root) * (R * cp - m.delta * sp),
            root * (R * sp + m.delta * cp)};
}

inline Hessian hessian(const PhaseState& s, double R, const ModelParams& m) {
    detail::require_q_open(s.q);
    double pw = wrap_angle(s.p);
    double root = std::sqrt(1.0 - s.q * s.q);
    double sp, cp;
    sin_cos(pw, sp, cp);
    double radial = R * cp - m.delta * sp;   // multiplies the even sqrt term
    double angular = R * sp + m.delta * cp;  // its p derivative
    return {-m.c + radial / (root * root * root),
            -(s.q / root) * angular,
            root * radial};
}

// Branch geometry of the pitchfork pair. The symmetric point splits at
// r1 = -sqrt(c^2 - delta^2) and rejoins at r2 = +r2; between them the two
// centers sit at q = -/+ eta(R), all sharing the phase branch_phase(R).
struct BifurcationLoci {
    ModelParams params;
    double r1;
    double r2;

    double eta(double R) const {
        double v = 1.0 - (R * R + params.delta * params.delta) / (params.c * params.c);
        return std::sqrt(std::max(v, 0.0));
    }

    // arctan(-delta/R) on the continuous branch; -pi/2 at R = 0 by two-sided
    // continuity. Equals mu - pi left of the split and mu right of it.
    double branch_phase(double R) const { return std::atan2(-params.delta, R); }

    double mu(double R) const {
        return R < 0.0 ? branch_phase(R) + pi : branch_phase(R);
    }
};

inline BifurcationLoci bifurcation_points(const ModelParams& m) {
    m.validate();
    double r2 = std::sqrt(m.c * m.c - m.delta * m.delta);
    return {m, -r2, r2};
}

namespace detail {

// One Newton polish on the gradient pins the residual at machine precision
// independent of cancellation in the closed forms.
inline FixedPoint polish(double q, double p, double R, const ModelParams& m, Stability st) {
    Gradient g = gradient({q, p}, R, m);
    Hessian h = hessian({q, p}, R, m);
    double det = h.qq * h.pp - h.qp * h.qp;
    if (std::abs(det) > epsilon_marginal) {
        q -= (h.pp * g.dq - h.qp * g.dp) / det;
        p -= (h.qq * g.dp - h.qp * g.dq) / det;
    }
    return {q, p, st};
}

} // namespace detail

// All stationary points at coupling R, sorted by q ascending. One center
// outside [r1, r2]; two centers plus the saddle between them.
inline std::vector<FixedPoint> fixed_points(double R, const ModelParams& m) {
    BifurcationLoci loci = bifurcation_points(m);
    double pb = loci.branch_phase(R);
    std::vector<FixedPoint> out;
    if (R <= loci.r1 || R >= loci.r2) {
        out.push_back(detail::polish(0.0, pb, R, m, Stability::StableCenter));
    } else {
        double e = loci.eta(R);
        out.push_back(detail::polish(-e, pb, R, m, Stability::StableCenter));
        out.push_back(detail::polish(0.0, pb, R, m, Stability::UnstableSaddle));
        out.push_back(detail::polish(+e, pb, R, m, Stability::StableCenter));
    }
    std::sort(out.begin(), out.end(),
              [](const FixedPoint& a, const FixedPoint& b) { return a.q_bar < b.q_bar; });
    return out;
}

// Center iff the linearized flow has an imaginary eigenvalue pair, i.e.
// det of the Hessian at the point is positive.
inline Stability classify_stability(const FixedPoint& fp, double R, const ModelParams& m) {
    Hessian h = hessian({fp.q_bar, fp.p_bar}, R, m);
    double det = h.qq * h.pp - h.qp * h.qp;
    if (std::abs(det) < epsilon_marginal)
        throw marginal_stability_error("stability is marginal at a bifurcation point");
    return det > 0.0 ? Stability::StableCenter : Stability::UnstableSaddle;
}

} // namespace adisweep

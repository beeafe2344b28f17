#pragma once

#include <cmath>
#include <optional>

#include "errors.hpp"
#include "model.hpp"

namespace adisweep {

// Mean-deviation predictions diverge at the bifurcation; below this determinant
// they are rejected rather than returned.
inline constexpr double epsilon_singular = 1e-8;

// Linearization of the flow about a fixed point, in the convention acting on
// the column (dp, dq). Both diagonal entries vanish at every fixed point of
// this model because the cross derivative carries an odd factor of q_bar.
struct GammaMatrix {
    double g11, g12;
    double g21, g22;

    double a_coef() const { return -g12; }  // = H_qq at the point
    double b_coef() const { return g21; }   // = H_pp at the point
    double det() const { return g11 * g22 - g12 * g21; }
};

inline GammaMatrix gamma_matrix(const FixedPoint& fp, double R, const ModelParams& m) {
    Hessian h = hessian({fp.q_bar, fp.p_bar}, R, m);
    return {-h.qp, -h.qq, h.pp, h.qp};
}

struct IdfPrediction {
    double mean_dp;
    double mean_dq;
    double speed;  // dR/dt the prediction is linear in
};

// Which stationary branch the prediction refers to. Auto resolves uniquely
// outside the bifurcated window and is rejected inside it.
enum class BranchSide { Auto, Lower, Upper };

// d(p_bar)/dR and d(q_bar)/dR of the followed branch.
struct BranchDerivative {
    double dp_bar;
    double dq_bar;
};

namespace detail {

inline constexpr double branch_fd_step = 1e-6;

inline FixedPoint stable_point_on(double R, const ModelParams& m, BranchSide side) {
    auto pts = fixed_points(R, m);
    if (pts.size() == 1) {
        if (side == BranchSide::Auto) return pts.front();
        return pts.front();  // the single branch is both ends of the fork
    }
    switch (side) {
        case BranchSide::Lower: return pts.front();
        case BranchSide::Upper: return pts.back();
        case BranchSide::Auto:
        default:
            throw validation_error("branch side must be chosen inside the bifurcated window");
    }
}

} // namespace detail

// Closed forms on the single branch (q_bar identically 0, p_bar = atan2 form);
// 5-point central differences of the fork geometry on the split branches.
inline BranchDerivative branch_derivative(double R, const ModelParams& m,
                                          BranchSide side = BranchSide::Auto) {
    BifurcationLoci loci = bifurcation_points(m);
    double s2 = R * R + m.delta * m.delta;
    if (R <= loci.r1 || R >= loci.r2)
        return {m.delta / s2, 0.0};
    double h = detail::branch_fd_step;
    if (R < loci.r1 + 2.0 * h || R > loci.r2 - 2.0 * h)
        throw singularity_error("branch derivative undefined this close to a bifurcation point");
    double qm2 = detail::stable_point_on(R - 2.0 * h, m, side).q_bar;
    double qm1 = detail::stable_point_on(R - h, m, side).q_bar;
    double qp1 = detail::stable_point_on(R + h, m, side).q_bar;
    double qp2 = detail::stable_point_on(R + 2.0 * h, m, side).q_bar;
    double dq = (qm2 - 8.0 * qm1 + 8.0 * qp1 - qp2) / (12.0 * h);
    return {m.delta / s2, dq};
}

// Mean deviation of the adiabatically followed state from the instantaneous
// fixed point, linear in the sweep rate V: Gamma^{-1} (dp_bar, dq_bar) V.
inline IdfPrediction idf_prediction(double R, double V, const ModelParams& m,
                                    BranchSide side = BranchSide::Auto) {
    FixedPoint fp = detail::stable_point_on(R, m, side);
    GammaMatrix g = gamma_matrix(fp, R, m);
    if (std::abs(g.det()) <= epsilon_singular)
        throw singularity_error("mean deviation diverges at the bifurcation point");
    BranchDerivative bd = branch_derivative(R, m, side);
    double det = g.det();
    double mdp = (g.g22 * bd.dp_bar - g.g12 * bd.dq_bar) / det * V;
    double mdq = (-g.g21 * bd.dp_bar + g.g11 * bd.dq_bar) / det * V;
    return {mdp, mdq, V};
}

// Quoted closed form for the pre-split segment, R < r1. Algebraically equal to
// idf_prediction's mean_dq there.
inline double closed_form_mean_dq(double R, double V, const ModelParams& m) {
    BifurcationLoci loci = bifurcation_points(m);
    if (!(R < loci.r1))
        throw state_domain_error("closed-form mean deviation is for the segment left of the split");
    double s2 = R * R + m.delta * m.delta;
    double s = std::sqrt(s2);
    return -(m.delta / s) / (s2 - m.c * s) * V;
}

// Small-oscillation solution about a fixed point while the phase branch
// drifts at rate M, with w = sqrt(AB):
//   dq = D cos(w t) - M/A,  dp = -(A/w) D sin(w t).
// The p amplitude follows from dq' = B dp, not from A alone.
struct LinearizedParams {
    double a_coef;
    double b_coef;
    double drift_rate;  // M
    double amp;         // D
};

struct Deviation {
    double dq;
    double dp;
};

inline Deviation linearized_solution(const LinearizedParams& lp, double t) {
    double ab = lp.a_coef * lp.b_coef;
    if (!(ab > 0.0) || lp.a_coef == 0.0)
        throw validation_error("oscillatory solution requires A*B > 0");
    double w = std::sqrt(ab);
    return {lp.amp * std::cos(w * t) - lp.drift_rate / lp.a_coef,
            -(lp.a_coef / w) * lp.amp * std::sin(w * t)};
}

} // namespace adisweep

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "idf.hpp"
#include "model.hpp"
#include "numerics.hpp"
#include "propagator.hpp"
#include "protocol.hpp"

namespace adisweep {

enum class InitialMode { OnFixedPoint, IdfShifted };
enum class Branch { Left, Right, Undecided };

inline const char* to_string(Branch b) {
    switch (b) {
        case Branch::Left: return "Left";
        case Branch::Right: return "Right";
        default: return "Undecided";
    }
}

inline const char* to_string(InitialMode m) {
    return m == InitialMode::OnFixedPoint ? "OnFixedPoint" : "IdfShifted";
}

// Half the maximal branch separation: far above the deviation scale, far below
// the branch value, so classification at R = 0 is never marginal.
inline double q_threshold(const ModelParams& m) {
    return 0.5 * bifurcation_points(m).eta(0.0);
}

struct DeviationSample {
    double t;
    double dq;
    double dp;
};

struct SweepResult {
    Trajectory trajectory;
    Branch branch = Branch::Undecided;
    // q at the first step landing within dt*|V| of R = 0; NaN when the
    // schedule never reaches 0.
    double q_at_r0 = std::numeric_limits<double>::quiet_NaN();
    std::vector<DeviationSample> deviation_series;
    // (E_end - E_start) minus the accumulated driving work. Telemetry only:
    // the trapezoidal work quadrature floors it around dt^2 scale, well above
    // the integrator's own defect, so it flags blowups rather than measuring
    // RK4 error.
    double energy_balance_residual = 0.0;
};

namespace detail {

// Deviation of each stored sample from the nearest instantaneous stable
// fixed point.
inline std::vector<DeviationSample> deviations_along(const Trajectory& traj,
                                                     const ModelParams& m) {
    std::vector<DeviationSample> out;
    out.reserve(traj.samples.size());
    for (const TrajectorySample& s : traj.samples) {
        auto fps = fixed_points(s.r, m);
        const FixedPoint* best = nullptr;
        double best_d = std::numeric_limits<double>::infinity();
        for (const FixedPoint& fp : fps) {
            if (fp.stability != Stability::StableCenter) continue;
            double d = std::abs(s.q - fp.q_bar);
            if (d < best_d) {
                best_d = d;
                best = &fp;
            }
        }
        out.push_back({s.t, s.q - best->q_bar, wrap_angle(s.p - best->p_bar)});
    }
    return out;
}

// Shared by the plain sweep and the return leg of the hysteresis run, which
// must start from an arbitrary handed-over state.
inline SweepResult sweep_from(PhaseState initial, const RampProtocol& proto,
                              const ModelParams& m, const IntegrationOptions& opts) {
    double v = proto.segments().front().speed();
    double window = opts.dt * std::abs(v);
    double q_r0 = std::numeric_limits<double>::quiet_NaN();
    bool seen = false;

    auto dh_dr = [](double q, double p) { return -std::sqrt(1.0 - q * q) * std::cos(p); };
    double t_prev = static_cast<double>(opts.start_step) * opts.dt;
    double f_prev = v * dh_dr(initial.q, initial.p);
    double work = 0.0;

    auto observer = [&](std::uint64_t, double t, double r, double q, double p) {
        if (!seen && std::abs(r) <= window) {
            q_r0 = q;
            seen = true;
        }
        double f = v * dh_dr(q, p);
        work += 0.5 * (t - t_prev) * (f + f_prev);
        t_prev = t;
        f_prev = f;
    };

    double e0 = hamiltonian_value(initial, proto.r_at(t_prev), m);
    SweepResult res;
    res.trajectory = integrate_classical(initial, proto, m, opts, observer);
    res.energy_balance_residual =
        hamiltonian_value({res.trajectory.final_q, res.trajectory.final_p},
                          proto.r_at(res.trajectory.final_t), m) -
        e0 - work;
    res.q_at_r0 = q_r0;
    if (seen) {
        double thr = q_threshold(m);
        if (q_r0 < -thr)
            res.branch = Branch::Left;
        else if (q_r0 > thr)
            res.branch = Branch::Right;
        else
            throw undecided_branch_error(
                "sweep crossed R = 0 without committing to a branch; "
                "the run is too fast or mis-configured");
    }
    res.deviation_series = detail::deviations_along(res.trajectory, m);
    return res;
}

inline PhaseState initial_state_at(double r, double V, const ModelParams& m,
                                   InitialMode mode) {
    auto fps = fixed_points(r, m);
    if (fps.size() != 1)
        throw validation_error("sweep must start outside the bifurcated window");
    const FixedPoint& fp = fps.front();
    if (mode == InitialMode::OnFixedPoint) return {fp.q_bar, fp.p_bar};
    IdfPrediction pred = idf_prediction(r, V, m);
    return {fp.q_bar + pred.mean_dq, fp.p_bar + pred.mean_dp};
}

} // namespace detail

// Single constant-speed crossing of the fork. The branch is decided at
// maximal separation (R = 0) rather than just past the split, where the
// branches are still arbitrarily close.
inline SweepResult run_sweep(const ModelParams& m, double r_from, double r_to, double V,
                             double dt, InitialMode initial_mode,
                             std::uint64_t sample_stride = 0) {
    m.validate();
    RampProtocol proto = RampProtocol::ramp(r_from, r_to, V);
    IntegrationOptions opts;
    opts.dt = dt;
    opts.sample_stride = sample_stride;
    PhaseState init = detail::initial_state_at(r_from, V, m, initial_mode);
    return detail::sweep_from(init, proto, m, opts);
}

// Continuation of an interrupted sweep. The schedule is the full original
// ramp; start_step places the clock so R(t) evaluates to bit-identical values
// on the shared step grid, which makes the spliced run indistinguishable from
// an uninterrupted one.
inline SweepResult resume_sweep(const ModelParams& m, double r_from, double r_to, double V,
                                double dt, PhaseState state, std::uint64_t start_step,
                                std::uint64_t sample_stride = 0) {
    m.validate();
    RampProtocol proto = RampProtocol::ramp(r_from, r_to, V);
    IntegrationOptions opts;
    opts.dt = dt;
    opts.sample_stride = sample_stride;
    opts.start_step = start_step;
    return detail::sweep_from(state, proto, m, opts);
}

struct HysteresisResult {
    SweepResult forward;
    SweepResult backward;
    double loop_area = 0.0;
    double loop_closure_gap = 0.0;
};

namespace detail {

inline double shoelace_area(const std::vector<TrajectorySample>& fwd,
                            const std::vector<TrajectorySample>& bwd) {
    double acc = 0.0;
    std::size_t n = fwd.size() + bwd.size();
    auto at = [&](std::size_t i) -> const TrajectorySample& {
        return i < fwd.size() ? fwd[i] : bwd[i - fwd.size()];
    };
    for (std::size_t i = 0; i < n; ++i) {
        const TrajectorySample& a = at(i);
        const TrajectorySample& b = at((i + 1) % n);
        acc += a.q * b.p - b.q * a.p;
    }
    return 0.5 * std::abs(acc);
}

} // namespace detail

// Up sweep, then down sweep continuing from wherever the up sweep ended.
// r_max below the split is allowed: nothing bifurcates and the loop area
// vanishes, a useful reversibility diagnostic.
inline HysteresisResult run_hysteresis(const ModelParams& m, double r_min, double r_max,
                                       double V, double dt,
                                       std::uint64_t sample_stride = 0) {
    m.validate();
    if (!(V > 0.0)) throw validation_error("hysteresis speed must be positive");
    if (!(r_min < r_max)) throw validation_error("hysteresis needs r_min < r_max");

    HysteresisResult res;
    res.forward = run_sweep(m, r_min, r_max, V, dt, InitialMode::OnFixedPoint, sample_stride);

    RampProtocol down = RampProtocol::ramp(r_max, r_min, -V);
    IntegrationOptions opts;
    opts.dt = dt;
    opts.sample_stride = sample_stride;
    PhaseState handoff{res.forward.trajectory.final_q, res.forward.trajectory.final_p};
    res.backward = detail::sweep_from(handoff, down, m, opts);

    res.loop_area = detail::shoelace_area(res.forward.trajectory.samples,
                                          res.backward.trajectory.samples);
    const TrajectorySample& first = res.forward.trajectory.samples.front();
    res.loop_closure_gap = std::hypot(res.backward.trajectory.final_q - first.q,
                                      wrap_angle(res.backward.trajectory.final_p - first.p));
    return res;
}

inline double berry_phase_analytic(const ModelParams& m) {
    m.validate();
    return pi * (1.0 - m.delta / m.c);
}

// Connection difference of the two fork branches integrated across the
// bifurcated window. The substitution R = r2 sin(theta) removes the
// square-root endpoint behavior, so plain adaptive quadrature converges fast.
inline double berry_connection_quadrature(const ModelParams& m, double tol = 1e-8) {
    m.validate();
    BifurcationLoci loci = bifurcation_points(m);
    double r2 = loci.r2;
    double d2 = m.delta * m.delta;
    auto integrand = [&](double th) {
        double ct = std::cos(th), st = std::sin(th);
        double r = r2 * st;
        return (r2 * ct / m.c) * (m.delta / (r * r + d2)) * r2 * ct;
    };
    return integrate_adaptive(integrand, -0.5 * pi, 0.5 * pi, tol);
}

inline constexpr double loop_closure_tolerance_default = 0.05;

// Discrete gauge-invariant connection sum around a closed cycle of two-mode
// states: minus the total argument of consecutive overlaps, closing edge
// included, lifted into (-pi, 2 pi) for comparison with the analytic value.
inline double berry_phase_numeric(const std::vector<QuantumState>& loop,
                                  double closure_tol = loop_closure_tolerance_default) {
    if (loop.size() < 3)
        throw loop_sampling_error("loop needs at least three states");

    PhaseState first = quantum_to_classical(loop.front());
    PhaseState last = quantum_to_classical(loop.back());
    double gap = std::hypot(last.q - first.q, wrap_angle(last.p - first.p));
    if (gap > closure_tol)
        throw loop_closure_error("loop endpoints do not coincide within the closure tolerance");

    double acc = 0.0;
    std::size_t n = loop.size();
    for (std::size_t k = 0; k < n; ++k) {
        const QuantumState& u = loop[k];
        const QuantumState& v = loop[(k + 1) % n];
        std::complex<double> ov = std::conj(u.a) * v.a + std::conj(u.b) * v.b;
        if (std::abs(ov) < 0.99)
            throw loop_sampling_error("consecutive states overlap below 0.99; loop too coarse");
        double ang = std::arg(ov);
        if (!(std::abs(ang) < 0.25 * pi))
            throw loop_sampling_error("consecutive overlap argument reached pi/4; loop too coarse");
        acc += ang;
    }
    double phase = std::remainder(-acc, 2.0 * pi);
    if (phase < -0.5 * pi) phase += 2.0 * pi;
    return phase;
}

struct BerryPhaseReport {
    double analytic = 0.0;
    double numeric = 0.0;
    double loop_closure_gap = 0.0;
};

// Defaults for assembling the state loop from trajectories. The sample
// interval is deliberately a large fraction of the local oscillation period:
// consecutive loop vertices then decorrelate in oscillation phase and the
// small circulation each oscillation cycle traces does not accumulate into
// the connection sum. Dense sampling is the wrong choice here; it biases the
// result upward by the enclosed oscillation area.
inline constexpr double berry_margin_default = 0.08;
inline constexpr double berry_sample_interval_default = 35.0;

// Geometric phase of the closed navigation cycle: one up sweep and one down
// sweep, each launched on its own starting fixed point so the return leg
// commits to the mirror branch independently of the up leg's leftover
// oscillation. States are taken from the classical trajectory through the
// two-mode mapping, which carries no dynamical phase by construction.
inline BerryPhaseReport berry_experiment(const ModelParams& m, double V, double dt = 0.05,
                                         double margin = berry_margin_default,
                                         double sample_interval = berry_sample_interval_default) {
    m.validate();
    if (!(V > 0.0)) throw validation_error("sweep speed must be positive");
    if (!(margin > 0.0)) throw validation_error("margin must reach beyond the fork");
    BifurcationLoci loci = bifurcation_points(m);
    double lo = loci.r1 - margin;
    double hi = loci.r2 + margin;
    auto stride = static_cast<std::uint64_t>(std::llround(sample_interval / dt));
    if (stride == 0) stride = 1;

    SweepResult up = run_sweep(m, lo, hi, V, dt, InitialMode::OnFixedPoint, stride);
    SweepResult down = run_sweep(m, hi, lo, -V, dt, InitialMode::OnFixedPoint, stride);

    std::vector<QuantumState> loop;
    loop.reserve(up.trajectory.samples.size() + down.trajectory.samples.size());
    for (const TrajectorySample& s : up.trajectory.samples)
        loop.push_back(classical_to_quantum({s.q, s.p}, 0.0));
    for (const TrajectorySample& s : down.trajectory.samples)
        loop.push_back(classical_to_quantum({s.q, s.p}, 0.0));

    BerryPhaseReport rep;
    rep.analytic = berry_phase_analytic(m);
    PhaseState first = quantum_to_classical(loop.front());
    PhaseState last = quantum_to_classical(loop.back());
    rep.loop_closure_gap = std::hypot(last.q - first.q, wrap_angle(last.p - first.p));
    rep.numeric = berry_phase_numeric(loop);
    return rep;
}

struct TrackingSample {
    double t;
    double r;
    double dq_actual;
    double mean_dq_theory;
};

// Deviation from the followed fixed point against the rate-linear prediction,
// over a window that stays strictly left of the split.
inline std::vector<TrackingSample> idf_tracking_experiment(const ModelParams& m, double r_from,
                                                           double r_stop, double V, double dt,
                                                           InitialMode initial_mode,
                                                           std::uint64_t sample_stride = 0) {
    m.validate();
    BifurcationLoci loci = bifurcation_points(m);
    if (!(r_from < loci.r1 && r_stop < loci.r1))
        throw validation_error("tracking window must stay left of the split");

    RampProtocol proto = RampProtocol::ramp(r_from, r_stop, V);
    IntegrationOptions opts;
    opts.dt = dt;
    opts.sample_stride = sample_stride;
    PhaseState init = detail::initial_state_at(r_from, V, m, initial_mode);
    Trajectory traj = integrate_classical(init, proto, m, opts);

    std::vector<TrackingSample> out;
    out.reserve(traj.samples.size());
    for (const TrajectorySample& s : traj.samples)
        out.push_back({s.t, s.r, s.q, closed_form_mean_dq(s.r, V, m)});
    return out;
}

// Runs on the fixed point up to r_freeze, then holds the coupling and reads
// the small-oscillation frequency from zero crossings of the deviation.
inline double oscillation_frequency_probe(const ModelParams& m, double r_start, double r_freeze,
                                          double V, double dt, int n_periods = 8) {
    m.validate();
    RampProtocol approach = RampProtocol::ramp(r_start, r_freeze, V);
    IntegrationOptions opts;
    opts.dt = dt;
    opts.sample_stride = 1000000;  // approach samples are not needed
    Trajectory leg = integrate_classical(detail::initial_state_at(r_start, V, m,
                                                                  InitialMode::OnFixedPoint),
                                         approach, m, opts);

    FixedPoint fp = detail::stable_point_on(r_freeze, m, BranchSide::Auto);
    GammaMatrix g = gamma_matrix(fp, r_freeze, m);
    double w_guess = std::sqrt(g.a_coef() * g.b_coef());
    RampProtocol hold = RampProtocol::hold(r_freeze, n_periods * 2.0 * pi / w_guess);

    IntegrationOptions hold_opts;
    hold_opts.dt = dt;
    hold_opts.sample_stride = 1;
    Trajectory ring = integrate_classical({leg.final_q, leg.final_p}, hold, m, hold_opts);

    std::vector<double> t, dq;
    t.reserve(ring.samples.size());
    dq.reserve(ring.samples.size());
    double mean = 0.0;
    for (const TrajectorySample& s : ring.samples) mean += s.q;
    mean /= static_cast<double>(ring.samples.size());
    for (const TrajectorySample& s : ring.samples) {
        t.push_back(s.t);
        dq.push_back(s.q - mean);
    }
    return frequency_from_zero_crossings(t, dq);
}

struct EnsembleResult {
    double mean_dp = 0.0;
    double mean_dq = 0.0;
};

// Brute-force check of the mean-deviation formula: a ring of initial
// deviations around the rate-shifted point, each run time-averaged over an
// integer number of linearized periods, then averaged across the ring. The
// ring lives in coordinates where the linearized orbits are circles (p axis
// scaled by sqrt(A/B)), which makes the oscillatory part of the average
// cancel exactly in the linear regime, for any ring size.
inline EnsembleResult ensemble_average_oracle(const ModelParams& m, double R, double V,
                                              int n_samples, double radius, double dt = 0.05,
                                              int n_periods = 4, double theta0 = 0.0) {
    m.validate();
    if (n_samples < 1) throw validation_error("ensemble needs at least one sample");
    auto fps = fixed_points(R, m);
    if (fps.size() != 1)
        throw validation_error("ensemble oracle requires a single-branch coupling");

    const FixedPoint fp = fps.front();
    GammaMatrix g = gamma_matrix(fp, R, m);
    double a = g.a_coef(), b = g.b_coef();
    double w = std::sqrt(a * b);
    double scale = std::sqrt(a / b);
    auto n_steps = static_cast<std::uint64_t>(std::llround(n_periods * 2.0 * pi / w / dt));
    IdfPrediction shift = idf_prediction(R, V, m);

    double acc_dq = 0.0, acc_dp = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        double th = theta0 + 2.0 * pi * k / n_samples;
        double dq0 = radius * std::cos(th);
        double dp0 = radius * std::sin(th) / scale;
        PhaseState init{fp.q_bar + shift.mean_dq + dq0, fp.p_bar + shift.mean_dp + dp0};

        double span = static_cast<double>(n_steps) * dt;
        RampProtocol proto = RampProtocol::ramp(R, R + V * span, V);
        double sum_dq = 0.0, sum_dp = 0.0;
        auto observer = [&](std::uint64_t, double, double r, double q, double p) {
            sum_dq += q;
            sum_dp += p - std::atan2(-m.delta, r);
        };
        IntegrationOptions opts;
        opts.dt = dt;
        opts.sample_stride = n_steps;  // keep storage minimal; the observer does the work
        integrate_classical(init, proto, m, opts, observer);
        acc_dq += sum_dq / static_cast<double>(n_steps);
        acc_dp += sum_dp / static_cast<double>(n_steps);
    }
    return {acc_dp / n_samples, acc_dq / n_samples};
}

// max |q_fwd(R) + q_bwd(R)| over the window where both series sit on a
// committed branch (|q| above the commitment threshold), with the backward
// series linearly interpolated onto the forward R grid. The snap lips just
// past each fork edge are excluded: there one leg still hugs the saddle
// while the other is already merged, which measures the commitment delay,
// not branch asymmetry. Zero means exact mirrors or an empty window.
inline double mirror_mismatch(const Trajectory& forward, const Trajectory& backward,
                              const ModelParams& m) {
    BifurcationLoci loci = bifurcation_points(m);
    double thr = q_threshold(m);
    std::vector<double> rb, qb;
    rb.reserve(backward.samples.size());
    qb.reserve(backward.samples.size());
    for (auto it = backward.samples.rbegin(); it != backward.samples.rend(); ++it) {
        if (!rb.empty() && !(it->r > rb.back())) continue;  // enforce strict ascent
        rb.push_back(it->r);
        qb.push_back(it->q);
    }
    if (rb.size() < 2) throw validation_error("backward leg has too few samples to interpolate");

    double worst = 0.0;
    for (const TrajectorySample& s : forward.samples) {
        if (!(s.r > loci.r1 && s.r < loci.r2)) continue;
        if (s.r < rb.front() || s.r > rb.back()) continue;
        auto hi = std::lower_bound(rb.begin(), rb.end(), s.r);
        if (hi == rb.begin()) ++hi;
        std::size_t i = static_cast<std::size_t>(hi - rb.begin());
        double w = (s.r - rb[i - 1]) / (rb[i] - rb[i - 1]);
        double q_b = qb[i - 1] + w * (qb[i] - qb[i - 1]);
        if (std::abs(s.q) <= thr || std::abs(q_b) <= thr) continue;
        worst = std::max(worst, std::abs(s.q + q_b));
    }
    return worst;
}

// Closest approach of a trajectory to the instantaneous saddle, over the
// samples inside the bifurcated window.
inline double min_distance_to_saddle(const Trajectory& traj, const ModelParams& m) {
    BifurcationLoci loci = bifurcation_points(m);
    double best = std::numeric_limits<double>::infinity();
    for (const TrajectorySample& s : traj.samples) {
        if (!(s.r > loci.r1 && s.r < loci.r2)) continue;
        double d = std::hypot(s.q, wrap_angle(s.p - loci.branch_phase(s.r)));
        if (d < best) best = d;
    }
    return best;
}

} // namespace adisweep

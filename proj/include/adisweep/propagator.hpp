#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "protocol.hpp"

namespace adisweep {

inline constexpr double norm_drift_bound = 1e-8;

struct TrajectorySample {
    double t;
    double r;
    double q;
    double p;       // unwrapped; wrap at presentation only
    double energy;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::uint64_t sample_stride = 1;
    std::uint64_t step_count = 0;  // whole steps taken, excluding a final partial step
    double dt = 0.0;
    double final_t = 0.0;
    double final_q = 0.0;
    double final_p = 0.0;
};

struct IntegrationOptions {
    double dt = 0.05;
    // 0 selects the smallest stride keeping stored samples at or under 100000.
    std::uint64_t sample_stride = 0;
    // Absolute energy-drift allowance across any constant-R segment.
    double energy_drift_bound = 1e-8;
    // Whole steps already taken before `initial`; time restarts at start_step*dt
    // so a continued run retraces the uninterrupted one bit for bit.
    std::uint64_t start_step = 0;
};

namespace detail {

// Leftover below this fraction of dt counts as float crumb, not a real
// partial step. Schedule durations come from divisions like span/speed, so
// span/dt can sit up to ~n*ulp below a whole number; 1e-6 absorbs that for
// any realistic step count while never swallowing a genuine fraction.
inline constexpr double partial_step_crumb = 1e-6;

struct Deriv {
    double dq;
    double dp;
};

inline Deriv flow(double q, double p, double R, const ModelParams& m) {
    Gradient g = gradient({q, p}, R, m);
    return {g.dp, -g.dq};  // dq/dt = dH/dp, dp/dt = -dH/dq
}

inline void rk4_step(double& q, double& p, double t, double h, const RampProtocol& proto,
                     const ModelParams& m) {
    double r1 = proto.r_at(t);
    double r2 = proto.r_at(t + 0.5 * h);
    double r4 = proto.r_at(t + h);
    Deriv k1 = flow(q, p, r1, m);
    Deriv k2 = flow(q + 0.5 * h * k1.dq, p + 0.5 * h * k1.dp, r2, m);
    Deriv k3 = flow(q + 0.5 * h * k2.dq, p + 0.5 * h * k2.dp, r2, m);
    Deriv k4 = flow(q + h * k3.dq, p + h * k3.dp, r4, m);
    q += h / 6.0 * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
    p += h / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
}

inline std::uint64_t resolve_stride(std::uint64_t requested, std::uint64_t n_steps) {
    if (requested > 0) return requested;
    std::uint64_t stride = (n_steps + 99999) / 100000;
    return stride == 0 ? 1 : stride;
}

} // namespace detail

struct NoObserver {
    void operator()(std::uint64_t, double, double, double, double) const {}
};

// Fixed-step classic Runge-Kutta over the whole schedule, with R evaluated at
// substage times. Stores every sample_stride-th state plus the exact end state.
// The observer sees every step: (step index, t, r, q, p) after the step lands.
template <class Observer = NoObserver>
Trajectory integrate_classical(PhaseState initial, const RampProtocol& proto,
                               const ModelParams& m, const IntegrationOptions& opts = {},
                               Observer&& observe = {}) {
    m.validate();
    if (!(opts.dt > 0.0)) throw validation_error("dt must be positive");

    double total = proto.total_duration();
    double t_begin = static_cast<double>(opts.start_step) * opts.dt;
    if (t_begin > total * (1.0 + 1e-12))
        throw validation_error("resume point lies beyond the end of the schedule");

    double span = total - t_begin;
    std::uint64_t n_whole = static_cast<std::uint64_t>(span / opts.dt + detail::partial_step_crumb);
    double remainder = span - static_cast<double>(n_whole) * opts.dt;
    bool partial = remainder > opts.dt * detail::partial_step_crumb;

    Trajectory traj;
    traj.dt = opts.dt;
    traj.sample_stride = detail::resolve_stride(opts.sample_stride, n_whole + (partial ? 1 : 0));
    traj.samples.reserve(static_cast<std::size_t>(n_whole / traj.sample_stride) + 2);

    double q = initial.q;
    double p = initial.p;

    std::size_t hold_segment = static_cast<std::size_t>(-1);
    double hold_energy = 0.0;
    auto emit = [&](double t) {
        double r = proto.r_at(t);
        double e = hamiltonian_value({q, p}, r, m);
        traj.samples.push_back({t, r, q, p, e});
        std::size_t seg = proto.segment_index(t);
        if (proto.segments()[seg].speed() == 0.0) {
            if (seg != hold_segment) {
                hold_segment = seg;
                hold_energy = e;
            } else if (std::abs(e - hold_energy) > opts.energy_drift_bound) {
                throw instability_error("energy drifted at constant coupling beyond the bound");
            }
        } else {
            hold_segment = static_cast<std::size_t>(-1);
        }
    };

    emit(t_begin);
    for (std::uint64_t i = 0; i < n_whole; ++i) {
        std::uint64_t global = opts.start_step + i;
        double t = static_cast<double>(global) * opts.dt;
        detail::rk4_step(q, p, t, opts.dt, proto, m);
        double t1 = static_cast<double>(global + 1) * opts.dt;
        observe(global + 1, t1, proto.r_at(t1), q, p);
        if ((global + 1) % traj.sample_stride == 0 && (partial || i + 1 < n_whole))
            emit(t1);
    }
    traj.step_count = opts.start_step + n_whole;
    if (partial) {
        double t = static_cast<double>(traj.step_count) * opts.dt;
        detail::rk4_step(q, p, t, remainder, proto, m);
        observe(traj.step_count, total, proto.r_at(total), q, p);
    }
    traj.final_t = partial ? total : static_cast<double>(traj.step_count) * opts.dt;
    traj.final_q = q;
    traj.final_p = p;
    if (traj.samples.back().t != traj.final_t) emit(traj.final_t);
    return traj;
}

struct QuantumState {
    std::complex<double> a;
    std::complex<double> b;

    double norm() const { return std::norm(a) + std::norm(b); }
};

struct QuantumSample {
    double t;
    double r;
    std::complex<double> a;
    std::complex<double> b;
};

struct QuantumTrajectory {
    std::vector<QuantumSample> samples;
    std::uint64_t sample_stride = 1;
    std::uint64_t step_count = 0;
    double dt = 0.0;
    double final_t = 0.0;
    QuantumState final_state;
};

inline QuantumState classical_to_quantum(const PhaseState& s, double gauge_phase) {
    detail::require_q_closed(s.q);
    double ra = std::sqrt(0.5 * (1.0 - s.q));
    double rb = std::sqrt(0.5 * (1.0 + s.q));
    return {std::polar(ra, gauge_phase), std::polar(rb, gauge_phase + s.p)};
}

inline PhaseState quantum_to_classical(const QuantumState& s) {
    if (std::abs(s.a) < 1e-12 || std::abs(s.b) < 1e-12)
        throw phase_undefined_error("relative phase undefined when a mode amplitude vanishes");
    return {std::norm(s.b) - std::norm(s.a), wrap_angle(std::arg(s.b) - std::arg(s.a))};
}

namespace detail {

struct QDeriv {
    std::complex<double> da;
    std::complex<double> db;
};

// Amplitude flow of the two-mode matrix with the nonlinear diagonal re-read at
// every substage. The factor 1/2 makes the induced (q, p) motion coincide with
// Hamilton's equations for the scalar model; without it the pair moves twice
// as fast as the classical state it represents.
inline QDeriv qflow(const std::complex<double>& a, const std::complex<double>& b, double R,
                    const ModelParams& m) {
    const std::complex<double> mihalf(0.0, -0.5);
    double z = m.c * (std::norm(b) - std::norm(a));
    std::complex<double> off_ab(-R, -m.delta);
    std::complex<double> off_ba(-R, m.delta);
    return {mihalf * (z * a + off_ab * b), mihalf * (off_ba * a - z * b)};
}

inline void rk4_qstep(std::complex<double>& a, std::complex<double>& b, double t, double h,
                      const RampProtocol& proto, const ModelParams& m) {
    double r1 = proto.r_at(t);
    double r2 = proto.r_at(t + 0.5 * h);
    double r4 = proto.r_at(t + h);
    QDeriv k1 = qflow(a, b, r1, m);
    QDeriv k2 = qflow(a + 0.5 * h * k1.da, b + 0.5 * h * k1.db, r2, m);
    QDeriv k3 = qflow(a + 0.5 * h * k2.da, b + 0.5 * h * k2.db, r2, m);
    QDeriv k4 = qflow(a + h * k3.da, b + h * k3.db, r4, m);
    a += h / 6.0 * (k1.da + 2.0 * k2.da + 2.0 * k3.da + k4.da);
    b += h / 6.0 * (k1.db + 2.0 * k2.db + 2.0 * k3.db + k4.db);
}

} // namespace detail

// Same one-step method as the classical integrator, on the two complex
// amplitudes. Norm conservation is checked at sample times, never enforced.
inline QuantumTrajectory integrate_quantum(QuantumState initial, const RampProtocol& proto,
                                           const ModelParams& m,
                                           const IntegrationOptions& opts = {}) {
    m.validate();
    if (!(opts.dt > 0.0)) throw validation_error("dt must be positive");

    double total = proto.total_duration();
    double t_begin = static_cast<double>(opts.start_step) * opts.dt;
    if (t_begin > total * (1.0 + 1e-12))
        throw validation_error("resume point lies beyond the end of the schedule");

    double span = total - t_begin;
    std::uint64_t n_whole = static_cast<std::uint64_t>(span / opts.dt + detail::partial_step_crumb);
    double remainder = span - static_cast<double>(n_whole) * opts.dt;
    bool partial = remainder > opts.dt * detail::partial_step_crumb;

    QuantumTrajectory traj;
    traj.dt = opts.dt;
    traj.sample_stride = detail::resolve_stride(opts.sample_stride, n_whole + (partial ? 1 : 0));
    traj.samples.reserve(static_cast<std::size_t>(n_whole / traj.sample_stride) + 2);

    std::complex<double> a = initial.a;
    std::complex<double> b = initial.b;
    auto emit = [&](double t) {
        double n = std::norm(a) + std::norm(b);
        if (std::abs(n - 1.0) > norm_drift_bound)
            throw norm_drift_error("amplitude norm drifted beyond the conservation band");
        traj.samples.push_back({t, proto.r_at(t), a, b});
    };

    emit(t_begin);
    for (std::uint64_t i = 0; i < n_whole; ++i) {
        std::uint64_t global = opts.start_step + i;
        double t = static_cast<double>(global) * opts.dt;
        detail::rk4_qstep(a, b, t, opts.dt, proto, m);
        if ((global + 1) % traj.sample_stride == 0 && (partial || i + 1 < n_whole))
            emit(static_cast<double>(global + 1) * opts.dt);
    }
    traj.step_count = opts.start_step + n_whole;
    if (partial) {
        double t = static_cast<double>(traj.step_count) * opts.dt;
        detail::rk4_qstep(a, b, t, remainder, proto, m);
    }
    traj.final_t = partial ? total : static_cast<double>(traj.step_count) * opts.dt;
    traj.final_state = {a, b};
    if (traj.samples.back().t != traj.final_t) emit(traj.final_t);
    return traj;
}

} // namespace adisweep

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"

namespace adisweep {

// One piecewise-linear leg of the coupling schedule. Ramps have nonzero speed;
// holds keep r_from == r_to over a positive duration.
struct Segment {
    double r_from;
    double r_to;
    double duration;

    double speed() const { return (r_to - r_from) / duration; }
};

// Continuous piecewise-linear R(t) starting at t = 0.
class RampProtocol {
public:
    static RampProtocol ramp(double r_from, double r_to, double speed) {
        RampProtocol p;
        p.push_ramp(r_from, r_to, speed);
        return p;
    }

    RampProtocol& then_ramp(double r_to, double speed) {
        push_ramp(end_r(), r_to, speed);
        return *this;
    }

    RampProtocol& then_hold(double duration) {
        if (!(duration > 0.0)) throw validation_error("hold duration must be positive");
        double t0 = total_duration();
        double r = end_r();
        segments_.push_back({r, r, duration});
        starts_.push_back(t0);
        return *this;
    }

    static RampProtocol hold(double r, double duration) {
        if (!(duration > 0.0)) throw validation_error("hold duration must be positive");
        RampProtocol p;
        p.segments_.push_back({r, r, duration});
        p.starts_.push_back(0.0);
        return p;
    }

    const std::vector<Segment>& segments() const { return segments_; }
    double total_duration() const { return starts_.back() + segments_.back().duration; }
    double start_r() const { return segments_.front().r_from; }
    double end_r() const { return segments_.back().r_to; }

    // Evaluation is clamped to the schedule's time span. Callers that store r
    // alongside states use this same expression, so stored values reproduce it
    // bit for bit.
    double r_at(double t) const {
        std::size_t i = segment_index(t);
        const Segment& s = segments_[i];
        return s.r_from + s.speed() * (t - starts_[i]);
    }

    std::size_t segment_index(double t) const {
        std::size_t i = 0;
        while (i + 1 < segments_.size() && t >= starts_[i + 1]) ++i;
        return i;
    }

    double segment_start_time(std::size_t i) const { return starts_[i]; }

private:
    RampProtocol() = default;

    void push_ramp(double r_from, double r_to, double speed) {
        if (speed == 0.0) throw validation_error("ramp speed must be nonzero");
        double duration = (r_to - r_from) / speed;
        if (!(duration > 0.0))
            throw validation_error("ramp speed sign must match the sweep direction");
        double t0 = segments_.empty() ? 0.0 : total_duration();
        segments_.push_back({r_from, r_to, duration});
        starts_.push_back(t0);
    }

    std::vector<Segment> segments_;
    std::vector<double> starts_;
};

} // namespace adisweep

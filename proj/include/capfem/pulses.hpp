#pragma once

/// @file pulses.hpp
/// @brief Time pulse shapes for the forcing term, and separable forcings
///        p(t) * g(x).
///
/// Values at jump instants follow the right-sided limit, matching the scheme's
/// point sampling of the forcing at the step endpoints: a rectangular pulse
/// supported on [onset, onset + duration) contributes at its onset node but
/// not at its switch-off node.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "capfem/error.hpp"
#include "capfem/geometry.hpp"
#include "capfem/timegrid.hpp"

namespace capfem {

enum class PulseKind { rectangular, trapezoidal, gaussian, biphasic_exponential };

inline const char* pulse_kind_name(PulseKind k) {
    switch (k) {
    case PulseKind::rectangular: return "rectangular";
    case PulseKind::trapezoidal: return "trapezoidal";
    case PulseKind::gaussian: return "gaussian";
    case PulseKind::biphasic_exponential: return "biphasic-exponential";
    }
    return "?";
}

/// One time pulse. Parameter use per kind:
///   rectangular:          amplitude, onset, duration
///   trapezoidal:          amplitude, onset, duration, rise (2*rise <= duration)
///   gaussian:             amplitude, center, width
///   biphasic-exponential: amplitude, onset, duration, decay; one full sine
///                         period damped by exp(-(t-onset)/decay)
struct PulseShape {
    PulseKind kind = PulseKind::trapezoidal;
    double amplitude = 1.0;
    double onset = 0.0;
    double duration = 0.0;
    double rise = 0.0;
    double center = 0.0;
    double width = 0.0;
    double decay = 0.0;

    static PulseShape rectangular(double amplitude, double onset,
                                  double duration) {
        PulseShape p;
        p.kind = PulseKind::rectangular;
        p.amplitude = amplitude;
        p.onset = onset;
        p.duration = duration;
        p.validate();
        return p;
    }
    static PulseShape trapezoidal(double amplitude, double onset,
                                  double duration, double rise) {
        PulseShape p;
        p.kind = PulseKind::trapezoidal;
        p.amplitude = amplitude;
        p.onset = onset;
        p.duration = duration;
        p.rise = rise;
        p.validate();
        return p;
    }
    static PulseShape gaussian(double amplitude, double center, double width) {
        PulseShape p;
        p.kind = PulseKind::gaussian;
        p.amplitude = amplitude;
        p.center = center;
        p.width = width;
        p.validate();
        return p;
    }
    static PulseShape biphasic_exponential(double amplitude, double onset,
                                           double duration, double decay) {
        PulseShape p;
        p.kind = PulseKind::biphasic_exponential;
        p.amplitude = amplitude;
        p.onset = onset;
        p.duration = duration;
        p.decay = decay;
        p.validate();
        return p;
    }

    void validate() const {
        if (!std::isfinite(amplitude))
            throw Error(ErrorKind::invalid_argument,
                        "pulse: amplitude must be finite");
        switch (kind) {
        case PulseKind::rectangular:
            if (!(duration > 0.0))
                throw Error(ErrorKind::invalid_argument,
                            "pulse: rectangular needs a positive duration");
            break;
        case PulseKind::trapezoidal:
            if (!(duration > 0.0) || !(rise > 0.0) || !(2.0 * rise <= duration))
                throw Error(ErrorKind::invalid_argument,
                            "pulse: trapezoidal needs duration > 0 and "
                            "0 < rise <= duration/2");
            break;
        case PulseKind::gaussian:
            if (!(width > 0.0))
                throw Error(ErrorKind::invalid_argument,
                            "pulse: gaussian needs a positive width");
            break;
        case PulseKind::biphasic_exponential:
            if (!(duration > 0.0) || !(decay > 0.0))
                throw Error(ErrorKind::invalid_argument,
                            "pulse: biphasic-exponential needs positive "
                            "duration and decay");
            break;
        }
    }

    /// Right-continuous evaluation; exactly zero outside the support of the
    /// compactly supported kinds.
    double value(double t) const {
        switch (kind) {
        case PulseKind::rectangular:
            return (t >= onset && t < onset + duration) ? amplitude : 0.0;
        case PulseKind::trapezoidal: {
            double s = t - onset;
            if (s <= 0.0 || s >= duration) return 0.0;
            if (s < rise) return amplitude * (s / rise);
            if (s > duration - rise) return amplitude * ((duration - s) / rise);
            return amplitude;
        }
        case PulseKind::gaussian: {
            double d = (t - center) / width;
            return amplitude * std::exp(-0.5 * d * d);
        }
        case PulseKind::biphasic_exponential: {
            double s = t - onset;
            if (s <= 0.0 || s >= duration) return 0.0;
            return amplitude * std::sin(2.0 * M_PI * s / duration) *
                   std::exp(-s / decay);
        }
        }
        return 0.0;
    }

    /// In H1 on any bounded time interval? False exactly for the rectangular
    /// kind (jump discontinuity); the others are continuous and piecewise C1.
    bool is_h1_in_time() const { return kind != PulseKind::rectangular; }

    bool compact_support() const { return kind != PulseKind::gaussian; }
};

// spatial profile type; kept here to avoid a dependency on assembly.hpp
using ScalarSpatialFn = std::function<double(Vec2, int)>;

/// Forcing f(t, x) = pulse(t) * profile(x), with an optional general closure
/// that overrides the separable form when set.
struct SeparableForcing {
    PulseShape pulse;
    ScalarSpatialFn profile;
    double final_time = 0.0;   // guards evaluate(); 0 disables the guard
    std::function<double(double, Vec2, int)> general;
};

inline double evaluate(const SeparableForcing& f, double t, Vec2 x, int tag) {
    if (f.final_time > 0.0 && (t < 0.0 || t > f.final_time))
        throw Error(ErrorKind::invalid_argument,
                    "forcing: t = " + std::to_string(t) +
                        " is outside [0, " + std::to_string(f.final_time) + "]");
    if (f.general) return f.general(t, x, tag);
    if (!f.profile)
        throw Error(ErrorKind::invalid_argument, "forcing: missing profile");
    return f.pulse.value(t) * f.profile(x, tag);
}

/// Pulse values at the scheme's sampling nodes t^1 .. t^N.
inline std::vector<double> time_samples(const PulseShape& pulse,
                                        const TimeGrid& grid) {
    grid.validate();
    std::vector<double> out(grid.steps);
    for (int n = 1; n <= grid.steps; ++n) out[n - 1] = pulse.value(grid.node(n));
    return out;
}

} // namespace capfem

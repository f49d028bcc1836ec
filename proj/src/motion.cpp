#include "boxtrack/motion.hpp"

#include "boxtrack/geometry.hpp"

#include <cmath>

namespace boxtrack {

StateVector ct_transition(const StateVector& state, double dt) {
    StateVector next = state;
    const double v = state[idx::v];
    const double omega = state[idx::yaw_rate];
    const double phi = state[idx::yaw];
    if (std::abs(omega) < kStraightTurnRate) {
        // Second-order expansion of the arc in omega*dt.
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        next[idx::x] += v * dt * c - 0.5 * v * omega * dt * dt * s;
        next[idx::y] += v * dt * s + 0.5 * v * omega * dt * dt * c;
    } else {
        const double phi_end = phi + omega * dt;
        next[idx::x] += v / omega * (std::sin(phi_end) - std::sin(phi));
        next[idx::y] += v / omega * (std::cos(phi) - std::cos(phi_end));
    }
    next[idx::yaw] = wrap_angle(phi + omega * dt);
    return next;
}

StateVector ct_transition_with_noise(const StateVector& state, double dt, double accel,
                                     double yaw_accel) {
    StateVector next = ct_transition(state, dt);
    const double half_dt2 = 0.5 * dt * dt;
    const double phi = state[idx::yaw];
    next[idx::x] += half_dt2 * accel * std::cos(phi);
    next[idx::y] += half_dt2 * accel * std::sin(phi);
    next[idx::yaw] = wrap_angle(next[idx::yaw] + half_dt2 * yaw_accel);
    next[idx::v] += dt * accel;
    next[idx::yaw_rate] += dt * yaw_accel;
    return next;
}

}  // namespace boxtrack

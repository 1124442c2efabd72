#pragma once

// Measure-preserving temperature transitions via a splitting of the contact
// Hamiltonian H_C = T + V_B + beta * dV + log Z(beta) + h0 into
//
//     H1 = T,   H2 = V_B,   H3 = beta * dV + log Z(beta).
//
// Each sub-flow is solved exactly and composed symmetrically,
// H1(t/2) H2(t/2) H3(t) H2(t/2) H1(t/2), giving a reversible second-order
// step.  Cooling (raising beta toward 1) runs backwards in time (t = -eps),
// heating forwards (t = +eps).
//
// The temperature can be evolved in two coordinates:
//   * beta:  the inverse temperature itself is the contact coordinate.
//   * gamma: beta = logistic(gamma); the Liouville rate picks up the chain
//     factor beta*(1-beta).  Near beta = 0 the expected potential difference
//     of a bridge with thin overlap varies on a scale much finer than any
//     fixed step in beta can resolve, while in gamma the same layer is
//     stretched over many steps; the gamma coordinate is therefore the
//     default.
//
// A transition terminates exactly on its target temperature: when a full
// step would cross it, the crossing step size is solved by bisection so the
// final state lands on the boundary instead of being clamped past it, which
// would inject an O(eps * dV) discontinuity into H_C.

#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "expectations.hpp"
#include "model.hpp"
#include "phase.hpp"
#include "rng.hpp"
#include "special_functions.hpp"

namespace adamc {

enum class Direction { cooling, heating };
enum class H3Mode { exact, euler };
enum class TemperatureCoordinate { beta, gamma };

struct ContactConfig {
    double epsilon = 0.01;
    H3Mode h3_mode = H3Mode::exact;
    TemperatureCoordinate coordinate = TemperatureCoordinate::gamma;
    long max_steps = 1000000;
    int stall_window = 1000;
    double stall_tol = 1e-8;
    int resample_interval = 0;  // 0 disables periodic momentum refreshes
    // terminal clamp for the gamma coordinate: beta runs in [gap, 1 - gap]
    double endpoint_gap = 1e-8;
    int record_every = 1;  // 0 disables trace records
    double divergence_threshold = 1000.0;
};

struct TraceRecord {
    long step = 0;
    double beta = 0.0;
    std::vector<double> q;
    std::vector<double> p;
    double delta_v = 0.0;
    double e_beta = 0.0;
    double logz_est = 0.0;
    double hc_residual = 0.0;
};

struct AdiabaticTrace {
    std::vector<TraceRecord> records;
    long steps = 0;
    int resamples = 0;
    int stall_warnings = 0;
};

class stall_error : public std::runtime_error {
public:
    stall_error(const std::string& msg, ContactState state, AdiabaticTrace trace)
        : std::runtime_error(msg), state_(std::move(state)), trace_(std::move(trace)) {}
    const ContactState& state() const { return state_; }
    const AdiabaticTrace& trace() const { return trace_; }

private:
    ContactState state_;
    AdiabaticTrace trace_;
};

// ---- exact sub-flows, beta coordinate ----

// H1 = T: beta' = -p'M^{-1}p, q' = M^{-1}p, p frozen
inline void flow_h1(ContactState& s, double t, const EuclideanKinetic& kin) {
    s.beta -= t * kin.quad_form(s.p);
    const auto& m = kin.mass();
    for (std::size_t i = 0; i < s.q.size(); ++i) s.q[i] += t * s.p[i] / m[i];
}

// H2 = V_B: p' = -grad V_B, everything else frozen
inline void flow_h2(ContactState& s, double t, const TargetModel& model,
                    std::vector<double>& grad_scratch) {
    model.grad_v_base(s.q, grad_scratch);
    for (std::size_t i = 0; i < s.p.size(); ++i) s.p[i] -= t * grad_scratch[i];
}

namespace detail {

// shared linear update p <- e^{ct} p + phi(ct) F with F = -beta grad dV;
// the euler variant keeps the first-order truncation exactly as written in
// the splitting's defining update rule.
inline void h3_update(std::vector<double>& p, double beta, double c, double t, H3Mode mode,
                      const std::vector<double>& grad_dv) {
    if (mode == H3Mode::euler) {
        const double tc = t * c;
        for (std::size_t i = 0; i < p.size(); ++i)
            p[i] += -t * beta * grad_dv[i] + tc * p[i];
        return;
    }
    const double ct = c * t;
    const double growth = std::exp(ct);
    // (e^{ct} - 1)/c, series near ct = 0
    const double phi = (std::fabs(ct) < 1e-6) ? t + 0.5 * c * t * t : std::expm1(ct) / c;
    for (std::size_t i = 0; i < p.size(); ++i)
        p[i] = growth * p[i] + phi * (-beta * grad_dv[i]);
}

}  // namespace detail

// H3 = beta dV + log Z(beta): q and beta frozen; p follows the linear field
// p' = -beta grad dV + (dV - E[dV]) p.  Returns (dV, e) as evaluated.
inline std::pair<double, double> flow_h3(ContactState& s, double t, const TargetModel& model,
                                         ExpectationProvider& provider, H3Mode mode,
                                         std::vector<double>& grad_scratch) {
    const double dv = model.delta_v(s.q);
    provider.note_position(s.q);
    const double e = provider.e(s.beta);
    model.grad_delta_v(s.q, grad_scratch);
    detail::h3_update(s.p, s.beta, dv - e, t, mode, grad_scratch);
    return {dv, e};
}

// ---- exact sub-flows, gamma coordinate (beta = logistic(gamma)) ----

inline void flow_h1_gamma(ContactState& s, double& gamma, double t, const EuclideanKinetic& kin) {
    gamma -= t * kin.quad_form(s.p);
    const auto& m = kin.mass();
    for (std::size_t i = 0; i < s.q.size(); ++i) s.q[i] += t * s.p[i] / m[i];
    s.beta = logistic(gamma);
}

inline std::pair<double, double> flow_h3_gamma(ContactState& s, double gamma, double t,
                                               const TargetModel& model,
                                               ExpectationProvider& provider, H3Mode mode,
                                               std::vector<double>& grad_scratch) {
    const double dv = model.delta_v(s.q);
    provider.note_position(s.q);
    const double e = provider.e(s.beta);
    model.grad_delta_v(s.q, grad_scratch);
    // beta*(1-beta) evaluated as logistic(g)*logistic(-g); both factors stay
    // accurate when beta saturates toward either end
    const double chain = logistic(gamma) * logistic(-gamma);
    detail::h3_update(s.p, s.beta, (dv - e) * chain, t, mode, grad_scratch);
    return {dv, e};
}

// ---- level-set bookkeeping ----

// lift at beta = 0, where log Z = 0 and beta * dV drops out
inline void set_h0(ContactState& s, const EuclideanKinetic& kin, const TargetModel& model) {
    if (std::fabs(s.beta) > 1e-12)
        throw std::invalid_argument("set_h0: state must sit at beta = 0");
    s.h0 = -(kin.kinetic(s.p) + model.v_base(s.q));
}

inline void lift_to_level_set(ContactState& s, const EuclideanKinetic& kin,
                              const TargetModel& model, double log_partition_value) {
    s.h0 = -(kin.kinetic(s.p) + model.v_base(s.q) + s.beta * model.delta_v(s.q) +
             log_partition_value);
}

// refresh p and absorb the kinetic jump into h0, so the contact Hamiltonian
// value (and with it the partition estimate) is unchanged
inline void resample_momentum_adiabatic(ContactState& s, const EuclideanKinetic& kin,
                                        RngStream& rng) {
    const double t_before = kin.kinetic(s.p);
    sample_momentum(kin, rng, s.p);
    s.h0 += t_before - kin.kinetic(s.p);
}

inline double log_partition_estimate(const ContactState& s, const EuclideanKinetic& kin,
                                     const TargetModel& model) {
    return -(kin.kinetic(s.p) + model.v_base(s.q) + s.beta * model.delta_v(s.q) + s.h0);
}

// ---- one integrator step ----

struct StepEval {
    double delta_v = 0.0;
    double e_beta = 0.0;
};

inline StepEval contact_step(ContactState& s, double eps, Direction dir,
                             const EuclideanKinetic& kin, const TargetModel& model,
                             ExpectationProvider& provider, H3Mode mode,
                             std::vector<double>& grad_scratch) {
    const double t = (dir == Direction::cooling) ? -eps : eps;
    flow_h1(s, 0.5 * t, kin);
    flow_h2(s, 0.5 * t, model, grad_scratch);
    const auto eval = flow_h3(s, t, model, provider, mode, grad_scratch);
    flow_h2(s, 0.5 * t, model, grad_scratch);
    flow_h1(s, 0.5 * t, kin);
    return {eval.first, eval.second};
}

inline StepEval contact_step_gamma(ContactState& s, double& gamma, double eps, Direction dir,
                                   const EuclideanKinetic& kin, const TargetModel& model,
                                   ExpectationProvider& provider, H3Mode mode,
                                   std::vector<double>& grad_scratch) {
    const double t = (dir == Direction::cooling) ? -eps : eps;
    flow_h1_gamma(s, gamma, 0.5 * t, kin);
    flow_h2(s, 0.5 * t, model, grad_scratch);
    const auto eval = flow_h3_gamma(s, gamma, t, model, provider, mode, grad_scratch);
    flow_h2(s, 0.5 * t, model, grad_scratch);
    flow_h1_gamma(s, gamma, 0.5 * t, kin);
    return {eval.first, eval.second};
}

struct TransitionResult {
    ContactState state;
    AdiabaticTrace trace;
};

namespace detail {

struct CoordinateFrame {
    // evolving coordinate value (beta itself, or gamma)
    double coord = 0.0;
    double target = 1.0;
    int sign = 1;  // +1 if the coordinate increases toward the target
};

inline bool state_finite(const ContactState& s) {
    if (!std::isfinite(s.beta) || !std::isfinite(s.h0)) return false;
    for (double v : s.q)
        if (!std::isfinite(v)) return false;
    for (double v : s.p)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace detail

// Runs integrator steps until the target temperature is reached; shared by
// cooling_transition and heating_transition.
inline TransitionResult run_temperature_transition(ContactState state, const ContactConfig& config,
                                                   const EuclideanKinetic& kin,
                                                   const TargetModel& model,
                                                   ExpectationProvider& provider, Direction dir,
                                                   RngStream* resample_rng = nullptr) {
    const char* label = (dir == Direction::cooling) ? "cooling" : "heating";
    if (config.resample_interval > 0 && resample_rng == nullptr)
        throw std::invalid_argument(std::string(label) +
                                    ": resample_interval set but no rng supplied");
    if (!(config.epsilon > 0.0))
        throw std::invalid_argument(std::string(label) + ": epsilon must be positive");

    const bool use_gamma = config.coordinate == TemperatureCoordinate::gamma;
    detail::CoordinateFrame frame;
    AdiabaticTrace trace;
    std::vector<double> grad_scratch(model.dim());

    if (dir == Direction::cooling) {
        if (std::fabs(state.beta) > 1e-12)
            throw std::invalid_argument("cooling: state must start at beta = 0");
    } else {
        if (std::fabs(state.beta - 1.0) > 1e-12)
            throw std::invalid_argument("heating: state must start at beta = 1");
    }

    auto record = [&](long step, const StepEval& eval) {
        TraceRecord rec;
        rec.step = step;
        rec.beta = state.beta;
        rec.q = state.q;
        rec.p = state.p;
        rec.delta_v = (step == 0) ? model.delta_v(state.q) : eval.delta_v;
        rec.e_beta = eval.e_beta;
        rec.logz_est = log_partition_estimate(state, kin, model);
        rec.hc_residual = provider.log_z(state.beta) - rec.logz_est;
        trace.records.push_back(std::move(rec));
    };

    if (config.record_every > 0) {
        StepEval init{model.delta_v(state.q), provider.e(state.beta)};
        record(0, init);
    }

    // move the start off the exactly-singular endpoints in gamma
    if (use_gamma) {
        const double lo = config.endpoint_gap;
        const double hi = 1.0 - config.endpoint_gap;
        double beta0 = std::min(std::max(state.beta, lo), hi);
        frame.coord = logit(beta0);
        state.beta = beta0;
        frame.target = (dir == Direction::cooling) ? logit(hi) : logit(lo);
    } else {
        frame.coord = state.beta;
        frame.target = (dir == Direction::cooling) ? 1.0 : 0.0;
    }
    frame.sign = (dir == Direction::cooling) ? 1 : -1;

    auto coord_of = [&](const ContactState& s, double gamma_val) {
        return use_gamma ? gamma_val : s.beta;
    };
    auto do_step = [&](ContactState& s, double& gamma_val, double eps) -> StepEval {
        if (use_gamma)
            return contact_step_gamma(s, gamma_val, eps, dir, kin, model, provider,
                                      config.h3_mode, grad_scratch);
        StepEval ev = contact_step(s, eps, dir, kin, model, provider, config.h3_mode,
                                   grad_scratch);
        gamma_val = s.beta;
        return ev;
    };

    long step = 0;
    double window_anchor = frame.coord;
    while (true) {
        if (step >= config.max_steps)
            throw stall_error(std::string(label) + ": max_steps exhausted before reaching the "
                              "target temperature", state, trace);

        ContactState trial = state;
        double trial_coord = frame.coord;
        StepEval eval = do_step(trial, trial_coord, config.epsilon);
        if (!detail::state_finite(trial))
            throw stall_error(std::string(label) + ": non-finite state encountered", state,
                              trace);

        const bool crossed =
            frame.sign > 0 ? (coord_of(trial, trial_coord) >= frame.target)
                           : (coord_of(trial, trial_coord) <= frame.target);
        if (crossed) {
            // bisect the final step length so the state lands on the target
            double lo = 0.0, hi = config.epsilon;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                ContactState probe = state;
                double probe_coord = frame.coord;
                eval = do_step(probe, probe_coord, mid);
                const double overshoot =
                    frame.sign * (coord_of(probe, probe_coord) - frame.target);
                if (std::fabs(overshoot) <= 1e-13 || (hi - lo) < 1e-18) {
                    trial = probe;
                    trial_coord = probe_coord;
                    break;
                }
                if (overshoot > 0.0)
                    hi = mid;
                else
                    lo = mid;
                if (it == 199) {
                    trial = probe;
                    trial_coord = probe_coord;
                }
            }
            state = trial;
            frame.coord = trial_coord;
            state.beta = (dir == Direction::cooling) ? 1.0 : 0.0;
            ++step;
            trace.steps = step;
            if (config.record_every > 0) record(step, eval);
            break;
        }

        state = trial;
        frame.coord = trial_coord;
        ++step;
        trace.steps = step;
        if (config.record_every > 0 && step % config.record_every == 0) record(step, eval);

        если_unused :;
        if (config.resample_interval > 0 && step % config.resample_interval == 0) {
            resample_momentum_adiabatic(state, kin, *resample_rng);
            ++trace.resamples;
        }

        if (step % config.stall_window == 0) {
            const double progress = frame.sign * (frame.coord - window_anchor);
            window_anchor = frame.coord;
            if (progress < config.stall_tol) {
                ++trace.stall_warnings;
                if (config.resample_interval > 0) {
                    resample_momentum_adiabatic(state, kin, *resample_rng);
                    ++trace.resamples;
                } else {
                    throw stall_error(std::string(label) +
                                      ": temperature progress stalled (metastability)",
                                      state, trace);
                }
            }
        }
    }

    return {std::move(state), std::move(trace)};
}

inline TransitionResult cooling_transition(ContactState state, const ContactConfig& config,
                                           const EuclideanKinetic& kin, const TargetModel& model,
                                           ExpectationProvider& provider,
                                           RngStream* resample_rng = nullptr) {
    return run_temperature_transition(std::move(state), config, kin, model, provider,
                                      Direction::cooling, resample_rng);
}

inline TransitionResult heating_transition(ContactState state, const ContactConfig& config,
                                           const EuclideanKinetic& kin, const TargetModel& model,
                                           ExpectationProvider& provider,
                                           RngStream* resample_rng = nullptr) {
    return run_temperature_transition(std::move(state), config, kin, model, provider,
                                      Direction::heating, resample_rng);
}

struct MetropolisResult {
    std::vector<double> q;
    bool accepted = false;
    double delta_h = 0.0;
    bool stalled = false;
    bool diverged = false;
    long steps_heating = 0;
    long steps_cooling = 0;
};

// One Markov transition targeting the beta = 1 distribution: lift with fresh
// momentum, heat to beta = 0, refresh the momentum, cool back to beta = 1,
// and accept based on the energy defect of the round trip.  The midpoint
// refresh shifts h0 by (T_before - T_after); subtracting that shift from the
// naive H_{beta=1} difference leaves exactly the contact-Hamiltonian error
// accumulated by the integrator, which vanishes for the exact flow.
inline MetropolisResult adiabatic_metropolis_transition(const std::vector<double>& q,
                                                        const ContactConfig& config,
                                                        const EuclideanKinetic& kin,
                                                        const TargetModel& model,
                                                        ExpectationProvider& provider,
                                                        RngStream& rng) {
    if (!provider.deterministic())
        throw std::invalid_argument(
            "adiabatic_metropolis_transition: requires a deterministic expectation provider");

    ContactConfig leg = config;
    leg.record_every = 0;

    MetropolisResult result;
    result.q = q;

    ContactState s;
    s.q = q;
    s.p = sample_momentum(kin, rng);
    s.beta = 1.0;
    lift_to_level_set(s, kin, model, provider.log_z(1.0));
    const double h0_lift = s.h0;
    const double h_initial = kin.kinetic(s.p) + model.v_base(s.q) + model.delta_v(s.q);

    try {
        TransitionResult heated = run_temperature_transition(std::move(s), leg, kin, model,
                                                             provider, Direction::heating);
        result.steps_heating = heated.trace.steps;
        ContactState mid = std::move(heated.state);
        resample_momentum_adiabatic(mid, kin, rng);
        TransitionResult cooled = run_temperature_transition(std::move(mid), leg, kin, model,
                                                             provider, Direction::cooling);
        result.steps_cooling = cooled.trace.steps;

        const ContactState& f = cooled.state;
        const double h_final = kin.kinetic(f.p) + model.v_base(f.q) + model.delta_v(f.q);
        const double h0_shift = f.h0 - h0_lift;  // kinetic jump of the midpoint refresh
        result.delta_h = (h_final + h0_shift) - h_initial;

        if (!std::isfinite(result.delta_h) ||
            std::fabs(result.delta_h) > config.divergence_threshold) {
            result.diverged = true;
            return result;
        }
        if (result.delta_h <= 0.0 || rng.uniform() < std::exp(-result.delta_h)) {
            result.accepted = true;
            result.q = f.q;
        }
        return result;
    } catch (const stall_error&) {
        result.stalled = true;
        return result;
    }
}

}  // namespace adamc

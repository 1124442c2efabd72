#pragma once

// Extended phase space for temperature dynamics: position q, momentum p,
// inverse temperature beta, and the energy offset h0 that pins the flow to
// the zero level set of the contact Hamiltonian
//
//     H_C = T(p) + V_B(q) + beta * dV(q) + log Z(beta) + h0.
//
// h0 is fixed when the state is lifted at beta = 0 and adjusted on momentum
// resamplings; -(T + V_B + beta*dV + h0) then estimates log Z(beta) at every
// point of the trajectory.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "model.hpp"
#include "rng.hpp"

namespace adamc {

// Euclidean kinetic energy with a diagonal mass matrix:
// T(p) = p' M^{-1} p / 2 + log|M| / 2.  The determinant term is constant in
// p but participates in the h0 bookkeeping, so it is kept.
class EuclideanKinetic {
public:
    explicit EuclideanKinetic(std::size_t dim) : mass_(dim, 1.0), half_log_det_(0.0) {}

    explicit EuclideanKinetic(std::vector<double> mass) : mass_(std::move(mass)) {
        half_log_det_ = 0.0;
        for (double m : mass_) {
            if (!(m > 0.0))
                throw std::domain_error("EuclideanKinetic: mass entries must be positive");
            half_log_det_ += 0.5 * std::log(m);
        }
    }

    std::size_t dim() const { return mass_.size(); }
    const std::vector<double>& mass() const { return mass_; }

    // p' M^{-1} p
    double quad_form(const std::vector<double>& p) const {
        double s = 0.0;
        for (std::size_t i = 0; i < mass_.size(); ++i) s += p[i] * p[i] / mass_[i];
        return s;
    }

    double kinetic(const std::vector<double>& p) const {
        return 0.5 * quad_form(p) + half_log_det_;
    }

    // dT/dp = M^{-1} p
    void grad(const std::vector<double>& p, std::vector<double>& out) const {
        for (std::size_t i = 0; i < mass_.size(); ++i) out[i] = p[i] / mass_[i];
    }

private:
    std::vector<double> mass_;
    double half_log_det_;
};

struct ContactState {
    std::vector<double> q;
    std::vector<double> p;
    double beta = 0.0;
    double h0 = 0.0;
};

inline void sample_momentum(const EuclideanKinetic& kin, RngStream& rng, std::vector<double>& p) {
    p.resize(kin.dim());
    for (std::size_t i = 0; i < kin.dim(); ++i) p[i] = rng.normal(std::sqrt(kin.mass()[i]));
}

inline std::vector<double> sample_momentum(const EuclideanKinetic& kin, RngStream& rng) {
    std::vector<double> p;
    sample_momentum(kin, rng, p);
    return p;
}

// Value of the contact Hamiltonian; zero up to integrator error once the
// state has been lifted onto the level set.
inline double contact_hamiltonian(const ContactState& state, const EuclideanKinetic& kin,
                                  const TargetModel& model,
                                  const std::function<double(double)>& log_partition_source) {
    return kin.kinetic(state.p) + model.v_base(state.q) +
           state.beta * model.delta_v(state.q) + log_partition_source(state.beta) + state.h0;
}

}  // namespace adamc

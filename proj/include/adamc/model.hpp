#pragma once

// Target models.  A model supplies the base potential V_B and the bridging
// potential difference dV on an unconstrained coordinate; the interpolated
// potential at inverse temperature beta is V_B + beta * dV.
//
// BetaBinomialModel is the analytic benchmark: a Beta(a, b) base bridged to
// a Beta posterior by a binomial likelihood with k successes out of n.  All
// thermodynamic quantities (partition function, expectations, neighbour KL)
// have closed forms, so it doubles as an oracle for the estimated pipelines.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "rng.hpp"
#include "special_functions.hpp"

namespace adamc {

class TargetModel {
public:
    virtual ~TargetModel() = default;
    virtual std::size_t dim() const = 0;
    virtual double v_base(const std::vector<double>& x) const = 0;
    virtual void grad_v_base(const std::vector<double>& x, std::vector<double>& out) const = 0;
    virtual double delta_v(const std::vector<double>& x) const = 0;
    virtual void grad_delta_v(const std::vector<double>& x, std::vector<double>& out) const = 0;
};

class BetaBinomialModel final : public TargetModel {
public:
    BetaBinomialModel(double a = 9.0, double b = 0.75, double k = 115.0, double n = 550.0)
        : a_(a), b_(b), k_(k), n_(n) {
        if (!(a > 0.0) || !(b > 0.0))
            throw std::domain_error("BetaBinomialModel: a and b must be positive");
        if (!(k >= 0.0) || !(n >= k))
            throw std::domain_error("BetaBinomialModel: need 0 <= k <= n");
        log_choose_ = lgamma_pos(n + 1.0) - lgamma_pos(k + 1.0) - lgamma_pos(n - k + 1.0);
        log_beta_ab_ = log_beta(a, b);
    }

    double a() const { return a_; }
    double b() const { return b_; }
    double k() const { return k_; }
    double n() const { return n_; }
    double log_choose() const { return log_choose_; }

    std::size_t dim() const override { return 1; }

    // The unconstrained coordinate is x = logit(q).  The Jacobian q(1-q) of
    // the transform is absorbed here, so exp(-v_base) is the base density in
    // x and integrates to one.
    double v_base(const std::vector<double>& x) const override {
        return log_beta_ab_ + a_ * softplus(-x[0]) + b_ * softplus(x[0]);
    }

    void grad_v_base(const std::vector<double>& x, std::vector<double>& out) const override {
        out[0] = b_ * logistic(x[0]) - a_ * logistic(-x[0]);
    }

    // Negative binomial log likelihood, normalization included so that
    // exp(-log_partition(beta)) matches the bridged densities exactly.
    double delta_v(const std::vector<double>& x) const override {
        return -log_choose_ + k_ * softplus(-x[0]) + (n_ - k_) * softplus(x[0]);
    }

    void grad_delta_v(const std::vector<double>& x, std::vector<double>& out) const override {
        out[0] = (n_ - k_) * logistic(x[0]) - k_ * logistic(-x[0]);
    }

    // log Z(beta) with Z(0) = 1; the intermediate density at beta is
    // Beta(beta*k + a, beta*(n-k) + b) in q.
    double log_partition(double beta) const {
        check_beta(beta);
        return beta * log_choose_ + log_beta(beta * k_ + a_, beta * (n_ - k_) + b_) - log_beta_ab_;
    }

    double dlogz_dbeta(double beta) const {
        check_beta(beta);
        return log_choose_ + k_ * digamma(beta * k_ + a_) +
               (n_ - k_) * digamma(beta * (n_ - k_) + b_) -
               n_ * digamma(beta * n_ + a_ + b_);
    }

    // E_{pi_beta}[dV] = -d logZ / d beta
    double expected_delta_v(double beta) const { return -dlogz_dbeta(beta); }

    // KL(pi_beta || pi_beta2) in closed form
    double kl_neighbor(double beta, double beta2) const {
        check_beta(beta);
        check_beta(beta2);
        return (beta2 - beta) * expected_delta_v(beta) + log_partition(beta2) - log_partition(beta);
    }

    // CDF of the intermediate distribution at beta, evaluated at coordinate x
    double intermediate_cdf(double beta, double x) const {
        check_beta(beta);
        return reg_inc_beta(logistic(x), beta * k_ + a_, beta * (n_ - k_) + b_);
    }

    // Exact draw from the intermediate distribution, returned in the
    // unconstrained coordinate.  Uses the gamma-ratio construction, which
    // stays finite even when q saturates toward 0 or 1.
    double sample_intermediate(double beta, RngStream& rng) const {
        check_beta(beta);
        const double g1 = rng.gamma(beta * k_ + a_);
        const double g2 = rng.gamma(beta * (n_ - k_) + b_);
        return std::log(g1) - std::log(g2);
    }

private:
    static void check_beta(double beta) {
        if (!(beta >= 0.0) || !(beta <= 1.0))
            throw std::domain_error("BetaBinomialModel: beta outside [0, 1]");
    }

    double a_, b_, k_, n_;
    double log_choose_;
    double log_beta_ab_;
};

}  // namespace adamc

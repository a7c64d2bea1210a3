#pragma once

#include "ucahar/types.hpp"

#include <cmath>

namespace ucahar {

struct OptimizerConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
};

// Rectified Adam. While the variance estimate is too short-lived to be
// trusted (rho_t <= 5) the step uses the bias-corrected first moment only;
// afterwards the adaptive step is scaled by the rectification term r_t.
template <typename Scalar>
class RAdam {
 public:
  RAdam(Index size, OptimizerConfig config)
      : config_(config), m_(Vector<Scalar>::Zero(size)), v_(Vector<Scalar>::Zero(size)) {
    require(config.learning_rate >= 0.0, "learning rate must be nonnegative");
    require(config.beta1 >= 0.0 && config.beta1 < 1.0 && config.beta2 >= 0.0 && config.beta2 < 1.0,
            "moment decay rates must lie in [0, 1)");
  }

  void step(Vector<Scalar>& params, const Vector<Scalar>& grad) {
    require(params.size() == m_.size() && grad.size() == m_.size(), "optimizer size mismatch");
    ++t_;
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    Vector<Scalar> g = grad;
    if (config_.weight_decay != 0.0) g += static_cast<Scalar>(config_.weight_decay) * params;
    m_ = static_cast<Scalar>(b1) * m_ + static_cast<Scalar>(1.0 - b1) * g;
    v_ = static_cast<Scalar>(b2) * v_ + static_cast<Scalar>(1.0 - b2) * g.cwiseAbs2();

    const double b1t = std::pow(b1, static_cast<double>(t_));
    const double b2t = std::pow(b2, static_cast<double>(t_));
    const double rho_inf = 2.0 / (1.0 - b2) - 1.0;
    const double rho_t = rho_inf - 2.0 * static_cast<double>(t_) * b2t / (1.0 - b2t);
    const double lr = config_.learning_rate;
    const auto m_hat = (m_ / static_cast<Scalar>(1.0 - b1t)).array();

    if (rho_t > 5.0) {
      const double rect = std::sqrt((rho_t - 4.0) * (rho_t - 2.0) * rho_inf /
                                    ((rho_inf - 4.0) * (rho_inf - 2.0) * rho_t));
      const auto v_hat = (v_ / static_cast<Scalar>(1.0 - b2t)).array().sqrt();
      params.array() -= static_cast<Scalar>(lr * rect) * m_hat /
                        (v_hat + static_cast<Scalar>(config_.epsilon));
    } else {
      params.array() -= static_cast<Scalar>(lr) * m_hat;
    }
  }

  long steps() const { return t_; }

 private:
  OptimizerConfig config_;
  Vector<Scalar> m_;
  Vector<Scalar> v_;
  long t_ = 0;
};

}  // namespace ucahar

#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "omas/graphon.hpp"

namespace omas {

using AgentStates = Eigen::VectorXd;

/// V(x) = (1/n)‖x‖² - x̄², evaluated in the centered form so it is never negative.
double disagreement(const AgentStates& x);

/// Exact flow x ↦ exp(-L t) x for a fixed topology. The Laplacian is
/// diagonalized once; every propagate() call reuses it.
class Propagator {
 public:
  explicit Propagator(const SimpleGraph& g);
  explicit Propagator(const Eigen::MatrixXd& laplacian);

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues_.size()); }
  /// λ₂ of L (unnormalized); 0 for a single vertex.
  double lambda2() const { return eigenvalues_.size() > 1 ? eigenvalues_(1) : 0.0; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

  AgentStates propagate(const AgentStates& x, double dt) const;

 private:
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
};

AgentStates propagate(const AgentStates& x, const SimpleGraph& g, double dt);

}  // namespace omas

#include "omas/consensus.hpp"

#include <cmath>
#include <sstream>

#include "omas/errors.hpp"

namespace omas {

double disagreement(const AgentStates& x) {
  if (x.size() == 0) throw DomainError("disagreement: empty state vector");
  const double mean = x.mean();
  return (x.array() - mean).square().mean();
}

Propagator::Propagator(const SimpleGraph& g) : Propagator(g.laplacian()) {}

Propagator::Propagator(const Eigen::MatrixXd& laplacian) {
  if (laplacian.rows() != laplacian.cols()) throw ContractViolation("Propagator: Laplacian must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
  if (solver.info() != Eigen::Success) throw std::runtime_error("Propagator: eigensolver failed");
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
}

AgentStates Propagator::propagate(const AgentStates& x, double dt) const {
  if (static_cast<std::size_t>(x.size()) != size()) {
    std::ostringstream os;
    os << "propagate: state has " << x.size() << " entries, topology has " << size() << " vertices";
    throw ContractViolation(os.str());
  }
  if (!(dt >= 0.0)) throw DomainError("propagate: dt must be nonnegative");
  if (dt == 0.0) return x;
  const Eigen::VectorXd modes = eigenvectors_.transpose() * x;
  const Eigen::VectorXd decay = (-dt * eigenvalues_.array()).exp();
  AgentStates out = eigenvectors_ * (decay.array() * modes.array()).matrix();
  // The consensus mode has eigenvalue 0 up to roundoff; pin the mean exactly.
  out.array() += x.mean() - out.mean();
  return out;
}

AgentStates propagate(const AgentStates& x, const SimpleGraph& g, double dt) {
  if (static_cast<std::size_t>(x.size()) != g.size()) {
    std::ostringstream os;
    os << "propagate: state has " << x.size() << " entries, graph has " << g.size() << " vertices";
    throw ContractViolation(os.str());
  }
  return Propagator(g).propagate(x, dt);
}

}  // namespace omas

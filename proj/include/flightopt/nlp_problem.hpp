// Abstract equality-constrained, box-bounded NLP:
//   minimize f(z)  subject to  c(z) = 0,  lb <= z <= ub.
#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace flightopt {

class NlpProblem {
  public:
    virtual ~NlpProblem() = default;

    virtual int num_vars() const = 0;
    virtual int num_constraints() const = 0;

    /// Componentwise bounds; +/-infinity marks an unbounded side.
    virtual Eigen::VectorXd lower_bounds() const = 0;
    virtual Eigen::VectorXd upper_bounds() const = 0;

    virtual double objective(const Eigen::VectorXd& z) const = 0;
    virtual Eigen::VectorXd objective_gradient(const Eigen::VectorXd& z) const = 0;
    virtual Eigen::VectorXd constraints(const Eigen::VectorXd& z) const = 0;
    virtual Eigen::SparseMatrix<double> constraint_jacobian(const Eigen::VectorXd& z) const = 0;

    /// Characteristic magnitudes used to condition the solve. Defaults to ones.
    virtual Eigen::VectorXd variable_scales() const {
        return Eigen::VectorXd::Ones(num_vars());
    }
    virtual Eigen::VectorXd constraint_scales() const {
        return Eigen::VectorXd::Ones(num_constraints());
    }
};

}  // namespace flightopt

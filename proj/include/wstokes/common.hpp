#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>

namespace wstokes {

using Point = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A point query fell outside the meshed domain.
class NotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotImplemented : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A weight or stress was evaluated on its singular set without regularization.
class SingularEvaluation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iterative process stopped without meeting its tolerance.
class ConvergenceError : public SolverError {
public:
    using SolverError::SolverError;
};

inline Mat3 symmetric_part(const Mat3& q) { return 0.5 * (q + q.transpose()); }

inline double frobenius(const Mat3& q) { return q.norm(); }

}  // namespace wstokes

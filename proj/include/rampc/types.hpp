#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace rampc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Dimension or precondition violated by the caller.
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed configuration or input file.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dual metric not positive definite, or factorization failed.
class CCMDomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, int step) : std::runtime_error(what), step_(step) {}
    int step() const { return step_; }

private:
    int step_;
};

class EstimationInconsistent : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnboundedPolytope : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Unsupported : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RigidTubeInfeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ReferenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what)
{
    if (!cond) throw ContractViolation(what);
}

inline void require_size(Eigen::Index actual, Eigen::Index expected, const char* name)
{
    if (actual != expected)
        throw ContractViolation(std::string(name) + ": expected dimension " + std::to_string(expected) +
                                ", got " + std::to_string(actual));
}

} // namespace rampc

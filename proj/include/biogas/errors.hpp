#pragma once

#include <stdexcept>
#include <string>

namespace biogas {

/// Bad or inconsistent experiment configuration (CLI exit code 2).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Control value outside [0, u_max], or a law applied outside its domain.
class control_error : public std::runtime_error {
public:
    explicit control_error(const std::string& what) : std::runtime_error(what) {}
};

/// The controllability condition fails: a requested feedback is not
/// admissible from the given initial condition (CLI exit code 3).
class admissibility_error : public std::runtime_error {
public:
    explicit admissibility_error(const std::string& what) : std::runtime_error(what) {}
};

/// A standing structural assumption (crowding monotonicity, unimodality
/// of the flow map) was found violated at runtime.
class assumption_violation : public std::runtime_error {
public:
    explicit assumption_violation(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: integration breakdown, optimizer non-convergence,
/// or a consistency check outside tolerance (CLI exit code 4).
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

/// Enumeration budget exceeded in the exhaustive schedule search.
class budget_error : public std::runtime_error {
public:
    explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace biogas

#pragma once

#include <stdexcept>
#include <string>

namespace partpose {

/// Malformed inputs: files, flags, dimensions, out-of-range arguments.
class InputError : public std::runtime_error {
public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative solver failed to make progress (divergence, failed root find).
class SolverError : public std::runtime_error {
public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical kernel (eigensolver, factorization) reported failure.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace partpose

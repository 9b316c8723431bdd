#pragma once

#include <stdexcept>
#include <string>

namespace qou {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the state space or parameter range.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A rejection sampler accepted too rarely, which means its envelope is wrong.
class SamplerStall : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature or root finding ran out of budget.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

}  // namespace qou

// Copyright Contributors to the edgesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace edgesplat {

/// A caller broke a documented precondition (bad argument, wrong arity,
/// mismatched dimensions). Maps to CLI exit code 2.
class ContractViolation : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// The sketch/pool graph is inconsistent, e.g. a sketch indexes a dead point.
class StructuralError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// NaN/Inf in gradients or another unrecoverable numeric failure.
/// Maps to CLI exit code 3.
class NumericalAbort : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// File could not be read, written or parsed.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string &what) {
    if (!cond) {
        throw ContractViolation(what);
    }
}

} // namespace edgesplat

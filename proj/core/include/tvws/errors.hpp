#pragma once

#include <stdexcept>
#include <string>

namespace tvws {

/// A violated operation precondition (caller bug, not an environmental failure).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The problem size exceeds what the requested mode can handle
/// (e.g. exact state enumeration past the user-count cap).
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tvws

#pragma once

#include <stdexcept>
#include <string>

namespace eps {

// Base class for everything this library throws on contract violations.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A position does not exist in the formula, or a replacement's syntactic
// category (formula vs term) does not match the node it replaces.
struct PositionError : Error {
    using Error::Error;
};

// Argument count disagrees with a declared or inferred arity.
struct ArityError : Error {
    using Error::Error;
};

}  // namespace eps

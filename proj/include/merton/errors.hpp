#pragma once

#include <stdexcept>
#include <string>

namespace merton {

// Bad input: parameter out of range, malformed request.
class validation_error : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

// A weight >= 1 somewhere a default can happen: wealth would hit zero.
class inadmissible_error : public validation_error {
   public:
    using validation_error::validation_error;
};

// Root bracketing, ODE integration or another numerical step gave up.
class solver_error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

class io_error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

}  // namespace merton

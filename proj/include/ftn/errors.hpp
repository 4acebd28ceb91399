#pragma once

#include <stdexcept>
#include <string>

namespace ftn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad argument or violated precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Folded spectrum has (numerical) nulls and no regularizer was supplied.
class NullSpectrum : public Error {
public:
    using Error::Error;
};

/// Trellis would need more states than the configured budget.
class StateExplosion : public Error {
public:
    using Error::Error;
};

/// Every subchannel is null; water-filling has nothing to fill.
class AllNull : public Error {
public:
    using Error::Error;
};

class CpTooShort : public Error {
public:
    using Error::Error;
};

class IllConditioned : public Error {
public:
    using Error::Error;
};

} // namespace ftn

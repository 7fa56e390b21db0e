#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace conefield {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidFactor : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& what);

    std::size_t offset() const { return offset_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

class ArityError : public Error {
public:
    using Error::Error;
};

class EvalError : public Error {
public:
    using Error::Error;
};

// The sampled cone is not strictly inside an open half-space.
class BorderlineRegular : public Error {
public:
    using Error::Error;
};

// Raised by the step construction when the level is not separable by a
// trapping domain at the current enlargement.
class NotStrict : public Error {
public:
    using Error::Error;
};

class NoStrictBin : public Error {
public:
    NoStrictBin(long slab, const std::string& what) : Error(what), slab_(slab) {}
    long slab() const { return slab_; }

private:
    long slab_;
};

class NotCausal : public Error {
public:
    using Error::Error;
};

class SceneError : public Error {
public:
    using Error::Error;
};

class UnknownField : public Error {
public:
    using Error::Error;
};

class OutOfWindow : public Error {
public:
    using Error::Error;
};

}  // namespace conefield

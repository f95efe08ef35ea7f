#pragma once

#include <stdexcept>
#include <string>

namespace kinlab {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside an operation's documented domain.
class domain_error : public error {
public:
    using error::error;
};

/// Two fields (or trajectories) that must share a grid do not.
class resolution_mismatch : public error {
public:
    using error::error;
};

class cfl_violation : public error {
public:
    using error::error;
};

/// Non-finite state or a state that left the validated probe box.
class blow_up : public error {
public:
    using error::error;
};

class quadrature_error : public error {
public:
    using error::error;
};

/// Picard iteration failed to contract; carries the measured residual ratio.
class non_contraction : public error {
public:
    non_contraction(const std::string& what, double ratio) : error(what), ratio_(ratio) {}
    double ratio() const noexcept { return ratio_; }

private:
    double ratio_;
};

class config_error : public error {
public:
    config_error(const std::string& what, int line = 0) : error(what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

} // namespace kinlab

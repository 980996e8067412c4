#pragma once

#include <stdexcept>
#include <string>

namespace nlo {

// Quadrature / bisection / optimizer failed to converge, bracket exhausted, overflow.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Bad or incomplete experiment configuration (schema violations map to exit code 2).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// A declared growth/kernel/structure envelope does not hold at a checked sample.
class structure_error : public std::runtime_error {
public:
    explicit structure_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace nlo

#pragma once

#include <memory>
#include <string>

#include "nlo/grid.hpp"

namespace nlo {

// Arithmetic over the node coordinates, parsed from config files.  The
// grammar is deliberately closed: numeric literals, x, y, + - * /, ^
// (right-associative), unary minus, parentheses, and the calls abs(e),
// min(e, e, ...), max(e, e, ...).  Nothing else evaluates, so configs stay
// data.  Parse problems throw config_error naming the offending position.
class Expression {
public:
    struct Node; // parse tree; opaque outside the parser

    double operator()(const Point& p) const;
    const std::string& source() const { return source_; }

private:
    friend Expression parse_expression(const std::string&);
    std::string source_;
    std::shared_ptr<const Node> root_;
};

Expression parse_expression(const std::string& text);

} // namespace nlo

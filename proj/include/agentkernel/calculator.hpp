#pragma once

#include <string>
#include <string_view>

namespace agentkernel {

/// Evaluate an arithmetic expression: + - * / % ^, parentheses, unary sign, decimals and
/// sqrt(). Throws ValidationError on malformed input or division by zero.
double evaluate_expression(std::string_view expr);

/// Integral values print without a fractional part ("24"); others use up to 12 significant digits.
std::string format_number(double value);

} // namespace agentkernel

#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace nlmc {

// Compiled kernel expression over scalar x, y in [0,1].
//
// Grammar:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'x' | 'y' | 'dist' | 'pi'
//            | func '(' expr (',' expr)* ')' | '(' expr ')' | '|' expr '|'
//   func    := abs sin cos exp log sqrt min max step
//
// `dist` is |x - y|; step(t) is 1 for t >= 0 and 0 otherwise.
using KernelExpression = std::function<double(double x, double y)>;

// Throws ConfigError naming the offending position on malformed input.
KernelExpression compile_kernel_expression(std::string_view source);

}  // namespace nlmc

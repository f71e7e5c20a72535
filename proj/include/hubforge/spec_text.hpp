#pragma once

#include <string>
#include <string_view>

#include "hubforge/attachment.hpp"

namespace hubforge {

/// Text form of an attachment rule, as accepted by `--spec` and config files:
///
///   constant:c=1
///   linear:a=1,b=1
///   power:p=2,c=1
///   table:values=1;2;4,tail=repeat-last        (tail: repeat-last | linear-extrapolate | error)
///   expr:f=(k==1 || k%2==0) ? (k+1)^2 : k^2-1
///   random:values=1;3,probs=0.5;0.5,base=(linear:a=1,b=1)
///   parity-example                              (built-in non-monotone superlinear rule)
///
/// Any kind also accepts declarations:
///   lower=power(C;P) | lower=linear(A;B)   f(k) >= envelope for all k
///   upper=power(C;P) | upper=linear(A;B)   f(k) <= envelope for all k
///   kappa=K                                declared global bound for max_{i<=n} f(i)/(i+1) <= K f(n)/(n+1)
///
/// Parameters are comma separated; commas inside parentheses do not split.
/// Throws Error(Config) naming the offending field.
AttachmentSpec parse_spec(std::string_view text);

/// Canonical text form; parse_spec(format_spec(s)) reproduces s.
std::string format_spec(const AttachmentSpec& spec);

/// Decimal formatting used by every CSV/JSON writer: "%.12g", C locale.
std::string format_real(double v);

}  // namespace hubforge

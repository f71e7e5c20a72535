#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace hubforge {

namespace detail {
struct ExprNode;
}

/// Compiled arithmetic formula in the single variable `k`.
///
/// Grammar (C-like precedence, `^` is right-associative power):
///   expr    := or ('?' expr ':' expr)?
///   or      := and ('||' and)*
///   and     := cmp ('&&' cmp)*
///   cmp     := sum (('=='|'!='|'<'|'<='|'>'|'>=') sum)?
///   sum     := product (('+'|'-') product)*
///   product := unary (('*'|'/'|'%') unary)*
///   unary   := ('-'|'!') unary | power
///   power   := atom ('^' unary)?
///   atom    := number | 'k' | 'pi' | 'e' | name '(' expr (',' expr)* ')' | '(' expr ')'
/// Functions: log exp sqrt abs floor ceil min max pow.
/// Comparisons and logical operators yield 1 or 0.
class Expression {
 public:
  /// Throws Error(Config) with the column of the first offending character.
  static Expression parse(std::string_view source);

  double operator()(double k) const;
  const std::string& source() const { return source_; }

 private:
  Expression(std::string source, std::shared_ptr<const detail::ExprNode> root)
      : source_(std::move(source)), root_(std::move(root)) {}

  std::string source_;
  std::shared_ptr<const detail::ExprNode> root_;
};

}  // namespace hubforge

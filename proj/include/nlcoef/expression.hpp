#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nlcoef/error.hpp"

namespace nlcoef {

/// Arithmetic expression over a fixed list of named variables, compiled to
/// a postfix program.
///
///   expr  := term (('+' | '-') term)*
///   term  := unary (('*' | '/') unary)*
///   unary := ('+' | '-') unary | power
///   power := primary ('^' unary)?
///   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
///
/// Functions: sin cos tan exp log sqrt abs tanh (one argument), min max
/// pow (two). Constant: pi.
class Expression {
public:
  Expression() = default;

  static Expression parse(std::string_view source, std::vector<std::string> variables) {
    Expression e;
    e.source_ = std::string(source);
    e.variables_ = std::move(variables);
    Parser p{source, e};
    p.skip();
    p.expr();
    p.skip();
    if (p.pos < source.size()) p.fail("unexpected '" + std::string(1, source[p.pos]) + "'");
    e.check_depth();
    return e;
  }

  double operator()(std::span<const double> values) const {
    require(values.size() == variables_.size(), ErrorCode::InvalidArgument,
            "Expression: expected " + std::to_string(variables_.size()) + " values");
    std::array<double, kMaxDepth> st;
    std::size_t sp = 0;
    for (const Op& op : code_) {
      switch (op.code) {
        case Code::Const: st[sp++] = op.value; break;
        case Code::Var: st[sp++] = values[op.index]; break;
        case Code::Neg: st[sp - 1] = -st[sp - 1]; break;
        case Code::Add: --sp; st[sp - 1] += st[sp]; break;
        case Code::Sub: --sp; st[sp - 1] -= st[sp]; break;
        case Code::Mul: --sp; st[sp - 1] *= st[sp]; break;
        case Code::Div: --sp; st[sp - 1] /= st[sp]; break;
        case Code::Pow: --sp; st[sp - 1] = std::pow(st[sp - 1], st[sp]); break;
        case Code::Min: --sp; st[sp - 1] = std::min(st[sp - 1], st[sp]); break;
        case Code::Max: --sp; st[sp - 1] = std::max(st[sp - 1], st[sp]); break;
        case Code::Sin: st[sp - 1] = std::sin(st[sp - 1]); break;
        case Code::Cos: st[sp - 1] = std::cos(st[sp - 1]); break;
        case Code::Tan: st[sp - 1] = std::tan(st[sp - 1]); break;
        case Code::Exp: st[sp - 1] = std::exp(st[sp - 1]); break;
        case Code::Log: st[sp - 1] = std::log(st[sp - 1]); break;
        case Code::Sqrt: st[sp - 1] = std::sqrt(st[sp - 1]); break;
        case Code::Abs: st[sp - 1] = std::abs(st[sp - 1]); break;
        case Code::Tanh: st[sp - 1] = std::tanh(st[sp - 1]); break;
      }
    }
    return st[0];
  }

  double operator()(std::initializer_list<double> values) const {
    return (*this)(std::span<const double>(values.begin(), values.size()));
  }

  const std::string& source() const { return source_; }
  const std::vector<std::string>& variables() const { return variables_; }
  bool empty() const { return code_.empty(); }
  /// True if the expression does not reference `name`.
  bool independent_of(std::string_view name) const {
    for (std::size_t i = 0; i < variables_.size(); ++i)
      if (variables_[i] == name)
        for (const Op& op : code_)
          if (op.code == Code::Var && op.index == i) return false;
    return true;
  }

private:
  static constexpr std::size_t kMaxDepth = 64;

  enum class Code { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Min, Max, Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Tanh };
  struct Op {
    Code code;
    double value = 0.0;
    std::size_t index = 0;
  };

  struct Parser {
    std::string_view s;
    Expression& out;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
      throw Error(ErrorCode::ParseError, "column " + std::to_string(at + 1) + ": " + msg + " in '" + std::string(s) + "'");
    }
    [[noreturn]] void fail(const std::string& msg) const { fail(msg, pos); }

    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool accept(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    void expect(char c) {
      if (!accept(c)) fail(pos < s.size() ? "expected '" + std::string(1, c) + "'" : "unexpected end of input, expected '" + std::string(1, c) + "'");
    }
    void emit(Code c) { out.code_.push_back({c}); }

    void expr() {
      term();
      for (;;) {
        if (accept('+')) {
          term();
          emit(Code::Add);
        } else if (accept('-')) {
          term();
          emit(Code::Sub);
        } else {
          return;
        }
      }
    }
    void term() {
      unary();
      for (;;) {
        if (accept('*')) {
          unary();
          emit(Code::Mul);
        } else if (accept('/')) {
          unary();
          emit(Code::Div);
        } else {
          return;
        }
      }
    }
    void unary() {
      if (accept('-')) {
        unary();
        emit(Code::Neg);
      } else if (accept('+')) {
        unary();
      } else {
        power();
      }
    }
    void power() {
      primary();
      if (accept('^')) {
        unary();
        emit(Code::Pow);
      }
    }
    void primary() {
      skip();
      if (pos >= s.size()) fail("unexpected end of input");
      const char c = s[pos];
      if (accept('(')) {
        expr();
        expect(')');
        return;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        number();
        return;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        name();
        return;
      }
      fail("unexpected '" + std::string(1, c) + "'");
    }
    void number() {
      double v = 0.0;
      const auto [end, ec] = std::from_chars(s.data() + pos, s.data() + s.size(), v);
      if (ec != std::errc()) fail("malformed number");
      pos = static_cast<std::size_t>(end - s.data());
      out.code_.push_back({Code::Const, v});
    }
    void name() {
      const std::size_t start = pos;
      while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
      const std::string id(s.substr(start, pos - start));
      skip();
      if (pos < s.size() && s[pos] == '(') {
        call(id, start);
        return;
      }
      for (std::size_t i = 0; i < out.variables_.size(); ++i)
        if (out.variables_[i] == id) {
          out.code_.push_back({Code::Var, 0.0, i});
          return;
        }
      if (id == "pi") {
        out.code_.push_back({Code::Const, std::numbers::pi});
        return;
      }
      std::string allowed;
      for (const auto& v : out.variables_) allowed += (allowed.empty() ? "" : ", ") + v;
      throw Error(ErrorCode::UndefinedVariable, "column " + std::to_string(start + 1) + ": unknown name '" + id +
                                                    "' in '" + std::string(s) + "' (allowed: " +
                                                    (allowed.empty() ? "none" : allowed) + ")");
    }
    void call(const std::string& fn, std::size_t at) {
      struct Entry {
        const char* name;
        Code code;
        int arity;
      };
      static constexpr Entry table[] = {
          {"sin", Code::Sin, 1},   {"cos", Code::Cos, 1},   {"tan", Code::Tan, 1}, {"exp", Code::Exp, 1},
          {"log", Code::Log, 1},   {"sqrt", Code::Sqrt, 1}, {"abs", Code::Abs, 1}, {"tanh", Code::Tanh, 1},
          {"min", Code::Min, 2},   {"max", Code::Max, 2},   {"pow", Code::Pow, 2},
      };
      const Entry* e = nullptr;
      for (const auto& t : table)
        if (fn == t.name) e = &t;
      if (!e) fail("unknown function '" + fn + "'", at);
      expect('(');
      int n = 0;
      if (!accept(')')) {
        do {
          expr();
          ++n;
        } while (accept(','));
        expect(')');
      }
      if (n != e->arity)
        fail("'" + fn + "' takes " + std::to_string(e->arity) + " argument(s), got " + std::to_string(n), at);
      emit(e->code);
    }
  };

  void check_depth() const {
    std::size_t depth = 0, peak = 0;
    for (const Op& op : code_) {
      switch (op.code) {
        case Code::Const:
        case Code::Var: ++depth; break;
        case Code::Add:
        case Code::Sub:
        case Code::Mul:
        case Code::Div:
        case Code::Pow:
        case Code::Min:
        case Code::Max: --depth; break;
        default: break;
      }
      peak = std::max(peak, depth);
    }
    require(peak <= kMaxDepth, ErrorCode::ParseError, "expression nests deeper than " + std::to_string(kMaxDepth));
  }

  std::string source_;
  std::vector<std::string> variables_;
  std::vector<Op> code_;
};

}  // namespace nlcoef

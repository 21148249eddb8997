#include "tutor/codec/expression_parser.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <optional>
#include <vector>

#include "tutor/model/analysis.hpp"

namespace tutor::codec {

using model::Expr;
using model::ExprKind;

namespace {

enum class Tok { End, Int, Float, Char, String, Ident, Punct };

struct Token {
  Tok kind = Tok::End;
  std::string text;  // punctuation spelling, identifier, or decoded literal
  std::int64_t int_value = 0;
  double float_value = 0.0;
  std::size_t offset = 0;
};

constexpr std::string_view kTwoCharPuncts[] = {
    "&&", "||", "<=", ">=", "==", "!=", "+=", "-=", "*=", "/=", "%=", "++", "--", "->",
};

constexpr std::string_view kOneCharPuncts = "+-*/%()[],.!<>=&";

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (pos_ >= src_.size()) {
        out.push_back(Token{Tok::End, "", 0, 0.0, pos_});
        return out;
      }
      out.push_back(next());
    }
  }

 private:
  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ExpressionSyntaxError(pos_, msg); }

  char decode_escape() {
    // pos_ is on the backslash.
    if (pos_ + 1 >= src_.size()) fail("unterminated escape sequence");
    char c = src_[pos_ + 1];
    pos_ += 2;
    switch (c) {
      case 'n': return '\n';
      case 't': return '\t';
      case 'r': return '\r';
      case '0': return '\0';
      case '\\': return '\\';
      case '\'': return '\'';
      case '"': return '"';
      case 'x': {
        int value = 0;
        int digits = 0;
        while (digits < 2 && pos_ < src_.size() && std::isxdigit(static_cast<unsigned char>(src_[pos_]))) {
          char h = src_[pos_];
          value = value * 16 + (std::isdigit(static_cast<unsigned char>(h)) ? h - '0' : (std::tolower(h) - 'a' + 10));
          ++pos_;
          ++digits;
        }
        if (digits == 0) fail("\\x needs hex digits");
        return static_cast<char>(value);
      }
      default:
        pos_ -= 1;
        fail(std::string("unknown escape \\") + c);
    }
  }

  Token next() {
    Token t;
    t.offset = pos_;
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      return number();
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
      t.kind = Tok::Ident;
      t.text = std::string(src_.substr(start, pos_ - start));
      return t;
    }
    if (c == '\'') {
      ++pos_;
      if (pos_ >= src_.size()) fail("unterminated character literal");
      char value;
      if (src_[pos_] == '\\') {
        value = decode_escape();
      } else if (src_[pos_] == '\'') {
        fail("empty character literal");
      } else {
        value = src_[pos_++];
      }
      if (pos_ >= src_.size() || src_[pos_] != '\'') fail("unterminated character literal");
      ++pos_;
      t.kind = Tok::Char;
      t.int_value = value;
      return t;
    }
    if (c == '"') {
      ++pos_;
      std::string value;
      while (true) {
        if (pos_ >= src_.size()) fail("unterminated string literal");
        char ch = src_[pos_];
        if (ch == '"') break;
        if (ch == '\\') {
          value.push_back(decode_escape());
        } else {
          value.push_back(ch);
          ++pos_;
        }
      }
      ++pos_;
      t.kind = Tok::String;
      t.text = std::move(value);
      return t;
    }
    std::string_view rest = src_.substr(pos_);
    for (std::string_view p : kTwoCharPuncts) {
      if (rest.substr(0, 2) == p) {
        pos_ += 2;
        t.kind = Tok::Punct;
        t.text = std::string(p);
        return t;
      }
    }
    if (kOneCharPuncts.find(c) != std::string_view::npos) {
      ++pos_;
      t.kind = Tok::Punct;
      t.text = std::string(1, c);
      return t;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  Token number() {
    Token t;
    t.offset = pos_;
    std::size_t start = pos_;
    bool is_float = false;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      is_float = true;
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        is_float = true;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    if (pos_ < src_.size() && (std::isalpha(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      fail("malformed number");
    }
    std::string_view digits = src_.substr(start, pos_ - start);
    if (is_float) {
      // from_chars rejects a leading '.', which C accepts.
      std::string buffer = digits.front() == '.' ? "0" + std::string(digits) : std::string(digits);
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(buffer.data(), buffer.data() + buffer.size(), value);
      if (ec != std::errc() || ptr != buffer.data() + buffer.size()) {
        pos_ = start;
        fail("float literal out of range");
      }
      t.kind = Tok::Float;
      t.float_value = value;
    } else {
      std::int64_t value = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
      if (ec != std::errc() || ptr != digits.data() + digits.size()) {
        pos_ = start;
        fail("integer literal out of range");
      }
      t.kind = Tok::Int;
      t.int_value = value;
    }
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

constexpr int kMaxRecursion = 200;

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Expr parse() {
    if (peek().kind == Tok::End) throw ExpressionSyntaxError(peek().offset, "empty expression");
    Expr e = assignment();
    if (peek().kind != Tok::End) throw ExpressionSyntaxError(peek().offset, "unexpected '" + peek().text + "'");
    return e;
  }

 private:
  struct DepthGuard {
    explicit DepthGuard(Parser& p) : parser(p) {
      if (++parser.depth_ > kMaxRecursion) throw ExpressionSyntaxError(parser.peek().offset, "expression nested too deeply");
    }
    ~DepthGuard() { --parser.depth_; }
    Parser& parser;
  };

  const Token& peek() const { return toks_[pos_]; }
  bool at_punct(std::string_view p) const { return peek().kind == Tok::Punct && peek().text == p; }
  Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  void expect(std::string_view p) {
    if (!at_punct(p)) {
      std::string found = peek().kind == Tok::End ? "end of expression" : "'" + peek().text + "'";
      throw ExpressionSyntaxError(peek().offset, "expected '" + std::string(p) + "', found " + found);
    }
    take();
  }

  Expr assignment() {
    DepthGuard guard(*this);
    Expr lhs = logical_or();
    for (std::string_view op : {"=", "+=", "-=", "*=", "/=", "%="}) {
      if (at_punct(op)) {
        Token t = take();
        Expr rhs = assignment();
        return Expr::assign(t.text, std::move(lhs), std::move(rhs), t.offset);
      }
    }
    return lhs;
  }

  template <typename Next>
  Expr left_assoc(std::initializer_list<std::string_view> ops, Next next) {
    Expr lhs = (this->*next)();
    while (true) {
      bool matched = false;
      for (std::string_view op : ops) {
        if (at_punct(op)) {
          Token t = take();
          Expr rhs = (this->*next)();
          lhs = Expr::binary(t.text, std::move(lhs), std::move(rhs), t.offset);
          matched = true;
          break;
        }
      }
      if (!matched) return lhs;
    }
  }

  Expr logical_or() { return left_assoc({"||"}, &Parser::logical_and); }
  Expr logical_and() { return left_assoc({"&&"}, &Parser::comparison); }
  Expr comparison() { return left_assoc({"<=", ">=", "==", "!=", "<", ">"}, &Parser::additive); }
  Expr additive() { return left_assoc({"+", "-"}, &Parser::multiplicative); }
  Expr multiplicative() { return left_assoc({"*", "/", "%"}, &Parser::unary); }

  Expr unary() {
    DepthGuard guard(*this);
    if (peek().kind == Tok::Punct) {
      const std::string op = peek().text;
      if (op == "-" || op == "!") {
        Token t = take();
        return Expr::unary(op, unary(), t.offset);
      }
      if (op == "*") {
        Token t = take();
        return Expr::deref(unary(), t.offset);
      }
      if (op == "&") {
        Token t = take();
        return Expr::address_of(unary(), t.offset);
      }
      if (op == "++" || op == "--") {
        Token t = take();
        return Expr::inc_dec(op, true, unary(), t.offset);
      }
    }
    return postfix();
  }

  Expr postfix() {
    Expr e = primary();
    while (true) {
      if (at_punct("(")) {
        if (e.kind != ExprKind::Var) throw ExpressionSyntaxError(peek().offset, "only named functions can be called");
        Token t = take();
        std::vector<Expr> args;
        if (!at_punct(")")) {
          args.push_back(assignment());
          while (at_punct(",")) {
            take();
            args.push_back(assignment());
          }
        }
        expect(")");
        e = Expr::call(e.text, std::move(args), e.offset);
      } else if (at_punct("[")) {
        Token t = take();
        Expr idx = assignment();
        expect("]");
        e = Expr::index(std::move(e), std::move(idx), t.offset);
      } else if (at_punct(".") || at_punct("->")) {
        Token t = take();
        if (peek().kind != Tok::Ident) throw ExpressionSyntaxError(peek().offset, "expected member name");
        Token name = take();
        e = Expr::member(std::move(e), name.text, t.text == "->", t.offset);
      } else if (at_punct("++") || at_punct("--")) {
        Token t = take();
        e = Expr::inc_dec(t.text, false, std::move(e), t.offset);
      } else {
        return e;
      }
    }
  }

  Expr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Int: {
        Token tok = take();
        return Expr::int_lit(tok.int_value, tok.offset);
      }
      case Tok::Float: {
        Token tok = take();
        return Expr::float_lit(tok.float_value, tok.offset);
      }
      case Tok::Char: {
        Token tok = take();
        return Expr::char_lit(static_cast<char>(tok.int_value), tok.offset);
      }
      case Tok::String: {
        Token tok = take();
        return Expr::string_lit(tok.text, tok.offset);
      }
      case Tok::Ident: {
        Token tok = take();
        return Expr::var(tok.text, tok.offset);
      }
      case Tok::Punct:
        if (t.text == "(") {
          take();
          Expr inner = assignment();
          expect(")");
          return inner;
        }
        throw ExpressionSyntaxError(t.offset, "unexpected '" + t.text + "'");
      case Tok::End:
        throw ExpressionSyntaxError(t.offset, "unexpected end of expression");
    }
    throw ExpressionSyntaxError(t.offset, "unexpected token");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

// Printing precedence levels.
constexpr int kAssign = 1;
constexpr int kOr = 2;
constexpr int kAnd = 3;
constexpr int kCompare = 4;
constexpr int kAdditive = 5;
constexpr int kMultiplicative = 6;
constexpr int kUnary = 7;
constexpr int kPostfix = 8;
constexpr int kPrimary = 9;

int binary_precedence(const std::string& op) {
  if (op == "||") return kOr;
  if (op == "&&") return kAnd;
  if (op == "+" || op == "-") return kAdditive;
  if (op == "*" || op == "/" || op == "%") return kMultiplicative;
  return kCompare;
}

int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Assign: return kAssign;
    case ExprKind::Binary: return binary_precedence(e.text);
    case ExprKind::Unary:
    case ExprKind::AddressOf:
    case ExprKind::Deref:
      return kUnary;
    case ExprKind::IncDec: return e.flag ? kUnary : kPostfix;
    case ExprKind::Call:
    case ExprKind::Index:
    case ExprKind::Member:
      return kPostfix;
    default:
      return kPrimary;
  }
}

std::string format_float(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  std::string s(buf.data(), ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string print(const Expr& e, int min_prec);

std::string prefixed(std::string_view op, const Expr& operand) {
  std::string inner = print(operand, kUnary);
  std::string out(op);
  // Keep "- -x" and "& &x" from fusing into "--" / "&&".
  if (!inner.empty() && inner.front() == out.back()) out += ' ';
  return out + inner;
}

std::string print(const Expr& e, int min_prec) {
  std::string s;
  int prec = precedence(e);
  switch (e.kind) {
    case ExprKind::IntLit: s = std::to_string(e.int_value); break;
    case ExprKind::FloatLit: s = format_float(e.float_value); break;
    case ExprKind::CharLit: s = "'" + escape_c_string(std::string(1, static_cast<char>(e.int_value))) + "'"; break;
    case ExprKind::StringLit: s = "\"" + escape_c_string(e.text) + "\""; break;
    case ExprKind::Var: s = e.text; break;
    case ExprKind::Unary: s = prefixed(e.text, e.operands[0]); break;
    case ExprKind::AddressOf: s = prefixed("&", e.operands[0]); break;
    case ExprKind::Deref: s = prefixed("*", e.operands[0]); break;
    case ExprKind::IncDec:
      s = e.flag ? prefixed(e.text, e.operands[0]) : print(e.operands[0], kPostfix) + e.text;
      break;
    case ExprKind::Binary:
      s = print(e.operands[0], prec) + " " + e.text + " " + print(e.operands[1], prec + 1);
      break;
    case ExprKind::Assign:
      s = print(e.operands[0], kUnary) + " " + e.text + " " + print(e.operands[1], kAssign);
      break;
    case ExprKind::Call: {
      s = e.text + "(";
      for (std::size_t i = 0; i < e.operands.size(); ++i) {
        if (i != 0) s += ", ";
        s += print(e.operands[i], kAssign);
      }
      s += ")";
      break;
    }
    case ExprKind::Index:
      s = print(e.operands[0], kPostfix) + "[" + print(e.operands[1], kAssign) + "]";
      break;
    case ExprKind::Member:
      s = print(e.operands[0], kPostfix) + (e.flag ? "->" : ".") + e.text;
      break;
  }
  return prec < min_prec ? "(" + s + ")" : s;
}

}  // namespace

model::Expr parse_expression(std::string_view source) {
  Parser parser(Lexer(source).run());
  Expr e = parser.parse();
  if (e.depth() > model::kMaxExprDepth) throw ExpressionSyntaxError(0, "expression nested too deeply");
  return e;
}

std::string print_expression(const model::Expr& expr) { return print(expr, kAssign); }

std::string escape_c_string(std::string_view raw) {
  std::string out;
  for (char c : raw) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      case '\0': out += "\\0"; break;
      case '\\': out += "\\\\"; break;
      case '\'': out += "\\'"; break;
      case '"': out += "\\\""; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) >= 0x7f) {
          static constexpr char kHex[] = "0123456789abcdef";
          out += "\\x";
          out += kHex[(static_cast<unsigned char>(c) >> 4) & 0xf];
          out += kHex[static_cast<unsigned char>(c) & 0xf];
        } else {
          out.push_back(c);
        }
    }
  }
  return out;
}

}  // namespace tutor::codec

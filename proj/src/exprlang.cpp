#include "spdesim/exprlang.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>

namespace spdesim::exprlang {

namespace {

struct FuncEntry {
  const char* name;
  Func func;
};

constexpr std::array<FuncEntry, 7> kFuncs = {{
    {"sin", Func::sin},
    {"cos", Func::cos},
    {"exp", Func::exp},
    {"ln", Func::ln},
    {"sqrt", Func::sqrt},
    {"abs", Func::abs},
    {"tanh", Func::tanh},
}};

std::optional<Func> lookup_func(std::string_view name) {
  for (const auto& e : kFuncs)
    if (name == e.name) return e.func;
  return std::nullopt;
}

// Postorder opcode stream for the stack evaluator.
enum class OpCode { push_number, push_var, push_pi, negate, add, sub, mul, div, pow, call };

struct Op {
  OpCode code;
  double number = 0.0;
  int index = 0;  // variable index / Func
};

class Parser {
public:
  Parser(std::string_view src, const std::vector<std::string>& vars)
      : src_(src), vars_(vars) {}

  Node parse() {
    Node n = parse_expr(0, 0);
    skip_ws();
    if (pos_ != src_.size())
      fail(Errc::syntax_error, err_at("unexpected trailing input"));
    return n;
  }

private:
  // Binding powers: '+','-' (1,2) < '*','/' (3,4) < unary '-' (5) < '^' (8,7).
  Node parse_expr(int min_bp, int depth) {
    if (depth > kMaxDepth)
      fail(Errc::depth_exceeded, err_at("expression nesting deeper than 256"));
    Node lhs = parse_prefix(depth);
    for (;;) {
      skip_ws();
      if (pos_ == src_.size()) break;
      char c = src_[pos_];
      int lbp, rbp;
      Node::Kind kind;
      switch (c) {
        case '+': lbp = 1; rbp = 2; kind = Node::Kind::add; break;
        case '-': lbp = 1; rbp = 2; kind = Node::Kind::sub; break;
        case '*': lbp = 3; rbp = 4; kind = Node::Kind::mul; break;
        case '/': lbp = 3; rbp = 4; kind = Node::Kind::div; break;
        case '^': lbp = 8; rbp = 7; kind = Node::Kind::pow; break;
        default: return lhs;
      }
      if (lbp < min_bp) return lhs;
      ++pos_;
      Node rhs = parse_expr(rbp, depth + 1);
      Node combined;
      combined.kind = kind;
      combined.children.push_back(std::move(lhs));
      combined.children.push_back(std::move(rhs));
      lhs = std::move(combined);
    }
    return lhs;
  }

  Node parse_prefix(int depth) {
    if (depth > kMaxDepth)
      fail(Errc::depth_exceeded, err_at("expression nesting deeper than 256"));
    skip_ws();
    if (pos_ == src_.size())
      fail(Errc::syntax_error, err_at("expected a value"));
    char c = src_[pos_];
    if (c == '-') {
      ++pos_;
      // Unary minus binds looser than '^': -x^2 parses as -(x^2).
      Node child = parse_expr(6, depth + 1);
      Node n;
      n.kind = Node::Kind::negate;
      n.children.push_back(std::move(child));
      return n;
    }
    if (c == '(') {
      ++pos_;
      Node inner = parse_expr(0, depth + 1);
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return parse_identifier(depth);
    fail(Errc::syntax_error,
         err_at(std::string("unexpected character '") + c + "'; expected a value"));
  }

  Node parse_number() {
    const char* begin = src_.data() + pos_;
    const char* end = src_.data() + src_.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc())
      fail(Errc::syntax_error, err_at("malformed number"));
    pos_ += static_cast<std::size_t>(ptr - begin);
    Node n;
    n.kind = Node::Kind::number;
    n.number = value;
    return n;
  }

  Node parse_identifier(int depth) {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);

    if (name == "pi") {
      Node n;
      n.kind = Node::Kind::constant_pi;
      return n;
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (name == vars_[i]) {
        Node n;
        n.kind = Node::Kind::variable;
        n.var_index = static_cast<int>(i);
        return n;
      }
    }
    skip_ws();
    const bool called = pos_ < src_.size() && src_[pos_] == '(';
    if (auto f = lookup_func(name)) {
      if (!called)
        fail(Errc::syntax_error,
             err_at("expected '(' after function '" + std::string(name) + "'"));
      ++pos_;
      Node arg = parse_expr(0, depth + 1);
      expect(')');
      Node n;
      n.kind = Node::Kind::call;
      n.func = *f;
      n.children.push_back(std::move(arg));
      return n;
    }
    if (called)
      fail(Errc::unknown_function,
           "unknown function '" + std::string(name) + "' at position " +
               std::to_string(start));
    fail(Errc::unknown_identifier,
         "unknown identifier '" + std::string(name) + "' at position " +
             std::to_string(start));
  }

  void expect(char c) {
    skip_ws();
    if (pos_ == src_.size() || src_[pos_] != c)
      fail(Errc::syntax_error, err_at(std::string("expected '") + c + "'"));
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  std::string err_at(const std::string& what) const {
    return what + " at position " + std::to_string(pos_);
  }

  std::string_view src_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

void compile_node(const Node& n, std::vector<Op>& out) {
  for (const Node& c : n.children) compile_node(c, out);
  switch (n.kind) {
    case Node::Kind::number: out.push_back({OpCode::push_number, n.number, 0}); break;
    case Node::Kind::variable: out.push_back({OpCode::push_var, 0.0, n.var_index}); break;
    case Node::Kind::constant_pi: out.push_back({OpCode::push_pi, 0.0, 0}); break;
    case Node::Kind::negate: out.push_back({OpCode::negate, 0.0, 0}); break;
    case Node::Kind::add: out.push_back({OpCode::add, 0.0, 0}); break;
    case Node::Kind::sub: out.push_back({OpCode::sub, 0.0, 0}); break;
    case Node::Kind::mul: out.push_back({OpCode::mul, 0.0, 0}); break;
    case Node::Kind::div: out.push_back({OpCode::div, 0.0, 0}); break;
    case Node::Kind::pow: out.push_back({OpCode::pow, 0.0, 0}); break;
    case Node::Kind::call:
      out.push_back({OpCode::call, 0.0, static_cast<int>(n.func)});
      break;
  }
}

double apply_func(Func f, double x) {
  switch (f) {
    case Func::sin: return std::sin(x);
    case Func::cos: return std::cos(x);
    case Func::exp: return std::exp(x);
    case Func::ln:
      if (x <= 0.0)
        fail(Errc::eval_domain, "ln of nonpositive value " + std::to_string(x));
      return std::log(x);
    case Func::sqrt:
      if (x < 0.0)
        fail(Errc::eval_domain, "sqrt of negative value " + std::to_string(x));
      return std::sqrt(x);
    case Func::abs: return std::fabs(x);
    case Func::tanh: return std::tanh(x);
  }
  return 0.0;  // unreachable
}

void print_node(const Node& n, const std::vector<std::string>& vars, std::string& out) {
  char buf[40];
  switch (n.kind) {
    case Node::Kind::number:
      std::snprintf(buf, sizeof buf, "%.17g", n.number);
      out += buf;
      return;
    case Node::Kind::variable:
      out += vars[static_cast<std::size_t>(n.var_index)];
      return;
    case Node::Kind::constant_pi:
      out += "pi";
      return;
    case Node::Kind::negate:
      out += "(-";
      print_node(n.children[0], vars, out);
      out += ")";
      return;
    case Node::Kind::call:
      out += func_name(n.func);
      out += "(";
      print_node(n.children[0], vars, out);
      out += ")";
      return;
    default: {
      const char* op = n.kind == Node::Kind::add   ? "+"
                       : n.kind == Node::Kind::sub ? "-"
                       : n.kind == Node::Kind::mul ? "*"
                       : n.kind == Node::Kind::div ? "/"
                                                   : "^";
      out += "(";
      print_node(n.children[0], vars, out);
      out += op;
      print_node(n.children[1], vars, out);
      out += ")";
      return;
    }
  }
}

}  // namespace

const char* func_name(Func f) {
  for (const auto& e : kFuncs)
    if (e.func == f) return e.name;
  return "?";
}

bool structurally_equal(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Node::Kind::number:
      // bit comparison, so printed-and-reparsed literals must round-trip
      if (!(a.number == b.number)) return false;
      break;
    case Node::Kind::variable:
      if (a.var_index != b.var_index) return false;
      break;
    case Node::Kind::call:
      if (a.func != b.func) return false;
      break;
    default: break;
  }
  if (a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!structurally_equal(a.children[i], b.children[i])) return false;
  return true;
}

struct Expr::Impl {
  Node root;
  std::vector<std::string> variables;
  std::vector<Op> program;
};

Expr Expr::parse(std::string_view src, std::vector<std::string> variables) {
  auto impl = std::make_shared<Impl>();
  impl->variables = std::move(variables);
  {
    Parser p(src, impl->variables);
    impl->root = p.parse();
  }
  compile_node(impl->root, impl->program);
  Expr e;
  e.impl_ = std::move(impl);
  return e;
}

double Expr::eval(std::span<const double> args) const {
  // Fixed-capacity stack: program depth is bounded by the parser's depth cap.
  double stack[kMaxDepth + 2];
  int top = 0;
  for (const Op& op : impl_->program) {
    switch (op.code) {
      case OpCode::push_number: stack[top++] = op.number; break;
      case OpCode::push_var: stack[top++] = args[static_cast<std::size_t>(op.index)]; break;
      case OpCode::push_pi: stack[top++] = M_PI; break;
      case OpCode::negate: stack[top - 1] = -stack[top - 1]; break;
      case OpCode::add: --top; stack[top - 1] += stack[top]; break;
      case OpCode::sub: --top; stack[top - 1] -= stack[top]; break;
      case OpCode::mul: --top; stack[top - 1] *= stack[top]; break;
      case OpCode::div: {
        --top;
        if (stack[top] == 0.0) fail(Errc::eval_domain, "division by zero");
        stack[top - 1] /= stack[top];
        break;
      }
      case OpCode::pow: {
        --top;
        const double base = stack[top - 1], expo = stack[top];
        if (base == 0.0 && expo < 0.0)
          fail(Errc::eval_domain, "zero raised to a negative power");
        const double r = std::pow(base, expo);
        if (std::isnan(r) && !std::isnan(base) && !std::isnan(expo))
          fail(Errc::eval_domain, "pow with negative base and non-integer exponent");
        stack[top - 1] = r;
        break;
      }
      case OpCode::call:
        stack[top - 1] = apply_func(static_cast<Func>(op.index), stack[top - 1]);
        break;
    }
  }
  return stack[0];
}

std::string Expr::str() const {
  std::string out;
  print_node(impl_->root, impl_->variables, out);
  return out;
}

const Node& Expr::root() const { return impl_->root; }

const std::vector<std::string>& Expr::variables() const { return impl_->variables; }

}  // namespace spdesim::exprlang

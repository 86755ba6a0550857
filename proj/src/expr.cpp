#include "cprojlab/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "cprojlab/errors.hpp"

namespace cprojlab {

struct ScalarField::Node {
  enum Kind { kConst, kVar, kAdd, kSub, kMul, kDiv, kNeg, kPow, kExp, kLog } kind;
  double cval = 0.0;
  int var = -1;
  long long expo = 0;
  std::shared_ptr<const Node> a, b;
};

using Node = ScalarField::Node;
using NodePtr = std::shared_ptr<const Node>;

namespace {

NodePtr mk(Node n) { return std::make_shared<const Node>(std::move(n)); }

double eval_node(const Node& n, const Eigen::VectorXd& x) {
  switch (n.kind) {
    case Node::kConst: return n.cval;
    case Node::kVar:
      if (n.var >= x.size()) throw DomainError("coordinate index out of range");
      return x[n.var];
    case Node::kAdd: return eval_node(*n.a, x) + eval_node(*n.b, x);
    case Node::kSub: return eval_node(*n.a, x) - eval_node(*n.b, x);
    case Node::kMul: return eval_node(*n.a, x) * eval_node(*n.b, x);
    case Node::kDiv: {
      double den = eval_node(*n.b, x);
      if (den == 0.0) throw DomainError("division by zero");
      return eval_node(*n.a, x) / den;
    }
    case Node::kNeg: return -eval_node(*n.a, x);
    case Node::kPow: {
      double base = eval_node(*n.a, x);
      if (n.expo < 0 && base == 0.0) throw DomainError("zero raised to negative power");
      return std::pow(base, static_cast<double>(n.expo));
    }
    case Node::kExp: return std::exp(eval_node(*n.a, x));
    case Node::kLog: {
      double v = eval_node(*n.a, x);
      if (!(v > 0.0)) throw DomainError("log of non-positive value");
      return std::log(v);
    }
  }
  throw std::logic_error("unreachable");
}

Jet jet_node(const Node& n, const Eigen::VectorXd& x, const std::shared_ptr<const JetSpace>& sp) {
  switch (n.kind) {
    case Node::kConst: return Jet::constant(sp, n.cval);
    case Node::kVar:
      if (n.var >= x.size()) throw DomainError("coordinate index out of range");
      return Jet::variable(sp, n.var, x[n.var]);
    case Node::kAdd: return jet_node(*n.a, x, sp) + jet_node(*n.b, x, sp);
    case Node::kSub: return jet_node(*n.a, x, sp) - jet_node(*n.b, x, sp);
    case Node::kMul: return jet_node(*n.a, x, sp) * jet_node(*n.b, x, sp);
    case Node::kDiv: return jet_node(*n.a, x, sp) / jet_node(*n.b, x, sp);
    case Node::kNeg: return -jet_node(*n.a, x, sp);
    case Node::kPow: return jet_powi(jet_node(*n.a, x, sp), n.expo);
    case Node::kExp: return jet_exp(jet_node(*n.a, x, sp));
    case Node::kLog: return jet_log(jet_node(*n.a, x, sp));
  }
  throw std::logic_error("unreachable");
}

int max_var_node(const Node& n) {
  int m = -1;
  if (n.kind == Node::kVar) return n.var;
  if (n.a) m = std::max(m, max_var_node(*n.a));
  if (n.b) m = std::max(m, max_var_node(*n.b));
  return m;
}

class Parser {
 public:
  Parser(const std::string& s, int nvars) : s_(s), nvars_(nvars) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  NodePtr expr() {
    NodePtr left = term();
    while (true) {
      skip_ws();
      if (accept('+')) {
        left = mk({Node::kAdd, 0, -1, 0, left, term()});
      } else if (accept('-')) {
        left = mk({Node::kSub, 0, -1, 0, left, term()});
      } else {
        return left;
      }
    }
  }

  NodePtr term() {
    NodePtr left = unary();
    while (true) {
      skip_ws();
      if (accept('*')) {
        left = mk({Node::kMul, 0, -1, 0, left, unary()});
      } else if (accept('/')) {
        left = mk({Node::kDiv, 0, -1, 0, left, unary()});
      } else {
        return left;
      }
    }
  }

  NodePtr unary() {
    skip_ws();
    if (accept('-')) return mk({Node::kNeg, 0, -1, 0, unary(), nullptr});
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    skip_ws();
    if (accept('^')) {
      skip_ws();
      bool neg = accept('-');
      if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) fail("integer exponent expected after '^'");
      long long e = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) e = e * 10 + (s_[pos_++] - '0');
      return mk({Node::kPow, 0, -1, neg ? -e : e, base, nullptr});
    }
    return base;
  }

  NodePtr atom() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      skip_ws();
      if (!accept(')')) fail("')' expected");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      std::string id = s_.substr(start, pos_ - start);
      if (id == "exp" || id == "log") {
        skip_ws();
        if (!accept('(')) fail("'(' expected after function name");
        NodePtr e = expr();
        skip_ws();
        if (!accept(')')) fail("')' expected");
        return mk({id == "exp" ? Node::kExp : Node::kLog, 0, -1, 0, e, nullptr});
      }
      if (id.size() >= 2 && id[0] == 'x') {
        bool digits = true;
        for (size_t i = 1; i < id.size(); ++i)
          if (!std::isdigit(static_cast<unsigned char>(id[i]))) digits = false;
        if (digits) {
          int v = std::stoi(id.substr(1));
          if (v < 1 || v > nvars_) fail("coordinate " + id + " out of range (have x1..x" + std::to_string(nvars_) + ")");
          return mk({Node::kVar, 0, v - 1, 0, nullptr, nullptr});
        }
      }
      fail("unknown identifier '" + id + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
    return nullptr;
  }

  NodePtr number() {
    size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                s_[pos_] == 'e' || s_[pos_] == 'E' ||
                                ((s_[pos_] == '+' || s_[pos_] == '-') && pos_ > start &&
                                 (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
      ++pos_;
    std::string tok = s_.substr(start, pos_ - start);
    try {
      size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) fail("malformed number '" + tok + "'");
      return mk({Node::kConst, v, -1, 0, nullptr, nullptr});
    } catch (const std::exception&) {
      fail("malformed number '" + tok + "'");
    }
    return nullptr;
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError("parse error at offset " + std::to_string(pos_) + ": " + msg);
  }

  const std::string& s_;
  int nvars_;
  size_t pos_ = 0;
};

}  // namespace

ScalarField::ScalarField() : root_(mk({Node::kConst, 0, -1, 0, nullptr, nullptr})), src_("0") {}

ScalarField::ScalarField(NodePtr root, std::string src) : root_(std::move(root)), src_(std::move(src)) {}

ScalarField ScalarField::constant(double c) {
  std::ostringstream os;
  os << c;
  return ScalarField(mk({Node::kConst, c, -1, 0, nullptr, nullptr}), os.str());
}

ScalarField ScalarField::var(int index) {
  return ScalarField(mk({Node::kVar, 0, index, 0, nullptr, nullptr}), "x" + std::to_string(index + 1));
}

ScalarField ScalarField::parse(const std::string& text, int nvars) {
  Parser p(text, nvars);
  return ScalarField(p.parse(), text);
}

double ScalarField::eval(const Eigen::VectorXd& x) const { return eval_node(*root_, x); }

Jet ScalarField::jet(const Eigen::VectorXd& x, int K) const {
  auto sp = JetSpace::get(static_cast<int>(x.size()), K);
  return jet_node(*root_, x, sp);
}

int ScalarField::max_var() const { return max_var_node(*root_); }

bool ScalarField::is_zero() const { return root_->kind == Node::kConst && root_->cval == 0.0; }

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  return ScalarField(mk({Node::kAdd, 0, -1, 0, a.root_, b.root_}), "(" + a.src_ + ")+(" + b.src_ + ")");
}
ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  return ScalarField(mk({Node::kSub, 0, -1, 0, a.root_, b.root_}), "(" + a.src_ + ")-(" + b.src_ + ")");
}
ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  return ScalarField(mk({Node::kMul, 0, -1, 0, a.root_, b.root_}), "(" + a.src_ + ")*(" + b.src_ + ")");
}
ScalarField operator/(const ScalarField& a, const ScalarField& b) {
  return ScalarField(mk({Node::kDiv, 0, -1, 0, a.root_, b.root_}), "(" + a.src_ + ")/(" + b.src_ + ")");
}
ScalarField operator*(double s, const ScalarField& f) { return ScalarField::constant(s) * f; }
ScalarField operator*(const ScalarField& f, double s) { return f * ScalarField::constant(s); }
ScalarField operator/(const ScalarField& f, double s) { return f / ScalarField::constant(s); }
ScalarField operator+(const ScalarField& f, double s) { return f + ScalarField::constant(s); }
ScalarField operator+(double s, const ScalarField& f) { return ScalarField::constant(s) + f; }
ScalarField operator-(const ScalarField& f, double s) { return f - ScalarField::constant(s); }
ScalarField operator-(double s, const ScalarField& f) { return ScalarField::constant(s) - f; }
ScalarField ScalarField::operator-() const { return ScalarField(mk({Node::kNeg, 0, -1, 0, root_, nullptr}), "-(" + src_ + ")"); }

ScalarField exp(const ScalarField& f) {
  return ScalarField(mk({Node::kExp, 0, -1, 0, f.root_, nullptr}), "exp(" + f.src_ + ")");
}
ScalarField log(const ScalarField& f) {
  return ScalarField(mk({Node::kLog, 0, -1, 0, f.root_, nullptr}), "log(" + f.src_ + ")");
}
ScalarField pow(const ScalarField& f, long long e) {
  return ScalarField(mk({Node::kPow, 0, -1, e, f.root_, nullptr}), "(" + f.src_ + ")^" + std::to_string(e));
}

namespace {
NodePtr shift_node(const Node& n, int offset) {
  Node out = n;
  if (n.kind == Node::kVar) out.var = n.var + offset;
  if (n.a) out.a = shift_node(*n.a, offset);
  if (n.b) out.b = shift_node(*n.b, offset);
  return mk(std::move(out));
}
}  // namespace

ScalarField shift_vars(const ScalarField& f, int offset) {
  return ScalarField(shift_node(*f.root_, offset), f.src_ + "@+" + std::to_string(offset));
}

Jet eval_jet(const ScalarField& f, const Eigen::VectorXd& x, int K) { return f.jet(x, K); }

}  // namespace cprojlab

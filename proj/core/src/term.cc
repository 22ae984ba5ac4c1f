#include "rfcc/term.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <set>

namespace rfcc {

// ---------------------------------------------------------------------------
// Categories

int Category::Arity() const {
  int n = 0;
  const Category* c = this;
  while (!c->IsAtom()) {
    ++n;
    c = c->result.get();
  }
  return n;
}

CatPtr Category::Atom(std::string name) {
  auto c = std::make_shared<Category>();
  c->kind = Kind::kAtom;
  c->atom = std::move(name);
  return c;
}

CatPtr Category::Forward(CatPtr result, CatPtr arg) {
  auto c = std::make_shared<Category>();
  c->kind = Kind::kForward;
  c->result = std::move(result);
  c->arg = std::move(arg);
  return c;
}

CatPtr Category::Backward(CatPtr result, CatPtr arg) {
  auto c = std::make_shared<Category>();
  c->kind = Kind::kBackward;
  c->result = std::move(result);
  c->arg = std::move(arg);
  return c;
}

bool CatEqual(const CatPtr& a, const CatPtr& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  if (a->IsAtom()) return a->atom == b->atom;
  return CatEqual(a->result, b->result) && CatEqual(a->arg, b->arg);
}

namespace {

std::string CatOperand(const CatPtr& c) {
  return c->IsAtom() ? c->atom : "(" + ToString(c) + ")";
}

}  // namespace

std::string ToString(const CatPtr& c) {
  if (c->IsAtom()) return c->atom;
  // The result side is left-associative, so a complex result needs no parens.
  std::string lhs = ToString(c->result);
  char slash = c->kind == Category::Kind::kForward ? '/' : '\\';
  return lhs + slash + CatOperand(c->arg);
}

namespace {

class CatParser {
 public:
  explicit CatParser(std::string_view s) : s_(s) {}

  CatPtr Parse() {
    CatPtr c = ParseSlashes();
    SkipSpace();
    if (pos_ != s_.size()) throw SyntaxError("trailing input in category", pos_);
    return c;
  }

 private:
  void SkipSpace() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  CatPtr ParseSlashes() {
    CatPtr left = ParsePrimary();
    for (;;) {
      SkipSpace();
      if (pos_ >= s_.size()) return left;
      char ch = s_[pos_];
      if (ch != '/' && ch != '\\') return left;
      ++pos_;
      CatPtr right = ParsePrimary();
      left = ch == '/' ? Category::Forward(left, right)
                       : Category::Backward(left, right);
    }
  }

  CatPtr ParsePrimary() {
    SkipSpace();
    if (pos_ >= s_.size()) throw SyntaxError("unexpected end of category", pos_);
    if (s_[pos_] == '(') {
      ++pos_;
      CatPtr inner = ParseSlashes();
      SkipSpace();
      if (pos_ >= s_.size() || s_[pos_] != ')')
        throw SyntaxError("expected ')' in category", pos_);
      ++pos_;
      return inner;
    }
    size_t start = pos_;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
    std::string atom(s_.substr(start, pos_ - start));
    if (atom != "N" && atom != "NP" && atom != "S")
      throw SyntaxError("unknown primitive category '" + atom + "'", start);
    return Category::Atom(atom);
  }

  std::string_view s_;
  size_t pos_ = 0;
};

}  // namespace

CatPtr ParseCategory(std::string_view text) { return CatParser(text).Parse(); }

// ---------------------------------------------------------------------------
// Terms

TermPtr Var(std::string name) {
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::kVar;
  t->name = std::move(name);
  return t;
}

TermPtr Str(std::string text) {
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::kStr;
  t->name = std::move(text);
  return t;
}

TermPtr Num(int64_t value) {
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::kNum;
  t->num = value;
  return t;
}

TermPtr Pred(std::string name, std::vector<TermPtr> args) {
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::kPred;
  t->name = std::move(name);
  t->args = std::move(args);
  return t;
}

TermPtr Abs(std::string param, TermPtr body) {
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::kAbs;
  t->name = std::move(param);
  t->args = {std::move(body)};
  return t;
}

TermPtr App(TermPtr fn, TermPtr arg) {
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::kApp;
  t->args = {std::move(fn), std::move(arg)};
  return t;
}

int LambdaArity(const TermPtr& t) {
  int n = 0;
  const Term* cur = t.get();
  while (cur->kind == Term::Kind::kAbs) {
    ++n;
    cur = cur->args[0].get();
  }
  return n;
}

namespace {

std::string Quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  return out + "'";
}

// Bound variables print as their de Bruijn level so alpha-equivalent terms
// share a key.
void KeyRec(const TermPtr& t, std::vector<std::string>& env, std::string& out) {
  switch (t->kind) {
    case Term::Kind::kVar: {
      auto it = std::find(env.rbegin(), env.rend(), t->name);
      if (it != env.rend()) {
        out += "#" + std::to_string(env.rend() - it - 1);
      } else {
        out += "$" + t->name;
      }
      return;
    }
    case Term::Kind::kStr:
      out += Quote(t->name);
      return;
    case Term::Kind::kNum:
      out += std::to_string(t->num);
      return;
    case Term::Kind::kPred:
      out += t->name + "(";
      for (size_t i = 0; i < t->args.size(); ++i) {
        if (i) out += ",";
        KeyRec(t->args[i], env, out);
      }
      out += ")";
      return;
    case Term::Kind::kAbs:
      env.push_back(t->name);
      out += "\\.";
      KeyRec(t->args[0], env, out);
      env.pop_back();
      return;
    case Term::Kind::kApp:
      out += "[";
      KeyRec(t->args[0], env, out);
      out += " ";
      KeyRec(t->args[1], env, out);
      out += "]";
      return;
  }
}

}  // namespace

std::string TermKey(const TermPtr& t) {
  std::vector<std::string> env;
  std::string out;
  KeyRec(t, env, out);
  return out;
}

bool TermEqual(const TermPtr& a, const TermPtr& b) {
  return a == b || TermKey(a) == TermKey(b);
}

std::string ToString(const TermPtr& t, PrintStyle style) {
  switch (t->kind) {
    case Term::Kind::kVar:
      return t->name;
    case Term::Kind::kStr:
      return Quote(t->name);
    case Term::Kind::kNum:
      return std::to_string(t->num);
    case Term::Kind::kPred: {
      if (style == PrintStyle::kFigure && t->name == "@Num" &&
          t->args.size() == 1 && t->args[0]->kind == Term::Kind::kNum) {
        return "'" + std::to_string(t->args[0]->num) + "'";
      }
      std::string out = t->name + "(";
      for (size_t i = 0; i < t->args.size(); ++i) {
        if (i) out += ",";
        out += ToString(t->args[i], style);
      }
      return out + ")";
    }
    case Term::Kind::kAbs:
      return "\\" + t->name + "." + ToString(t->args[0], style);
    case Term::Kind::kApp:
      return "(" + ToString(t->args[0], style) + " " +
             ToString(t->args[1], style) + ")";
  }
  return {};
}

namespace {

class TermParser {
 public:
  explicit TermParser(std::string_view s) : s_(s) {}

  TermPtr Parse() {
    TermPtr t = ParseLambda();
    SkipSpace();
    if (pos_ != s_.size()) throw SyntaxError("trailing input in lambda", pos_);
    return t;
  }

 private:
  void SkipSpace() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  bool IsIdentChar(char c) const {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  std::string Ident() {
    size_t start = pos_;
    while (pos_ < s_.size() && IsIdentChar(s_[pos_])) ++pos_;
    if (start == pos_) throw SyntaxError("expected identifier", pos_);
    return std::string(s_.substr(start, pos_ - start));
  }

  void Expect(char c) {
    SkipSpace();
    if (pos_ >= s_.size() || s_[pos_] != c)
      throw SyntaxError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  TermPtr ParseLambda() {
    SkipSpace();
    if (pos_ >= s_.size()) throw SyntaxError("unexpected end of lambda", pos_);
    char c = s_[pos_];
    if (c == '\\') {
      ++pos_;
      SkipSpace();
      std::string param = Ident();
      Expect('.');
      return Abs(param, ParseLambda());
    }
    if (c == '@') {
      ++pos_;
      std::string name = "@" + Ident();
      Expect('(');
      std::vector<TermPtr> args;
      SkipSpace();
      if (pos_ < s_.size() && s_[pos_] == ')') {
        ++pos_;
        return Pred(name, {});
      }
      for (;;) {
        args.push_back(ParseLambda());
        SkipSpace();
        if (pos_ < s_.size() && s_[pos_] == ',') {
          ++pos_;
          continue;
        }
        Expect(')');
        break;
      }
      return Pred(name, std::move(args));
    }
    if (c == '(') {
      // "(f a b)" is ((f a) b); "(t)" is t.
      ++pos_;
      TermPtr t = ParseLambda();
      for (;;) {
        SkipSpace();
        if (pos_ < s_.size() && s_[pos_] == ')') break;
        t = App(t, ParseLambda());
      }
      ++pos_;
      return t;
    }
    if (c == '\'' || c == '"') {
      char quote = c;
      ++pos_;
      std::string text;
      while (pos_ < s_.size() && s_[pos_] != quote) {
        if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
        text += s_[pos_++];
      }
      if (pos_ >= s_.size()) throw SyntaxError("unterminated string", pos_);
      ++pos_;
      return Str(text);
    }
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      if (c == '-') ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
        ++pos_;
      std::string digits(s_.substr(start, pos_ - start));
      if (digits == "-") throw SyntaxError("malformed number", start);
      return Num(std::stoll(digits));
    }
    return Var(Ident());
  }

  std::string_view s_;
  size_t pos_ = 0;
};

void FreeVars(const TermPtr& t, std::vector<std::string>& bound,
              std::set<std::string>& out) {
  switch (t->kind) {
    case Term::Kind::kVar:
      if (std::find(bound.begin(), bound.end(), t->name) == bound.end())
        out.insert(t->name);
      return;
    case Term::Kind::kAbs:
      bound.push_back(t->name);
      FreeVars(t->args[0], bound, out);
      bound.pop_back();
      return;
    default:
      for (const auto& a : t->args) FreeVars(a, bound, out);
  }
}

std::set<std::string> FreeVarSet(const TermPtr& t) {
  std::vector<std::string> bound;
  std::set<std::string> out;
  FreeVars(t, bound, out);
  return out;
}

std::string Fresh(const std::string& base) {
  static std::atomic<uint64_t> counter{0};
  std::string stem = base.substr(0, base.find('\''));
  return stem + "'" + std::to_string(counter.fetch_add(1));
}

TermPtr SubstRec(const TermPtr& body, const std::string& var,
                 const TermPtr& value, const std::set<std::string>& value_fv) {
  switch (body->kind) {
    case Term::Kind::kVar:
      return body->name == var ? value : body;
    case Term::Kind::kStr:
    case Term::Kind::kNum:
      return body;
    case Term::Kind::kPred: {
      std::vector<TermPtr> args;
      args.reserve(body->args.size());
      for (const auto& a : body->args)
        args.push_back(SubstRec(a, var, value, value_fv));
      return Pred(body->name, std::move(args));
    }
    case Term::Kind::kApp:
      return App(SubstRec(body->args[0], var, value, value_fv),
                 SubstRec(body->args[1], var, value, value_fv));
    case Term::Kind::kAbs: {
      if (body->name == var) return body;
      if (value_fv.count(body->name)) {
        std::string renamed = Fresh(body->name);
        TermPtr inner = SubstRec(body->args[0], body->name, Var(renamed), {renamed});
        return Abs(renamed, SubstRec(inner, var, value, value_fv));
      }
      return Abs(body->name, SubstRec(body->args[0], var, value, value_fv));
    }
  }
  return body;
}

TermPtr Whnf(const TermPtr& t) {
  if (t->kind != Term::Kind::kApp) return t;
  TermPtr fn = Whnf(t->args[0]);
  if (fn->kind == Term::Kind::kAbs)
    return Whnf(Substitute(fn->args[0], fn->name, t->args[1]));
  return fn == t->args[0] ? t : App(fn, t->args[1]);
}

}  // namespace

TermPtr ParseTerm(std::string_view text) { return TermParser(text).Parse(); }

bool HasFreeVariables(const TermPtr& t) { return !FreeVarSet(t).empty(); }

bool IsFirstOrder(const TermPtr& t) {
  if (t->kind == Term::Kind::kAbs || t->kind == Term::Kind::kApp) return false;
  for (const auto& a : t->args)
    if (!IsFirstOrder(a)) return false;
  return true;
}

TermPtr Substitute(const TermPtr& body, const std::string& var,
                   const TermPtr& value) {
  return SubstRec(body, var, value, FreeVarSet(value));
}

TermPtr BetaReduce(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::kVar:
    case Term::Kind::kStr:
    case Term::Kind::kNum:
      return t;
    case Term::Kind::kPred: {
      std::vector<TermPtr> args;
      args.reserve(t->args.size());
      bool changed = false;
      for (const auto& a : t->args) {
        args.push_back(BetaReduce(a));
        changed |= args.back() != a;
      }
      return changed ? Pred(t->name, std::move(args)) : t;
    }
    case Term::Kind::kAbs: {
      TermPtr body = BetaReduce(t->args[0]);
      return body == t->args[0] ? t : Abs(t->name, body);
    }
    case Term::Kind::kApp: {
      TermPtr fn = Whnf(t->args[0]);
      if (fn->kind == Term::Kind::kAbs)
        return BetaReduce(Substitute(fn->args[0], fn->name, t->args[1]));
      return App(BetaReduce(fn), BetaReduce(t->args[1]));
    }
  }
  return t;
}

size_t NodeCount(const TermPtr& t) {
  size_t n = 1;
  for (const auto& a : t->args) n += NodeCount(a);
  return n;
}

}  // namespace rfcc

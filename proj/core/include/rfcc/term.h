// Syntactic categories and lambda terms shared by the lexicon, the chart
// parser and the disambiguator.
#ifndef RFCC_TERM_H_
#define RFCC_TERM_H_

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rfcc {

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& what, size_t pos)
      : std::runtime_error(what), pos_(pos) {}
  size_t pos() const { return pos_; }

 private:
  size_t pos_;
};

// ---------------------------------------------------------------------------
// Categories

struct Category;
using CatPtr = std::shared_ptr<const Category>;

struct Category {
  enum class Kind { kAtom, kForward, kBackward };

  Kind kind = Kind::kAtom;
  std::string atom;  // "N", "NP" or "S" when kind == kAtom
  CatPtr result;
  CatPtr arg;

  bool IsAtom() const { return kind == Kind::kAtom; }
  // Number of argument slots along the result spine.
  int Arity() const;

  static CatPtr Atom(std::string name);
  static CatPtr Forward(CatPtr result, CatPtr arg);
  static CatPtr Backward(CatPtr result, CatPtr arg);
};

bool CatEqual(const CatPtr& a, const CatPtr& b);
std::string ToString(const CatPtr& c);
// Slashes are left-associative: S\NP/NP == (S\NP)/NP.
CatPtr ParseCategory(std::string_view text);

// ---------------------------------------------------------------------------
// Lambda terms

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  enum class Kind { kVar, kStr, kNum, kPred, kAbs, kApp };

  Kind kind = Kind::kStr;
  // Variable name, string text, predicate name (with '@') or bound parameter.
  std::string name;
  int64_t num = 0;
  // kPred: arguments. kAbs: {body}. kApp: {fn, arg}.
  std::vector<TermPtr> args;

  bool IsLeaf() const { return kind == Kind::kStr || kind == Kind::kNum; }
  bool IsPred(std::string_view pred) const {
    return kind == Kind::kPred && name == pred;
  }
};

TermPtr Var(std::string name);
TermPtr Str(std::string text);
TermPtr Num(int64_t value);
TermPtr Pred(std::string name, std::vector<TermPtr> args);
TermPtr Abs(std::string param, TermPtr body);
TermPtr App(TermPtr fn, TermPtr arg);

// Number of leading abstractions.
int LambdaArity(const TermPtr& t);

// Structural equality up to renaming of bound variables.
bool TermEqual(const TermPtr& a, const TermPtr& b);
// A string key such that Key(a) == Key(b) iff TermEqual(a, b).
std::string TermKey(const TermPtr& t);

enum class PrintStyle {
  kCanonical,  // @Num(0) stays a predicate application
  kFigure,     // @Num(n) renders as the quoted leaf 'n'
};
std::string ToString(const TermPtr& t, PrintStyle style = PrintStyle::kCanonical);

// Grammar: "\" ident "." lambda | "@" ident "(" args ")" | ident | 'str' |
// "str" | integer. Application is not part of the surface syntax.
TermPtr ParseTerm(std::string_view text);

bool HasFreeVariables(const TermPtr& t);
// True if no kAbs or kApp node remains.
bool IsFirstOrder(const TermPtr& t);

// Normal-order beta reduction with capture-avoiding substitution.
TermPtr BetaReduce(const TermPtr& t);
// Substitutes `value` for free occurrences of `var` in `body`.
TermPtr Substitute(const TermPtr& body, const std::string& var,
                   const TermPtr& value);

// Counts nodes of a first-order term.
size_t NodeCount(const TermPtr& t);

}  // namespace rfcc

#endif  // RFCC_TERM_H_

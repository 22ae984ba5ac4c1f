// Winnowing of a sentence's logical forms: type, argument-ordering,
// predicate-ordering, distributivity and associativity checks.
#ifndef RFCC_DISAMBIGUATOR_H_
#define RFCC_DISAMBIGUATOR_H_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rfcc/lexicon.h"
#include "rfcc/term.h"

namespace rfcc {

// Decides the kind of a leaf for type checks.
struct KindOracle {
  std::set<std::string> functions;  // names from the static function table
  std::set<std::string> fields;     // header fields and state variables

  // Leaf kind of a string/number constant or @Num application; kPredicate for
  // any other predicate application.
  ArgKind KindOf(const TermPtr& t) const;
  bool Matches(const TermPtr& t, const KindSpec& spec) const;
  // Lowercase, spaces and dashes folded to '_'.
  static std::string Normalize(std::string_view name);
};

struct TypeRule {
  std::string predicate;
  int position = 1;  // 1-based
  std::vector<KindSpec> allowed;
};

// forbid(p1,p2,...): an application whose i-th argument matches p_i for every
// i is rejected. A pattern element is a class name, a kind or "_".
struct ArgOrderRule {
  std::string predicate;
  std::vector<std::string> pattern;
};

struct PredOrderRule {
  std::string parent;
  std::string child;
  int position = 0;  // 1-based; 0 matches any position
};

struct CheckRuleSet {
  std::vector<TypeRule> type_rules;
  std::vector<ArgOrderRule> arg_order_rules;
  std::vector<PredOrderRule> pred_order_rules;
  std::set<std::string> associative;
  std::map<std::string, std::set<std::string>> classes;  // class -> predicates

  // Lines: "type @P pos kind...", "argorder @P forbid(a,b)",
  // "predorder forbid parent=@P child=@Q pos=N", "assoc @P @Q ...",
  // "class name @P @Q ...". When `registry` is given every referenced
  // predicate must be registered.
  static CheckRuleSet Parse(std::string_view text, const std::string& origin = "<checks>",
                            const PredicateRegistry* registry = nullptr);
  static CheckRuleSet Load(const std::string& path,
                           const PredicateRegistry* registry = nullptr);
  void Merge(const CheckRuleSet& other);
};

enum class Check { kType, kArgOrder, kPredOrder, kDistributivity, kAssociativity };
const char* CheckName(Check c);
inline constexpr Check kPipelineOrder[] = {Check::kType, Check::kArgOrder,
                                           Check::kPredOrder, Check::kDistributivity,
                                           Check::kAssociativity};

using LfSet = std::vector<TermPtr>;

LfSet ApplyTypeChecks(const LfSet& lfs, const CheckRuleSet& rules,
                      const KindOracle& oracle);
LfSet ApplyArgOrderChecks(const LfSet& lfs, const CheckRuleSet& rules,
                          const KindOracle& oracle);
LfSet ApplyPredOrderChecks(const LfSet& lfs, const CheckRuleSet& rules);
LfSet ApplyDistributivityCheck(const LfSet& lfs);
LfSet ApplyAssociativityCheck(const LfSet& lfs, const std::set<std::string>& associative);
LfSet ApplyCheck(Check c, const LfSet& lfs, const CheckRuleSet& rules,
                 const KindOracle& oracle);

// Flattens chains of the same associative predicate into one n-ary node.
TermPtr FlattenAssociative(const TermPtr& t, const std::set<std::string>& associative);
// Rebuilds flattened n-ary associative nodes as left-deep binary trees.
TermPtr LeftDeep(const TermPtr& t, const std::set<std::string>& associative);
// Factors @And/@Or of same-shaped applications that differ in one argument:
// @And(P(a,c),P(b,c)) -> P(@And(a,b),c). Applied bottom-up to a fixpoint.
TermPtr Undistribute(const TermPtr& t);

struct WinnowOutcome {
  enum class Kind { kUnique, kAmbiguous, kEmpty };
  Kind kind = Kind::kEmpty;
  LfSet lfs;  // survivors; exactly one when kUnique
  std::vector<std::pair<std::string, size_t>> stage_counts;  // "base" first
};

const char* OutcomeName(WinnowOutcome::Kind k);

WinnowOutcome Winnow(const LfSet& lfs, const CheckRuleSet& rules,
                     const KindOracle& oracle);

// Each check applied alone to the base set; entry i is the count after
// kPipelineOrder[i].
std::vector<size_t> IsolatedCounts(const LfSet& lfs, const CheckRuleSet& rules,
                                   const KindOracle& oracle);

}  // namespace rfcc

#endif  // RFCC_DISAMBIGUATOR_H_

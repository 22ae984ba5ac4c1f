#include "rfcc/disambiguator.h"

#include <algorithm>
#include <functional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace rfcc {

// ---------------------------------------------------------------------------
// Kinds

std::string KindOracle::Normalize(std::string_view name) {
  std::string out = ToLower(Trim(name));
  for (char& c : out)
    if (c == ' ' || c == '-') c = '_';
  return out;
}

ArgKind KindOracle::KindOf(const TermPtr& t) const {
  switch (t->kind) {
    case Term::Kind::kNum:
      return ArgKind::kNumber;
    case Term::Kind::kPred:
      return t->name == "@Num" ? ArgKind::kNumber : ArgKind::kPredicate;
    case Term::Kind::kStr: {
      std::string s = Normalize(t->name);
      if (functions.count(s)) return ArgKind::kFunctionName;
      if (fields.count(s)) return ArgKind::kFieldName;
      const std::string suffix = "_field";
      if (s.size() > suffix.size() &&
          s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0 &&
          fields.count(s.substr(0, s.size() - suffix.size())))
        return ArgKind::kFieldName;
      int64_t v;
      if (ParseInteger(s, &v)) return ArgKind::kNumber;
      return ArgKind::kString;
    }
    default:
      return ArgKind::kAny;
  }
}

bool KindOracle::Matches(const TermPtr& t, const KindSpec& spec) const {
  if (spec.kind == ArgKind::kAny) return true;
  if (spec.kind == ArgKind::kPredicate) {
    if (t->kind != Term::Kind::kPred) return false;
    if (spec.predicate.empty()) return t->name != "@Num";
    return t->name == spec.predicate;
  }
  return KindOf(t) == spec.kind;
}

// ---------------------------------------------------------------------------
// Rule file

const char* CheckName(Check c) {
  switch (c) {
    case Check::kType: return "type";
    case Check::kArgOrder: return "argorder";
    case Check::kPredOrder: return "predorder";
    case Check::kDistributivity: return "distributivity";
    case Check::kAssociativity: return "associativity";
  }
  return "?";
}

namespace {

std::vector<std::string> Fields(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

bool IsKindName(const std::string& s) {
  try {
    ParseKindSpec(s);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

CheckRuleSet CheckRuleSet::Parse(std::string_view text, const std::string& origin,
                                 const PredicateRegistry* registry) {
  CheckRuleSet rules;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  std::vector<std::pair<int, std::string>> referenced;
  auto need_pred = [&](const std::string& p) {
    if (p.size() < 2 || p[0] != '@')
      throw LoadError(origin, lineno, "expected a predicate name, got '" + p + "'");
    referenced.emplace_back(lineno, p);
  };
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::vector<std::string> f = Fields(line);
    if (f.empty()) continue;
    const std::string& verb = f[0];
    try {
      if (verb == "type") {
        if (f.size() < 4) throw std::invalid_argument("type rule needs predicate, position, kinds");
        TypeRule r;
        r.predicate = f[1];
        need_pred(r.predicate);
        r.position = std::stoi(f[2]);
        if (r.position < 1) throw std::invalid_argument("positions are 1-based");
        for (size_t i = 3; i < f.size(); ++i) r.allowed.push_back(ParseKindSpec(f[i]));
        for (const auto& k : r.allowed)
          if (!k.predicate.empty()) need_pred(k.predicate);
        rules.type_rules.push_back(std::move(r));
      } else if (verb == "argorder") {
        if (f.size() != 3) throw std::invalid_argument("argorder rule needs predicate and forbid(...)");
        ArgOrderRule r;
        r.predicate = f[1];
        need_pred(r.predicate);
        const std::string& p = f[2];
        if (p.rfind("forbid(", 0) != 0 || p.back() != ')')
          throw std::invalid_argument("expected forbid(a,b,...)");
        std::string inner = p.substr(7, p.size() - 8);
        std::stringstream ss(inner);
        std::string elem;
        while (std::getline(ss, elem, ',')) r.pattern.push_back(Trim(elem));
        if (r.pattern.empty()) throw std::invalid_argument("empty forbid pattern");
        rules.arg_order_rules.push_back(std::move(r));
      } else if (verb == "predorder") {
        if (f.size() < 4 || f[1] != "forbid")
          throw std::invalid_argument("expected 'predorder forbid parent=@P child=@Q [pos=N]'");
        PredOrderRule r;
        for (size_t i = 2; i < f.size(); ++i) {
          size_t eq = f[i].find('=');
          if (eq == std::string::npos) throw std::invalid_argument("expected key=value");
          std::string k = f[i].substr(0, eq), v = f[i].substr(eq + 1);
          if (k == "parent") r.parent = v;
          else if (k == "child") r.child = v;
          else if (k == "pos") r.position = v == "any" ? 0 : std::stoi(v);
          else throw std::invalid_argument("unknown key '" + k + "'");
        }
        need_pred(r.parent);
        need_pred(r.child);
        rules.pred_order_rules.push_back(std::move(r));
      } else if (verb == "assoc") {
        if (f.size() < 2) throw std::invalid_argument("assoc needs predicates");
        for (size_t i = 1; i < f.size(); ++i) {
          need_pred(f[i]);
          rules.associative.insert(f[i]);
        }
      } else if (verb == "class") {
        if (f.size() < 3) throw std::invalid_argument("class needs a name and predicates");
        if (IsKindName(f[1])) throw std::invalid_argument("class name shadows a kind");
        for (size_t i = 2; i < f.size(); ++i) {
          need_pred(f[i]);
          rules.classes[f[1]].insert(f[i]);
        }
      } else {
        throw std::invalid_argument("unknown rule '" + verb + "'");
      }
    } catch (const LoadError&) {
      throw;
    } catch (const std::exception& e) {
      throw LoadError(origin, lineno, e.what());
    }
  }
  for (const auto& r : rules.arg_order_rules) {
    for (const auto& e : r.pattern) {
      if (e != "_" && !rules.classes.count(e) && !IsKindName(e))
        throw LoadError(origin, 0, "unknown pattern element '" + e + "' in argorder " + r.predicate);
    }
  }
  if (registry) {
    for (const auto& [ln, p] : referenced)
      if (!registry->Has(p)) throw LoadError(origin, ln, "unregistered predicate " + p);
  }
  return rules;
}

CheckRuleSet CheckRuleSet::Load(const std::string& path, const PredicateRegistry* registry) {
  return Parse(ReadFile(path), path, registry);
}

void CheckRuleSet::Merge(const CheckRuleSet& o) {
  type_rules.insert(type_rules.end(), o.type_rules.begin(), o.type_rules.end());
  arg_order_rules.insert(arg_order_rules.end(), o.arg_order_rules.begin(),
                         o.arg_order_rules.end());
  pred_order_rules.insert(pred_order_rules.end(), o.pred_order_rules.begin(),
                          o.pred_order_rules.end());
  associative.insert(o.associative.begin(), o.associative.end());
  for (const auto& [k, v] : o.classes) classes[k].insert(v.begin(), v.end());
}

// ---------------------------------------------------------------------------
// Checks

namespace {

bool AnyNode(const TermPtr& t, const std::function<bool(const TermPtr&)>& pred) {
  if (pred(t)) return true;
  for (const auto& a : t->args)
    if (AnyNode(a, pred)) return true;
  return false;
}

LfSet Without(const LfSet& lfs, const std::function<bool(const TermPtr&)>& bad) {
  LfSet out;
  for (const auto& lf : lfs)
    if (!bad(lf)) out.push_back(lf);
  return out;
}

bool PatternElemMatches(const TermPtr& arg, const std::string& elem,
                        const CheckRuleSet& rules, const KindOracle& oracle) {
  if (elem == "_") return true;
  auto cls = rules.classes.find(elem);
  if (cls != rules.classes.end())
    return arg->kind == Term::Kind::kPred && cls->second.count(arg->name);
  return oracle.Matches(arg, ParseKindSpec(elem));
}

// Order-insensitive key for @And/@Or, used to compare conjunct sets.
std::string CommKey(const TermPtr& t) {
  if (t->kind != Term::Kind::kPred) return TermKey(t);
  if (t->name == "@And" || t->name == "@Or") {
    std::vector<std::string> parts;
    std::function<void(const TermPtr&)> collect = [&](const TermPtr& n) {
      if (n->kind == Term::Kind::kPred && n->name == t->name) {
        for (const auto& a : n->args) collect(a);
      } else {
        parts.push_back(CommKey(n));
      }
    };
    collect(t);
    std::sort(parts.begin(), parts.end());
    std::string out = t->name + "{";
    for (const auto& p : parts) out += p + ";";
    return out + "}";
  }
  std::string out = t->name + "(";
  for (const auto& a : t->args) out += CommKey(a) + ",";
  return out + ")";
}

}  // namespace

LfSet ApplyTypeChecks(const LfSet& lfs, const CheckRuleSet& rules,
                      const KindOracle& oracle) {
  std::map<std::pair<std::string, int>, std::vector<KindSpec>> allow;
  for (const auto& r : rules.type_rules) {
    auto& v = allow[{r.predicate, r.position}];
    v.insert(v.end(), r.allowed.begin(), r.allowed.end());
  }
  auto violates = [&](const TermPtr& n) {
    if (n->kind != Term::Kind::kPred) return false;
    for (size_t i = 0; i < n->args.size(); ++i) {
      auto it = allow.find({n->name, static_cast<int>(i + 1)});
      if (it == allow.end()) continue;
      bool ok = std::any_of(it->second.begin(), it->second.end(),
                            [&](const KindSpec& k) { return oracle.Matches(n->args[i], k); });
      if (!ok) return true;
    }
    return false;
  };
  return Without(lfs, [&](const TermPtr& lf) { return AnyNode(lf, violates); });
}

LfSet ApplyArgOrderChecks(const LfSet& lfs, const CheckRuleSet& rules,
                          const KindOracle& oracle) {
  auto violates = [&](const TermPtr& n) {
    if (n->kind != Term::Kind::kPred) return false;
    for (const auto& r : rules.arg_order_rules) {
      if (r.predicate != n->name || n->args.size() < r.pattern.size()) continue;
      bool all = true;
      for (size_t i = 0; i < r.pattern.size() && all; ++i)
        all = PatternElemMatches(n->args[i], r.pattern[i], rules, oracle);
      if (all) return true;
    }
    return false;
  };
  return Without(lfs, [&](const TermPtr& lf) { return AnyNode(lf, violates); });
}

LfSet ApplyPredOrderChecks(const LfSet& lfs, const CheckRuleSet& rules) {
  auto violates = [&](const TermPtr& n) {
    if (n->kind != Term::Kind::kPred) return false;
    for (const auto& r : rules.pred_order_rules) {
      if (r.parent != n->name) continue;
      for (size_t i = 0; i < n->args.size(); ++i) {
        if (r.position != 0 && static_cast<int>(i + 1) != r.position) continue;
        if (n->args[i]->IsPred(r.child)) return true;
      }
    }
    return false;
  };
  return Without(lfs, [&](const TermPtr& lf) { return AnyNode(lf, violates); });
}

TermPtr Undistribute(const TermPtr& t) {
  if (t->kind != Term::Kind::kPred) return t;
  std::vector<TermPtr> args;
  for (const auto& a : t->args) args.push_back(Undistribute(a));
  TermPtr node = Pred(t->name, args);
  if ((t->name != "@And" && t->name != "@Or") || args.size() < 2) return node;
  const TermPtr& first = args[0];
  if (first->kind != Term::Kind::kPred || first->name == t->name || first->name == "@Num")
    return node;
  size_t arity = first->args.size();
  for (const auto& a : args)
    if (a->kind != Term::Kind::kPred || a->name != first->name || a->args.size() != arity)
      return node;
  int diff = -1;
  for (size_t j = 0; j < arity; ++j) {
    bool same = true;
    for (const auto& a : args) same = same && TermKey(a->args[j]) == TermKey(first->args[j]);
    if (same) continue;
    if (diff >= 0) return node;
    diff = static_cast<int>(j);
  }
  if (diff < 0) return node;
  std::vector<TermPtr> conjuncts;
  for (const auto& a : args) conjuncts.push_back(a->args[diff]);
  std::vector<TermPtr> factored = first->args;
  factored[diff] = Pred(t->name, conjuncts);
  return Undistribute(Pred(first->name, factored));
}

LfSet ApplyDistributivityCheck(const LfSet& lfs) {
  std::unordered_set<std::string> plain;
  std::vector<bool> distributed(lfs.size());
  std::vector<std::string> factored(lfs.size());
  for (size_t i = 0; i < lfs.size(); ++i) {
    TermPtr u = Undistribute(lfs[i]);
    distributed[i] = TermKey(u) != TermKey(lfs[i]);
    factored[i] = CommKey(u);
    if (!distributed[i]) plain.insert(factored[i]);
  }
  LfSet out;
  for (size_t i = 0; i < lfs.size(); ++i)
    if (!distributed[i] || !plain.count(factored[i])) out.push_back(lfs[i]);
  return out;
}

TermPtr FlattenAssociative(const TermPtr& t, const std::set<std::string>& associative) {
  if (t->kind != Term::Kind::kPred) return t;
  std::vector<TermPtr> args;
  bool assoc = associative.count(t->name) > 0;
  for (const auto& a : t->args) {
    TermPtr fa = FlattenAssociative(a, associative);
    if (assoc && fa->kind == Term::Kind::kPred && fa->name == t->name) {
      args.insert(args.end(), fa->args.begin(), fa->args.end());
    } else {
      args.push_back(fa);
    }
  }
  return Pred(t->name, std::move(args));
}

TermPtr LeftDeep(const TermPtr& t, const std::set<std::string>& associative) {
  if (t->kind != Term::Kind::kPred) return t;
  std::vector<TermPtr> args;
  for (const auto& a : t->args) args.push_back(LeftDeep(a, associative));
  if (!associative.count(t->name) || args.size() <= 2) return Pred(t->name, args);
  TermPtr acc = Pred(t->name, {args[0], args[1]});
  for (size_t i = 2; i < args.size(); ++i) acc = Pred(t->name, {acc, args[i]});
  return acc;
}

LfSet ApplyAssociativityCheck(const LfSet& lfs, const std::set<std::string>& associative) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<TermPtr>> classes;
  for (const auto& lf : lfs) {
    std::string key = TermKey(FlattenAssociative(lf, associative));
    auto [it, inserted] = classes.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(lf);
  }
  LfSet out;
  for (const auto& key : order) {
    const auto& members = classes[key];
    std::string canon =
        TermKey(LeftDeep(FlattenAssociative(members[0], associative), associative));
    TermPtr pick = members[0];
    for (const auto& m : members)
      if (TermKey(m) == canon) pick = m;
    out.push_back(pick);
  }
  return out;
}

LfSet ApplyCheck(Check c, const LfSet& lfs, const CheckRuleSet& rules,
                 const KindOracle& oracle) {
  switch (c) {
    case Check::kType: return ApplyTypeChecks(lfs, rules, oracle);
    case Check::kArgOrder: return ApplyArgOrderChecks(lfs, rules, oracle);
    case Check::kPredOrder: return ApplyPredOrderChecks(lfs, rules);
    case Check::kDistributivity: return ApplyDistributivityCheck(lfs);
    case Check::kAssociativity: return ApplyAssociativityCheck(lfs, rules.associative);
  }
  return lfs;
}

const char* OutcomeName(WinnowOutcome::Kind k) {
  switch (k) {
    case WinnowOutcome::Kind::kUnique: return "unique";
    case WinnowOutcome::Kind::kAmbiguous: return "ambiguous";
    case WinnowOutcome::Kind::kEmpty: return "empty";
  }
  return "?";
}

WinnowOutcome Winnow(const LfSet& lfs, const CheckRuleSet& rules,
                     const KindOracle& oracle) {
  WinnowOutcome out;
  LfSet cur = lfs;
  out.stage_counts.emplace_back("base", cur.size());
  for (Check c : kPipelineOrder) {
    cur = ApplyCheck(c, cur, rules, oracle);
    out.stage_counts.emplace_back(CheckName(c), cur.size());
  }
  out.lfs = cur;
  out.kind = cur.empty()       ? WinnowOutcome::Kind::kEmpty
             : cur.size() == 1 ? WinnowOutcome::Kind::kUnique
                               : WinnowOutcome::Kind::kAmbiguous;
  return out;
}

std::vector<size_t> IsolatedCounts(const LfSet& lfs, const CheckRuleSet& rules,
                                   const KindOracle& oracle) {
  std::vector<size_t> out;
  for (Check c : kPipelineOrder) out.push_back(ApplyCheck(c, lfs, rules, oracle).size());
  return out;
}

}  // namespace rfcc

#include "rfcc/codegen.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <regex>
#include <sstream>

#include "json.hpp"

namespace rfcc {

using json = nlohmann::json;

namespace {

std::string KindLabel(CodegenError::Kind k) {
  switch (k) {
    case CodegenError::Kind::kHandlerMissing: return "no handler for ";
    case CodegenError::Kind::kUnresolvedTerm: return "unresolved term ";
    case CodegenError::Kind::kAdviceTarget: return "advice target not found: ";
  }
  return "";
}

std::string Trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> SplitComma(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, ',')) {
    part = Trim(part);
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

[[noreturn]] void Unresolved(const std::string& what) {
  throw CodegenError(CodegenError::Kind::kUnresolvedTerm, what);
}

[[noreturn]] void NoHandler(const std::string& what) {
  throw CodegenError(CodegenError::Kind::kHandlerMissing, what);
}

ChecksumRange::End ParseEnd(const std::string& s, size_t* bytes) {
  if (s == "end_of_header") return ChecksumRange::End::kEndOfHeader;
  if (s == "end_of_message") return ChecksumRange::End::kEndOfMessage;
  *bytes = std::stoul(s);
  return ChecksumRange::End::kFixedBytes;
}

}  // namespace

CodegenError::CodegenError(Kind kind, const std::string& subject)
    : std::runtime_error(KindLabel(kind) + subject), kind_(kind), subject_(subject) {}

std::string BindingKey(std::string_view term) { return FieldKey(term); }

// ---------------------------------------------------------------------------
// Static context

StaticContext StaticContext::Parse(std::string_view text, const std::string& origin) {
  StaticContext c;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    size_t arrow = line.find("->");
    if (arrow == std::string::npos) fail("expected 'term -> target'");
    std::string lhs = Trim(line.substr(0, arrow));
    std::string rhs = Trim(line.substr(arrow + 2));
    if (lhs.empty() || rhs.empty()) fail("empty term or target");

    if (lhs.rfind("range ", 0) == 0) {
      std::string layer = Trim(lhs.substr(6));
      size_t dots = rhs.find("..");
      if (dots == std::string::npos) fail("range needs 'field..end'");
      ChecksumRange r;
      r.header = layer;
      r.field = FieldKey(rhs.substr(0, dots));
      try {
        r.end = ParseEnd(Trim(rhs.substr(dots + 2)), &r.fixed_bytes);
      } catch (const std::exception&) {
        fail("bad range end '" + rhs.substr(dots + 2) + "'");
      }
      c.ranges[layer] = r;
      continue;
    }

    std::string key = BindingKey(lhs);
    auto prefixed = [&](std::string_view p) { return rhs.rfind(p, 0) == 0; };
    if (prefixed("fn:")) {
      c.functions[key] = rhs.substr(3);
    } else if (prefixed("os:")) {
      c.services[key] = rhs.substr(3);
    } else if (prefixed("state:")) {
      c.state[key] = rhs.substr(6);
    } else if (prefixed("const:")) {
      try {
        c.constants[key] = std::stoll(rhs.substr(6));
      } catch (const std::exception&) {
        fail("bad constant '" + rhs + "'");
      }
    } else if (prefixed("alias:")) {
      c.aliases[key] = Trim(rhs.substr(6));
    } else if (prefixed("scope:")) {
      c.scopes[key] = rhs.substr(6);
    } else {
      std::vector<std::string> paths = SplitComma(rhs);
      for (const auto& p : paths)
        if (p.find('.') == std::string::npos) fail("field target '" + p + "' needs layer.field");
      c.fields[key] = paths;
    }
  }
  return c;
}

StaticContext StaticContext::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str(), path);
}

void StaticContext::Merge(const StaticContext& o) {
  for (const auto& [k, v] : o.fields) fields[k] = v;
  for (const auto& [k, v] : o.functions) functions[k] = v;
  for (const auto& [k, v] : o.services) services[k] = v;
  for (const auto& [k, v] : o.state) state[k] = v;
  for (const auto& [k, v] : o.constants) constants[k] = v;
  for (const auto& [k, v] : o.aliases) aliases[k] = v;
  for (const auto& [k, v] : o.scopes) scopes[k] = v;
  for (const auto& [k, v] : o.ranges) ranges[k] = v;
}

std::set<std::string> StaticContext::FunctionNames() const {
  std::set<std::string> out;
  for (const auto& [k, v] : functions) out.insert(v);
  return out;
}

std::set<std::string> StaticContext::StateNames() const {
  std::set<std::string> out;
  for (const auto& [k, v] : state) out.insert(v);
  return out;
}

// ---------------------------------------------------------------------------
// Resolver

Resolver::Resolver(const DynamicContext& dyn, const HeaderLayout* layout,
                   const StaticContext& stat)
    : dyn_(dyn), layout_(layout), stat_(stat), layer_(FieldKey(dyn.protocol)) {}

std::optional<Target> Resolver::Resolve(const std::string& term) const {
  return ResolveKey(BindingKey(term), 0);
}

std::optional<Target> Resolver::ResolveKey(const std::string& key, int depth) const {
  if (depth > 8 || key.empty()) return std::nullopt;

  if (layout_) {
    std::vector<std::string> candidates = {key};
    auto strip_suffix = [](const std::string& s, std::string_view suf) {
      return s.size() > suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0
                 ? s.substr(0, s.size() - suf.size())
                 : std::string();
    };
    std::string prefix = layer_ + "_";
    std::string no_suffix = strip_suffix(key, "_field");
    if (!no_suffix.empty()) candidates.push_back(no_suffix);
    for (size_t i = 0, n = candidates.size(); i < n; ++i)
      if (candidates[i].rfind(prefix, 0) == 0 && candidates[i].size() > prefix.size())
        candidates.push_back(candidates[i].substr(prefix.size()));
    if ((key == "field" || key == "this_field") && !dyn_.field.empty())
      candidates.push_back(dyn_.field);
    for (const auto& c : candidates) {
      int idx = layout_->IndexOf(c);
      if (idx < 0) continue;
      Target t;
      t.kind = Target::Kind::kField;
      t.paths = {layer_ + "." + FieldKey(layout_->fields[static_cast<size_t>(idx)].name)};
      t.dynamic = true;
      return t;
    }
  }

  if (auto it = stat_.aliases.find(key); it != stat_.aliases.end())
    return ResolveKey(BindingKey(it->second), depth + 1);
  Target t;
  if (auto it = stat_.fields.find(key); it != stat_.fields.end()) {
    t.kind = Target::Kind::kField;
    t.paths = it->second;
    return t;
  }
  if (auto it = stat_.services.find(key); it != stat_.services.end()) {
    t.kind = Target::Kind::kService;
    t.name = it->second;
    return t;
  }
  if (auto it = stat_.functions.find(key); it != stat_.functions.end()) {
    t.kind = Target::Kind::kFunction;
    t.name = it->second;
    return t;
  }
  if (auto it = stat_.state.find(key); it != stat_.state.end()) {
    t.kind = Target::Kind::kField;
    t.paths = {it->second};
    return t;
  }
  if (auto it = stat_.constants.find(key); it != stat_.constants.end()) {
    t.kind = Target::Kind::kConstant;
    t.value = it->second;
    return t;
  }
  if (auto it = stat_.scopes.find(key); it != stat_.scopes.end()) {
    t.kind = Target::Kind::kScope;
    t.name = it->second;
    return t;
  }
  return std::nullopt;
}

namespace {

bool EndsWith(const std::string& s, std::string_view suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

// Words that only point at the object they qualify ("the value of X").
bool IsTransparentHead(const std::string& key) {
  return key == "value" || key == "contents" || key == "content";
}

std::optional<Target> ResolveTerm(const Resolver& r, const TermPtr& t);

std::optional<Target> ResolveOf(const Resolver& r, const TermPtr& head, const TermPtr& qual) {
  std::optional<Target> q = ResolveTerm(r, qual);
  if (q && q->kind == Target::Kind::kScope) {
    std::optional<Target> h = ResolveTerm(r, head);
    if (!h || h->kind != Target::Kind::kField) return std::nullopt;
    for (auto& p : h->paths)
      if (p.rfind(q->name + ".", 0) != 0) p = q->name + "." + p;
    h->dynamic = false;
    return h;
  }
  if (head->kind == Term::Kind::kStr && IsTransparentHead(BindingKey(head->name))) return q;
  if (head->kind == Term::Kind::kStr && qual->kind == Term::Kind::kStr) {
    if (auto whole = r.Resolve(head->name + " of " + qual->name)) return whole;
  }
  if (qual->kind == Term::Kind::kStr) {
    std::string k = BindingKey(qual->name);
    if (EndsWith(k, "message") || EndsWith(k, "header") || k == r.layer())
      return ResolveTerm(r, head);
  }
  return std::nullopt;
}

std::optional<Target> ResolveTerm(const Resolver& r, const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::kStr: return r.Resolve(t->name);
    case Term::Kind::kNum: {
      Target c;
      c.kind = Target::Kind::kConstant;
      c.value = t->num;
      return c;
    }
    case Term::Kind::kPred:
      if (t->IsPred("@Of") && t->args.size() == 2) return ResolveOf(r, t->args[0], t->args[1]);
      if (t->IsPred("@Num") && !t->args.empty() && t->args[0]->kind == Term::Kind::kNum) {
        Target c;
        c.kind = Target::Kind::kConstant;
        c.value = t->args[0]->num;
        return c;
      }
      if (t->IsPred("@And")) {
        Target u;
        u.kind = Target::Kind::kField;
        // Conjunction arguments arrive right-to-left; report source order.
        for (auto it = t->args.rbegin(); it != t->args.rend(); ++it) {
          std::optional<Target> part = ResolveTerm(r, *it);
          if (!part || part->kind != Target::Kind::kField) return std::nullopt;
          u.paths.insert(u.paths.end(), part->paths.begin(), part->paths.end());
        }
        return u;
      }
      return std::nullopt;
    default: return std::nullopt;
  }
}

std::string Describe(const TermPtr& t) {
  return t->kind == Term::Kind::kStr ? t->name : ToString(t, PrintStyle::kFigure);
}

}  // namespace

std::vector<std::string> Resolver::FieldPaths(const TermPtr& t) const {
  std::optional<Target> target = ResolveTerm(*this, t);
  if (!target || target->kind != Target::Kind::kField) Unresolved(Describe(t));
  return target->paths;
}

std::string Resolver::FieldPath(const TermPtr& t) const {
  std::vector<std::string> paths = FieldPaths(t);
  if (paths.size() != 1) Unresolved(Describe(t));
  return paths[0];
}

// ---------------------------------------------------------------------------
// Handlers

size_t FilterNonActionable(std::vector<TermPtr>& lfs) {
  size_t before = lfs.size();
  std::erase_if(lfs, [](const TermPtr& t) { return t && t->IsPred("@AdvComment"); });
  return before - lfs.size();
}

namespace {

class Converter {
 public:
  Converter(const Resolver& r, const HeaderLayout* layout) : r_(r), layout_(layout) {}

  void Statement(const TermPtr& t, Converted& out) {
    if (t->kind != Term::Kind::kPred) NoHandler("<" + Describe(t) + ">");
    auto it = Statements().find(t->name);
    if (it == Statements().end()) NoHandler(t->name);
    it->second(*this, t, out);
  }

  Expr Condition(const TermPtr& t) {
    if (t->kind != Term::Kind::kPred) NoHandler("<" + Describe(t) + ">");
    auto it = Conditions().find(t->name);
    if (it == Conditions().end()) NoHandler(t->name);
    return it->second(*this, t);
  }

  static std::set<std::string> Handled() {
    std::set<std::string> out;
    for (const auto& [k, v] : Statements()) out.insert(k);
    for (const auto& [k, v] : Conditions()) out.insert(k);
    return out;
  }

 private:
  using StmtFn = std::function<void(Converter&, const TermPtr&, Converted&)>;
  using CondFn = std::function<Expr(Converter&, const TermPtr&)>;

  static void Arity(const TermPtr& t, size_t n) {
    if (t->args.size() != n) NoHandler(t->name + "/" + std::to_string(t->args.size()));
  }

  std::vector<Instruction> Block(const TermPtr& t) {
    Converted c;
    Statement(t, c);
    if (!c.advice.empty()) NoHandler("@AdvBefore (nested)");
    return c.body;
  }

  Expr Value(const TermPtr& t) {
    if (t->IsPred("@Timestamp")) return Expr::Service("timestamp");
    std::optional<Target> target = ResolveTerm(r_, t);
    if (!target) Unresolved(Describe(t));
    switch (target->kind) {
      case Target::Kind::kConstant: return Expr::Const(target->value);
      case Target::Kind::kService: return Expr::Service(target->name);
      case Target::Kind::kField:
        if (target->paths.size() == 1) return Expr::Field(target->paths[0]);
        break;
      default: break;
    }
    Unresolved(Describe(t));
  }

  bool IsChecksumFunction(const TermPtr& t) const {
    if (!t->IsPred("@Action") || t->args.empty() || t->args[0]->kind != Term::Kind::kStr)
      return false;
    auto it = r_.stat().functions.find(BindingKey(t->args[0]->name));
    return it != r_.stat().functions.end() &&
           (it->second == "ones_complement" || it->second == "ones_complement_sum");
  }

  bool ContainsChecksumFunction(const TermPtr& t) const {
    if (IsChecksumFunction(t)) return true;
    for (const auto& a : t->args)
      if (ContainsChecksumFunction(a)) return true;
    return false;
  }

  ChecksumRange DefaultRange() const {
    auto it = r_.stat().ranges.find(r_.layer());
    if (it != r_.stat().ranges.end()) return it->second;
    if (!layout_ || layout_->fields.empty()) Unresolved("checksum range for " + r_.layer());
    ChecksumRange range;
    range.header = r_.layer();
    range.field = FieldKey(layout_->fields[0].name);
    return range;
  }

  static std::string RoleOf(const TermPtr& t) {
    if (t->args.empty() || t->args[0]->kind != Term::Kind::kStr) return "";
    std::string k = BindingKey(t->args[0]->name);
    return k == "sender" || k == "receiver" ? k : "";
  }

  // --- statements ---

  static void Is(Converter& c, const TermPtr& t, Converted& out) {
    Arity(t, 2);
    const TermPtr& value = t->args[1];
    std::string dst = c.r_.FieldPath(t->args[0]);
    if (value->IsPred("@Timestamp")) {
      Instruction in = Instruction::SetField(dst, Expr::Service("timestamp"));
      in.role = RoleOf(value);
      out.body.push_back(in);
      return;
    }
    if (c.ContainsChecksumFunction(value)) {
      out.body.push_back(Instruction::ComputeChecksum(dst, c.DefaultRange()));
      return;
    }
    Expr v = c.Value(value);
    if (v.kind == Expr::Kind::kField)
      out.body.push_back(Instruction::CopyField(dst, v.name));
    else
      out.body.push_back(Instruction::SetField(dst, v));
  }

  static void StartsWith(Converter& c, const TermPtr& t, Converted& out) {
    Arity(t, 2);
    std::string anchor = c.r_.FieldPath(t->args[1]);
    size_t dot = anchor.rfind('.');
    Converted inner;
    c.Statement(t->args[0], inner);
    bool applied = false;
    for (auto& in : inner.body) {
      if (in.kind != Instruction::Kind::kComputeChecksum) continue;
      in.range.header = anchor.substr(0, dot);
      in.range.field = anchor.substr(dot + 1);
      applied = true;
    }
    if (!applied) NoHandler("@StartsWith without a checksum");
    out.body.insert(out.body.end(), inner.body.begin(), inner.body.end());
    out.advice.insert(out.advice.end(), inner.advice.begin(), inner.advice.end());
  }

  // "... and ending at the end of the ICMP message": closes the range of the
  // checksum computed by the inner statement.
  static void EndsAt(Converter& c, const TermPtr& t, Converted& out) {
    Arity(t, 2);
    if (t->args[1]->kind != Term::Kind::kStr) Unresolved("range end " + Describe(t->args[1]));
    std::string end = BindingKey(t->args[1]->name);
    ChecksumRange::End kind;
    if (end.ends_with("message"))
      kind = ChecksumRange::End::kEndOfMessage;
    else if (end.ends_with("header"))
      kind = ChecksumRange::End::kEndOfHeader;
    else
      Unresolved("range end " + end);
    Converted inner;
    c.Statement(t->args[0], inner);
    bool applied = false;
    for (auto& in : inner.body) {
      if (in.kind != Instruction::Kind::kComputeChecksum) continue;
      in.range.end = kind;
      applied = true;
    }
    if (!applied) NoHandler("@EndsAt without a checksum");
    out.body.insert(out.body.end(), inner.body.begin(), inner.body.end());
    out.advice.insert(out.advice.end(), inner.advice.begin(), inner.advice.end());
  }

  static void And(Converter& c, const TermPtr& t, Converted& out) {
    // Conjunctions are built right-to-left; emit in source order.
    for (auto it = t->args.rbegin(); it != t->args.rend(); ++it) c.Statement(*it, out);
  }

  static void If(Converter& c, const TermPtr& t, Converted& out) {
    if (t->args.size() < 2) NoHandler("@If/" + std::to_string(t->args.size()));
    Expr cond = c.Condition(t->args[0]);
    std::vector<Instruction> then = c.Block(t->args[1]);
    out.body.push_back(Instruction::If(cond, then));
  }

  // "send X with F set": the settings come first.
  static void With(Converter& c, const TermPtr& t, Converted& out) {
    Arity(t, 2);
    c.Statement(t->args[1], out);
    c.Statement(t->args[0], out);
  }

  static void AdvBefore(Converter& c, const TermPtr& t, Converted& out) {
    Arity(t, 2);
    const TermPtr& fn = t->args[0];
    if (!fn->IsPred("@Action") || fn->args.size() != 2 || fn->args[0]->kind != Term::Kind::kStr)
      NoHandler("@AdvBefore target " + Describe(fn));
    Advice a;
    a.function = BindingKey(fn->args[0]->name);
    a.object = c.r_.FieldPath(fn->args[1]);
    a.instructions = c.Block(t->args[1]);
    out.advice.push_back(std::move(a));
  }

  static void Action(Converter& c, const TermPtr& t, Converted& out) {
    if (t->args.empty() || t->args[0]->kind != Term::Kind::kStr)
      NoHandler("@Action without verb");
    std::string verb = BindingKey(t->args[0]->name);
    if (t->args.size() == 1) {
      auto fn = c.r_.Resolve(verb);
      if (!fn || fn->kind != Target::Kind::kFunction) Unresolved(t->args[0]->name);
      out.body.push_back(Instruction::Call(fn->name));
      return;
    }
    const TermPtr& obj = t->args[1];
    if (verb == "compute" || verb == "recompute" || verb == "calculate") {
      std::string dst = c.r_.FieldPath(obj);
      if (dst.find("checksum") == std::string::npos) Unresolved(verb + " " + Describe(obj));
      out.body.push_back(Instruction::ComputeChecksum(dst, c.DefaultRange()));
      return;
    }
    if (verb == "reverse" || verb == "swap" || verb == "exchange") {
      std::vector<std::string> p = c.r_.FieldPaths(obj);
      if (p.size() != 2) Unresolved(verb + " " + Describe(obj));
      out.body.push_back(Instruction::SwapFields(p[0], p[1]));
      return;
    }
    if (verb == "return" || verb == "echo") {
      for (const auto& p : c.r_.FieldPaths(obj))
        out.body.push_back(Instruction::CopyField(p, "orig." + p));
      return;
    }
    if (obj->kind == Term::Kind::kStr) {
      auto fn = c.r_.Resolve(verb + " " + obj->name);
      if (fn && fn->kind == Target::Kind::kFunction) {
        out.body.push_back(Instruction::Call(fn->name));
        return;
      }
    }
    auto fn = c.r_.Resolve(verb);
    if (fn && fn->kind == Target::Kind::kFunction) {
      std::vector<Expr> args;
      for (size_t i = 1; i < t->args.size(); ++i) args.push_back(c.Value(t->args[i]));
      out.body.push_back(Instruction::Call(fn->name, args));
      return;
    }
    Unresolved(t->args[0]->name + " " + Describe(obj));
  }

  static void May(Converter& c, const TermPtr& t, Converted& out) {
    Arity(t, 1);
    for (const auto& in : c.Block(t->args[0])) {
      Instruction note = Instruction::Comment("optional: " + ToString(in));
      note.role = in.role;
      out.body.push_back(note);
    }
  }

  static void Call(Converter& c, const TermPtr& t, Converted& out) {
    Arity(t, 1);
    std::optional<Target> fn = ResolveTerm(c.r_, t->args[0]);
    if (!fn || fn->kind != Target::Kind::kFunction) Unresolved(Describe(t->args[0]));
    out.body.push_back(Instruction::Call(fn->name));
  }

  static void For(Converter& c, const TermPtr& t, Converted& out) {
    Arity(t, 2);
    if (c.r_.dyn().field.empty()) Unresolved("value code outside a field description");
    std::string dst = c.r_.FieldPath(Str(c.r_.dyn().field));
    Instruction in = Instruction::SetField(dst, c.Value(t->args[0]));
    std::string msg = Describe(t->args[1]);
    std::transform(msg.begin(), msg.end(), msg.begin(), ::tolower);
    in.role = msg.find("reply") != std::string::npos ? "receiver" : "sender";
    out.body.push_back(in);
  }

  static void Nothing(Converter&, const TermPtr&, Converted&) {}

  // --- conditions ---

  // "x is not A or B" compares against each value: x != A && x != B.
  static Expr CmpOf(Converter& c, const TermPtr& t, const char* op) {
    Arity(t, 2);
    const TermPtr& rhs = t->args[1];
    if (rhs->IsPred("@Or") || rhs->IsPred("@And")) {
      std::vector<Expr> parts;
      for (const auto& v : rhs->args)
        parts.push_back(Expr::Compare(op, c.Value(t->args[0]), c.Value(v)));
      return std::string(op) == "!=" ? Expr::And(parts) : Expr::Or(parts);
    }
    return Expr::Compare(op, c.Value(t->args[0]), c.Value(rhs));
  }

  // @And is built right-to-left and @Or left-to-right; parts come out in
  // source order, with nested junctions of the same kind spliced in.
  static Expr Junction(Converter& c, const TermPtr& t, bool all) {
    Expr::Kind kind = all ? Expr::Kind::kAnd : Expr::Kind::kOr;
    std::vector<Expr> parts;
    auto add = [&](const TermPtr& a) {
      Expr e = c.Condition(a);
      if (e.kind == kind)
        parts.insert(parts.end(), e.args.begin(), e.args.end());
      else
        parts.push_back(std::move(e));
    };
    if (all)
      for (auto it = t->args.rbegin(); it != t->args.rend(); ++it) add(*it);
    else
      for (const auto& a : t->args) add(a);
    return all ? Expr::And(parts) : Expr::Or(parts);
  }

  static Expr InMode(Converter& c, const TermPtr& t) {
    Arity(t, 1);
    std::vector<Expr> modes;
    std::function<void(const TermPtr&)> collect = [&](const TermPtr& m) {
      if (m->IsPred("@And") || m->IsPred("@Or")) {
        for (const auto& a : m->args) collect(a);
        return;
      }
      modes.push_back(c.Value(m));
    };
    collect(t->args[0]);
    return modes.size() == 1 ? modes[0] : Expr::Or(modes);
  }

  // An event or query phrased as an action ("upon arrival of X") is a
  // service lookup on "verb object".
  static Expr ActionCondition(Converter& c, const TermPtr& t) {
    if (t->args.size() != 2 || t->args[0]->kind != Term::Kind::kStr ||
        t->args[1]->kind != Term::Kind::kStr)
      NoHandler("@Action condition " + Describe(t));
    std::string phrase = t->args[0]->name + " " + t->args[1]->name;
    std::optional<Target> target = c.r_.Resolve(phrase);
    if (!target || target->kind != Target::Kind::kService) Unresolved(phrase);
    return Expr::Service(target->name);
  }

  static const std::map<std::string, StmtFn>& Statements() {
    static const std::map<std::string, StmtFn> table = {
        {"@Is", Is},         {"@StartsWith", StartsWith}, {"@And", And},
        {"@If", If},         {"@AdvBefore", AdvBefore},   {"@Action", Action},
        {"@May", May},       {"@Call", Call},             {"@For", For},
        {"@With", With},     {"@EndsAt", EndsAt},         {"@AdvComment", Nothing},
    };
    return table;
  }

  static const std::map<std::string, CondFn>& Conditions() {
    static const std::map<std::string, CondFn> table = {
        {"@Is", [](Converter& c, const TermPtr& t) { return CmpOf(c, t, "=="); }},
        {"@IsNot", [](Converter& c, const TermPtr& t) { return CmpOf(c, t, "!="); }},
        {"@Reach", [](Converter& c, const TermPtr& t) { return CmpOf(c, t, ">="); }},
        {"@Greater", [](Converter& c, const TermPtr& t) { return CmpOf(c, t, ">"); }},
        {"@Less", [](Converter& c, const TermPtr& t) { return CmpOf(c, t, "<"); }},
        {"@Nonzero",
         [](Converter& c, const TermPtr& t) {
           Arity(t, 1);
           return Expr::Compare("!=", c.Value(t->args[0]), Expr::Const(0));
         }},
        {"@Not",
         [](Converter& c, const TermPtr& t) {
           Arity(t, 1);
           return Expr::Not(c.Condition(t->args[0]));
         }},
        {"@And", [](Converter& c, const TermPtr& t) { return Junction(c, t, true); }},
        {"@Or", [](Converter& c, const TermPtr& t) { return Junction(c, t, false); }},
        {"@InMode", InMode},
        {"@Action", ActionCondition},
    };
    return table;
  }

  const Resolver& r_;
  const HeaderLayout* layout_;
};

}  // namespace

Converted LfToInstructions(const TermPtr& lf, const DynamicContext& dyn,
                           const HeaderLayout* layout, const StaticContext& stat) {
  Resolver r(dyn, layout, stat);
  Converter c(r, layout);
  Converted out;
  c.Statement(lf, out);
  return out;
}

std::set<std::string> HandledPredicates() { return Converter::Handled(); }

std::string InferRole(std::string_view sentence) {
  static const std::regex kForm(R"(^\s*to form an? .*reply)", std::regex::icase);
  static const std::regex kReturned(R"(\breturned in the .*reply)", std::regex::icase);
  std::string s(sentence);
  if (std::regex_search(s, kForm) || std::regex_search(s, kReturned)) return "receiver";
  return "";
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

std::string MessageKey(const std::string& message) {
  std::string k = FieldKey(message);
  size_t alt = k.find("_or_");
  if (alt != std::string::npos) k.resize(alt);
  if (EndsWith(k, "_message")) k.resize(k.size() - 8);
  if (k == "message") k.clear();
  return k;
}

}  // namespace

std::string UnitName(const std::string& protocol, const std::string& message,
                     const std::string& role) {
  std::string name = FieldKey(protocol);
  std::string m = MessageKey(message);
  if (!m.empty()) name += "_" + m;
  if (!role.empty()) name += "_" + role;
  return name;
}

void AttachAdvice(FunctionUnit& unit, const Advice& advice) {
  bool found = false;
  for (const auto& in : unit.body) {
    if (advice.function == "compute" || advice.function == "recompute" ||
        advice.function == "calculate") {
      found = found || (in.kind == Instruction::Kind::kComputeChecksum && in.dst == advice.object);
    } else {
      found = found || (in.kind == Instruction::Kind::kCall && in.fn == advice.function);
    }
  }
  if (!found)
    throw CodegenError(CodegenError::Kind::kAdviceTarget,
                       advice.function + " " + advice.object + " in " + unit.name);
  unit.advice_before.insert(unit.advice_before.end(), advice.instructions.begin(),
                            advice.instructions.end());
}

namespace {

// Keeps the last computation per destination and moves them, in order, to
// the end: the checksum covers every field the unit writes.
void HoistChecksums(std::vector<Instruction>& body) {
  std::vector<Instruction> sums;
  std::vector<Instruction> rest;
  for (const auto& in : body) {
    if (in.kind == Instruction::Kind::kComputeChecksum) {
      std::erase_if(sums, [&](const Instruction& s) { return s.dst == in.dst; });
      sums.push_back(in);
    } else {
      rest.push_back(in);
    }
  }
  rest.insert(rest.end(), sums.begin(), sums.end());
  body = std::move(rest);
}

struct Group {
  std::string protocol;
  std::string message;
  int layout = -1;
  bool split = false;
  std::vector<std::pair<std::string, Instruction>> items;
  struct Adv {
    std::string role;
    Advice advice;
    SourceLocation source;
  };
  std::vector<Adv> advice;
};

}  // namespace

int LayoutIndex(const std::vector<HeaderLayout>& layouts, const std::string& protocol,
                const std::string& message) {
  int only = -1;
  size_t same_protocol = 0;
  for (size_t i = 0; i < layouts.size(); ++i) {
    if (FieldKey(layouts[i].protocol) != FieldKey(protocol)) continue;
    if (layouts[i].message == message) return static_cast<int>(i);
    only = static_cast<int>(i);
    ++same_protocol;
  }
  return same_protocol == 1 ? only : -1;
}

PacketProgram AssembleProgram(const std::vector<ConvertedSentence>& sentences,
                              const std::vector<HeaderLayout>& layouts,
                              std::vector<AssemblyError>* errors) {
  PacketProgram prog;
  prog.layouts = layouts;
  std::vector<Group> groups;
  std::map<std::pair<std::string, std::string>, size_t> index;

  for (const auto& s : sentences) {
    auto key = std::make_pair(s.context.protocol, s.context.message);
    auto [it, fresh] = index.emplace(key, groups.size());
    if (fresh) {
      Group g;
      g.protocol = s.context.protocol;
      g.message = s.context.message;
      g.layout = LayoutIndex(layouts, g.protocol, g.message);
      groups.push_back(std::move(g));
    }
    Group& g = groups[it->second];
    for (const auto& in : s.code.body) {
      std::string role = in.role.empty() ? s.context.role : in.role;
      if (!role.empty()) g.split = true;
      g.items.emplace_back(role, in);
    }
    for (const auto& a : s.code.advice) {
      if (!s.context.role.empty()) g.split = true;
      g.advice.push_back({s.context.role, a, s.source});
    }
  }

  for (const auto& g : groups) {
    std::vector<std::string> roles =
        g.split ? std::vector<std::string>{"sender", "receiver"} : std::vector<std::string>{""};
    for (const auto& role : roles) {
      FunctionUnit u;
      u.name = UnitName(g.protocol, g.message, role);
      u.protocol = g.protocol;
      u.message = g.message;
      u.role = role;
      u.layout = g.layout;
      for (const auto& [r, in] : g.items)
        if (r.empty() || role.empty() || r == role) u.body.push_back(in);
      HoistChecksums(u.body);
      for (const auto& a : g.advice) {
        if (!a.role.empty() && !role.empty() && a.role != role) continue;
        try {
          AttachAdvice(u, a.advice);
        } catch (const CodegenError& e) {
          if (errors) errors->push_back({a.source, e.what()});
        }
      }
      prog.units[u.name] = std::move(u);
    }
  }
  return prog;
}

// ---------------------------------------------------------------------------
// Emission

namespace {

constexpr std::string_view kOrigPrefix = "orig.";

std::string RenderPath(const std::string& path, const std::string& layer) {
  if (path.rfind(kOrigPrefix, 0) == 0) return "orig->" + path.substr(kOrigPrefix.size());
  size_t dot = path.find('.');
  if (dot == std::string::npos) return path;
  std::string head = path.substr(0, dot);
  if (head == layer) return "hdr->" + path.substr(dot + 1);
  if (head == "ip") return "ip->" + path.substr(dot + 1);
  return path;
}

std::string RenderExpr(const Expr& e, const std::string& layer, bool nested) {
  switch (e.kind) {
    case Expr::Kind::kConst: return std::to_string(e.value);
    case Expr::Kind::kField: return RenderPath(e.name, layer);
    case Expr::Kind::kService: return e.name + "()";
    case Expr::Kind::kCompare: {
      std::string s = RenderExpr(e.args[0], layer, true) + " " + e.name + " " +
                      RenderExpr(e.args[1], layer, true);
      return nested ? "(" + s + ")" : s;
    }
    case Expr::Kind::kAnd:
    case Expr::Kind::kOr: {
      std::string sep = e.kind == Expr::Kind::kAnd ? " && " : " || ";
      std::string s;
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) s += sep;
        s += RenderExpr(e.args[i], layer, true);
      }
      return nested ? "(" + s + ")" : s;
    }
    case Expr::Kind::kNot: return "!" + RenderExpr(e.args[0], layer, true);
  }
  return "";
}

std::string RenderRange(const ChecksumRange& r, const std::string& layer) {
  std::string end = r.end == ChecksumRange::End::kEndOfHeader    ? "end_of_header"
                    : r.end == ChecksumRange::End::kEndOfMessage ? "end_of_message"
                                                                 : std::to_string(r.fixed_bytes);
  return RenderPath(r.header + "." + r.field, layer) + ", " + end;
}

void EmitLines(const std::vector<Instruction>& code, const std::string& layer, int indent,
               std::string& out) {
  std::string pad(static_cast<size_t>(indent), ' ');
  for (const auto& in : code) {
    switch (in.kind) {
      case Instruction::Kind::kSetField:
        out += pad + RenderPath(in.dst, layer) + " = " + RenderExpr(in.value, layer, false) +
               ";\n";
        break;
      case Instruction::Kind::kCopyField:
        out += pad + RenderPath(in.dst, layer) + " = " + RenderPath(in.src, layer) + ";\n";
        break;
      case Instruction::Kind::kSwapFields:
        out += pad + "swap(" + RenderPath(in.dst, layer) + ", " + RenderPath(in.src, layer) +
               ");\n";
        break;
      case Instruction::Kind::kComputeChecksum:
        out += pad + RenderPath(in.dst, layer) + " = checksum(" + RenderRange(in.range, layer) +
               ");\n";
        break;
      case Instruction::Kind::kIf:
        out += pad + "if (" + RenderExpr(in.value, layer, false) + ") {\n";
        EmitLines(in.then, layer, indent + 2, out);
        out += pad + "}\n";
        break;
      case Instruction::Kind::kCall: {
        out += pad + in.fn + "(";
        for (size_t i = 0; i < in.args.size(); ++i) {
          if (i) out += ", ";
          out += RenderExpr(in.args[i], layer, false);
        }
        out += ");\n";
        break;
      }
      case Instruction::Kind::kComment:
        out += pad + "/* " + in.text + " */\n";
        break;
    }
  }
}

}  // namespace

std::string EmitInstructions(const std::vector<Instruction>& code, const std::string& layer,
                             int indent) {
  std::string out;
  EmitLines(code, layer, indent, out);
  return out;
}

std::string EmitUnit(const FunctionUnit& unit) {
  std::string layer = FieldKey(unit.protocol);
  std::string out = "void " + unit.name;
  if (unit.layout >= 0)
    out += "(struct " + layer + " *hdr, struct ip *ip, const struct packet *orig) {\n";
  else
    out += "(void) {\n";
  if (!unit.advice_before.empty()) {
    out += "  // advice\n";
    EmitLines(unit.advice_before, layer, 2, out);
    out += "  // body\n";
  }
  EmitLines(unit.body, layer, 2, out);
  out += "}\n";
  return out;
}

std::string EmitSourceText(const PacketProgram& program) {
  std::string out;
  bool first = true;
  for (const auto& [name, unit] : program.units) {
    if (!first) out += "\n";
    first = false;
    out += EmitUnit(unit);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Re-reading emitted text

namespace {

[[noreturn]] void BadText(int line, const std::string& what) {
  throw std::invalid_argument("line " + std::to_string(line) + ": " + what);
}

class ExprReader {
 public:
  ExprReader(std::string_view s, std::string layer, int line)
      : s_(s), layer_(std::move(layer)), line_(line) {}

  Expr ParseAll() {
    Expr e = Or();
    Skip();
    if (pos_ != s_.size()) BadText(line_, "trailing '" + std::string(s_.substr(pos_)) + "'");
    return e;
  }

  std::string Path(std::string_view text) const {
    std::string t(text);
    if (t.rfind("orig->", 0) == 0) return std::string(kOrigPrefix) + t.substr(6);
    if (t.rfind("hdr->", 0) == 0) return layer_ + "." + t.substr(5);
    if (t.rfind("ip->", 0) == 0) return "ip." + t.substr(4);
    return t;
  }

 private:
  void Skip() {
    while (pos_ < s_.size() && s_[pos_] == ' ') ++pos_;
  }

  bool Eat(std::string_view tok) {
    Skip();
    if (s_.substr(pos_, tok.size()) != tok) return false;
    pos_ += tok.size();
    return true;
  }

  Expr Or() {
    std::vector<Expr> parts = {And()};
    while (Eat("||")) parts.push_back(And());
    return parts.size() == 1 ? parts[0] : Expr::Or(parts);
  }

  Expr And() {
    std::vector<Expr> parts = {Cmp()};
    while (Eat("&&")) parts.push_back(Cmp());
    return parts.size() == 1 ? parts[0] : Expr::And(parts);
  }

  Expr Cmp() {
    Expr lhs = Unary();
    for (const char* op : {"==", "!=", ">=", "<=", ">", "<"}) {
      if (Eat(op)) return Expr::Compare(op, lhs, Unary());
    }
    return lhs;
  }

  Expr Unary() {
    if (Eat("!")) return Expr::Not(Unary());
    if (Eat("(")) {
      Expr e = Or();
      if (!Eat(")")) BadText(line_, "expected ')'");
      return e;
    }
    Skip();
    size_t b = pos_;
    if (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '-')) {
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      return Expr::Const(std::stoll(std::string(s_.substr(b, pos_ - b))));
    }
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
            s_[pos_] == '.' || s_.substr(pos_, 2) == "->")) {
      pos_ += s_.substr(pos_, 2) == "->" ? 2 : 1;
    }
    if (b == pos_) BadText(line_, "expected an operand");
    std::string_view word = s_.substr(b, pos_ - b);
    if (Eat("(")) {
      if (!Eat(")")) BadText(line_, "service calls take no arguments");
      return Expr::Service(std::string(word));
    }
    return Expr::Field(Path(word));
  }

  std::string_view s_;
  size_t pos_ = 0;
  std::string layer_;
  int line_;
};

struct Line {
  int number;
  std::string text;
};

// Reads statements up to the closing '}'. At function level an "// advice"
// or "// body" marker also ends the block.
std::vector<Instruction> ReadBlock(const std::vector<Line>& lines, size_t& i,
                                   const std::string& layer, bool function_level) {
  static const std::regex kAssign(R"(^(\S+) = (.*);$)");
  static const std::regex kChecksum(R"(^checksum\((\S+), (\w+)\)$)");
  static const std::regex kSwap(R"(^swap\((\S+), (\S+)\);$)");
  static const std::regex kCall(R"(^(\w+)\((.*)\);$)");
  static const std::regex kIf(R"(^if \((.*)\) \{$)");
  static const std::regex kComment(R"(^/\* (.*) \*/$)");
  std::vector<Instruction> out;
  for (; i < lines.size(); ++i) {
    const Line& l = lines[i];
    const std::string& t = l.text;
    ExprReader paths("", layer, l.number);
    std::smatch m;
    if (t == "}") return out;
    if (t.rfind("//", 0) == 0) {
      if (!function_level) BadText(l.number, "marker inside a block");
      return out;
    }
    if (std::regex_match(t, m, kIf)) {
      Expr cond = ExprReader(m[1].str(), layer, l.number).ParseAll();
      ++i;
      std::vector<Instruction> then = ReadBlock(lines, i, layer, false);
      if (i >= lines.size()) BadText(l.number, "unterminated if");
      out.push_back(Instruction::If(cond, then));
    } else if (std::regex_match(t, m, kComment)) {
      out.push_back(Instruction::Comment(m[1].str()));
    } else if (std::regex_match(t, m, kSwap)) {
      out.push_back(Instruction::SwapFields(paths.Path(m[1].str()), paths.Path(m[2].str())));
    } else if (std::regex_match(t, m, kAssign)) {
      std::string dst = paths.Path(m[1].str());
      std::string rhs = m[2].str();
      std::smatch c;
      if (std::regex_match(rhs, c, kChecksum)) {
        std::string anchor = paths.Path(c[1].str());
        size_t dot = anchor.rfind('.');
        ChecksumRange r;
        r.header = anchor.substr(0, dot);
        r.field = anchor.substr(dot + 1);
        r.end = ParseEnd(c[2].str(), &r.fixed_bytes);
        out.push_back(Instruction::ComputeChecksum(dst, r));
      } else {
        Expr v = ExprReader(rhs, layer, l.number).ParseAll();
        if (v.kind == Expr::Kind::kField)
          out.push_back(Instruction::CopyField(dst, v.name));
        else
          out.push_back(Instruction::SetField(dst, v));
      }
    } else if (std::regex_match(t, m, kCall)) {
      std::vector<Expr> args;
      for (const auto& a : SplitComma(m[2].str()))
        args.push_back(ExprReader(a, layer, l.number).ParseAll());
      out.push_back(Instruction::Call(m[1].str(), args));
    } else {
      BadText(l.number, "unrecognized statement '" + t + "'");
    }
  }
  BadText(lines.empty() ? 0 : lines.back().number, "missing '}'");
  return out;
}

}  // namespace

PacketProgram ParseSourceText(std::string_view text) {
  static const std::regex kHeader(R"(^void (\w+)\((.*)\) \{$)");
  static const std::regex kLayer(R"(^struct (\w+) \*hdr)");
  PacketProgram prog;
  std::istringstream in{std::string(text)};
  std::string raw;
  int number = 0;
  std::vector<Line> lines;
  while (std::getline(in, raw)) {
    ++number;
    std::string t = Trim(raw);
    if (!t.empty()) lines.push_back({number, t});
  }
  for (size_t i = 0; i < lines.size();) {
    std::smatch m;
    if (!std::regex_match(lines[i].text, m, kHeader))
      BadText(lines[i].number, "expected a function header");
    FunctionUnit u;
    u.name = m[1].str();
    std::string params = m[2].str();
    std::smatch lm;
    std::string layer;
    if (std::regex_search(params, lm, kLayer)) {
      layer = lm[1].str();
      u.protocol = layer;
      u.layout = 0;
    }
    ++i;
    std::vector<Instruction> first = ReadBlock(lines, i, layer, true);
    if (i < lines.size() && lines[i].text == "// advice") {
      ++i;
      u.advice_before = ReadBlock(lines, i, layer, true);
      if (i >= lines.size() || lines[i].text != "// body")
        BadText(lines[std::min(i, lines.size() - 1)].number, "expected '// body'");
      ++i;
      u.body = ReadBlock(lines, i, layer, true);
    } else {
      u.body = std::move(first);
    }
    if (i >= lines.size() || lines[i].text != "}") BadText(number, "missing '}' for " + u.name);
    ++i;
    prog.units[u.name] = std::move(u);
  }
  return prog;
}

// ---------------------------------------------------------------------------
// Annotations

namespace {

SourceLocation ParseLocation(const std::string& s) {
  SourceLocation loc;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  if (!(in >> loc.section >> c1 >> loc.paragraph >> c2 >> loc.sentence) || c1 != ':' || c2 != ':')
    throw std::invalid_argument("bad location '" + s + "'");
  return loc;
}

bool ValidDirective(const std::string& d) {
  return d == "advcomment" || d == "role=sender" || d == "role=receiver" || d == "rewrite";
}

}  // namespace

AnnotationSet AnnotationSet::Parse(std::string_view json_text) {
  AnnotationSet set;
  json doc = json::parse(json_text);
  for (const auto& e : doc.at("annotations")) {
    Annotation a;
    a.location = ParseLocation(e.at("location").get<std::string>());
    a.text = e.at("text").get<std::string>();
    a.directive = e.at("directive").get<std::string>();
    if (!ValidDirective(a.directive))
      throw std::invalid_argument("unknown directive '" + a.directive + "'");
    a.rewrite = e.value("rewrite", "");
    a.confirmed = e.value("confirmed", false);
    a.reason = e.value("reason", "");
    if (a.directive == "rewrite" && a.rewrite.empty())
      throw std::invalid_argument("rewrite directive without text at " + ToString(a.location));
    set.entries.push_back(std::move(a));
  }
  return set;
}

AnnotationSet AnnotationSet::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str());
}

std::string AnnotationSet::ToJson() const {
  json arr = json::array();
  for (const auto& a : entries) {
    json e = {{"location", ToString(a.location)},
              {"text", a.text},
              {"directive", a.directive},
              {"confirmed", a.confirmed}};
    if (!a.rewrite.empty()) e["rewrite"] = a.rewrite;
    if (!a.reason.empty()) e["reason"] = a.reason;
    arr.push_back(std::move(e));
  }
  return json{{"annotations", arr}}.dump(2) + "\n";
}

void AnnotationSet::Save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << ToJson();
}

std::vector<const Annotation*> AnnotationSet::For(const SourceLocation& loc,
                                                  const std::string& text) const {
  std::vector<const Annotation*> out;
  for (const auto& a : entries)
    if (a.location == loc && a.text == text) out.push_back(&a);
  return out;
}

bool AnnotationSet::IsConfirmedComment(const SourceLocation& loc, const std::string& text) const {
  for (const Annotation* a : For(loc, text))
    if (a->directive == "advcomment" && a->confirmed) return true;
  return false;
}

std::string AnnotationSet::RoleFor(const SourceLocation& loc, const std::string& text) const {
  for (const Annotation* a : For(loc, text)) {
    if (a->directive == "role=sender") return "sender";
    if (a->directive == "role=receiver") return "receiver";
  }
  return "";
}

size_t AnnotationSet::ConfirmedComments() const {
  return static_cast<size_t>(std::count_if(entries.begin(), entries.end(), [](const Annotation& a) {
    return a.directive == "advcomment" && a.confirmed;
  }));
}

size_t DiscoverNonActionable(const std::vector<CodegenFailure>& failures,
                             AnnotationSet& annotations) {
  size_t added = 0;
  for (const auto& f : failures) {
    bool known = false;
    for (const Annotation* a : annotations.For(f.location, f.text))
      known = known || a->directive == "advcomment";
    if (known) continue;
    Annotation a;
    a.location = f.location;
    a.text = f.text;
    a.directive = "advcomment";
    a.reason = f.reason;
    annotations.entries.push_back(std::move(a));
    ++added;
  }
  return added;
}

}  // namespace rfcc

#include "rfcc/ccg_parser.h"

#include <algorithm>
#include <map>

namespace rfcc {

const char* RuleName(Rule r) {
  switch (r) {
    case Rule::kLexical: return "lex";
    case Rule::kForwardApp: return ">";
    case Rule::kBackwardApp: return "<";
    case Rule::kForwardComp: return ">B";
    case Rule::kCommaAbsorb: return ",absorb";
    case Rule::kCommaConj: return ",conj";
    case Rule::kCoordinate: return "<&>";
  }
  return "?";
}

const char* StageNoteName(StageNote n) {
  switch (n) {
    case StageNote::kParsed: return "parsed";
    case StageNote::kZeroLf: return "zero_lf";
    case StageNote::kReparsedWithSubject: return "reparsed_with_subject";
  }
  return "?";
}

std::string ChartItem::Key() const {
  if (!cat) return "P" + punct;
  return ToString(cat) + (conj ? "[conj]|" : "|") + TermKey(sem);
}

namespace {

ChartItem Make(CatPtr cat, TermPtr sem, Rule rule) {
  ChartItem it;
  it.cat = std::move(cat);
  it.sem = std::move(sem);
  it.rule = rule;
  return it;
}

// \v1..\vk.@And(r v1..vk, l v1..vk) for a category with k argument slots.
TermPtr Conjoin(const TermPtr& l, const TermPtr& r, int slots) {
  std::vector<std::string> vars;
  for (int i = 0; i < slots; ++i) vars.push_back("_v" + std::to_string(i));
  TermPtr lt = l, rt = r;
  for (const auto& v : vars) {
    lt = App(lt, Var(v));
    rt = App(rt, Var(v));
  }
  // A conjunction of identical conjuncts is the conjunct itself.
  TermPtr body = BetaReduce(Pred("@And", {rt, lt}));
  if (body->IsPred("@And") && body->args.size() == 2 &&
      ToString(body->args[0]) == ToString(body->args[1]))
    body = body->args[0];
  for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = Abs(*it, body);
  return BetaReduce(body);
}

}  // namespace

std::vector<ChartItem> Combine(const ChartItem& l, const ChartItem& r) {
  std::vector<ChartItem> out;
  if (!l.cat && !r.cat) return out;
  if (!l.cat) {
    if (l.punct == "," && !r.conj) {
      ChartItem it = Make(r.cat, r.sem, Rule::kCommaConj);
      it.conj = true;
      out.push_back(std::move(it));
    }
    return out;
  }
  if (l.conj) return out;
  if (!r.cat) {
    if (r.punct == ",") out.push_back(Make(l.cat, l.sem, Rule::kCommaAbsorb));
    return out;
  }
  if (r.conj) {
    if (CatEqual(l.cat, r.cat))
      out.push_back(Make(l.cat, Conjoin(l.sem, r.sem, l.cat->Arity()), Rule::kCoordinate));
    return out;
  }
  const Category& lc = *l.cat;
  const Category& rc = *r.cat;
  if (lc.kind == Category::Kind::kForward && CatEqual(lc.arg, r.cat)) {
    out.push_back(Make(lc.result, BetaReduce(App(l.sem, r.sem)), Rule::kForwardApp));
  }
  if (rc.kind == Category::Kind::kBackward && CatEqual(rc.arg, l.cat)) {
    out.push_back(Make(rc.result, BetaReduce(App(r.sem, l.sem)), Rule::kBackwardApp));
  }
  if (lc.kind == Category::Kind::kForward && rc.kind == Category::Kind::kForward &&
      CatEqual(lc.arg, rc.result)) {
    // Both sides are closed, so the bound name cannot be captured.
    TermPtr sem = Abs("_z", App(l.sem, App(r.sem, Var("_z"))));
    out.push_back(Make(Category::Forward(lc.result, rc.arg), BetaReduce(sem),
                       Rule::kForwardComp));
  }
  return out;
}

Chart::Chart(std::vector<Token> tokens, const Lexicon& lexicon,
             const ParseOptions& options, std::string sentence)
    : tokens_(std::move(tokens)),
      lexicon_(lexicon),
      options_(options),
      sentence_(std::move(sentence)),
      n_(tokens_.size()),
      cells_((n_ + 1) * (n_ + 1)),
      keys_((n_ + 1) * (n_ + 1)) {
  // Lexical seeding, including multi-token surfaces.
  for (size_t i = 0; i < n_; ++i) {
    if (tokens_[i].punct) {
      ChartItem p;
      p.punct = tokens_[i].norm;
      AddItem(i, i + 1, p);
      continue;
    }
    for (auto& e : lexicon_.Lookup(tokens_[i]))
      AddItem(i, i + 1, Make(e.category, e.semantics, Rule::kLexical));
    size_t max_w = lexicon_.max_surface_words();
    for (size_t w = 2; w <= max_w && i + w <= n_; ++w)
      for (auto& e : lexicon_.LookupSpan(tokens_, i, i + w))
        AddItem(i, i + w, Make(e.category, e.semantics, Rule::kLexical));
  }
  for (size_t len = 2; len <= n_; ++len) {
    for (size_t b = 0; b + len <= n_; ++b) {
      size_t e = b + len;
      for (size_t k = b + 1; k < e; ++k) {
        const auto& lcell = cells_[Idx(b, k)];
        const auto& rcell = cells_[Idx(k, e)];
        for (size_t li = 0; li < lcell.size(); ++li) {
          for (size_t ri = 0; ri < rcell.size(); ++ri) {
            for (auto& item : Combine(lcell[li], rcell[ri])) {
              item.split = k;
              item.left = li;
              item.right = ri;
              AddItem(b, e, std::move(item));
            }
          }
        }
      }
    }
  }
}

void Chart::AddItem(size_t b, size_t e, ChartItem item) {
  std::string key = item.Key();
  auto& keys = keys_[Idx(b, e)];
  if (keys.count(key)) return;
  auto& cell = cells_[Idx(b, e)];
  if (cell.size() >= options_.max_items_per_cell) {
    throw ChartOverflow("chart cell [" + std::to_string(b) + "," + std::to_string(e) +
                        ") exceeds " + std::to_string(options_.max_items_per_cell) +
                        " items while parsing \"" + sentence_ + "\"");
  }
  keys.insert(std::move(key));
  cell.push_back(std::move(item));
}

const std::vector<ChartItem>& Chart::Cell(size_t begin, size_t end) const {
  return cells_[Idx(begin, end)];
}

size_t Chart::TotalItems() const {
  size_t n = 0;
  for (const auto& c : cells_) n += c.size();
  return n;
}

std::vector<TermPtr> Chart::LogicalForms() const {
  std::map<std::string, TermPtr> unique;
  if (n_ == 0) return {};
  for (const auto& item : Cell(0, n_)) {
    if (!item.cat || item.conj || !item.cat->IsAtom() || item.cat->atom != "S") continue;
    if (!IsFirstOrder(item.sem) || HasFreeVariables(item.sem)) continue;
    if (options_.registry && !options_.registry->ArityOk(item.sem)) continue;
    unique.emplace(ToString(item.sem), item.sem);
  }
  std::vector<TermPtr> out;
  for (auto& [s, t] : unique) out.push_back(t);
  return out;
}

bool Chart::Replay(size_t begin, size_t end, size_t index) const {
  const ChartItem& item = Cell(begin, end).at(index);
  if (item.rule == Rule::kLexical) {
    if (!item.cat) return end == begin + 1 && tokens_[begin].punct;
    std::vector<LexEntry> entries =
        end == begin + 1 ? lexicon_.Lookup(tokens_[begin])
                         : lexicon_.LookupSpan(tokens_, begin, end);
    for (const auto& e : entries)
      if (CatEqual(e.category, item.cat) && TermEqual(e.semantics, item.sem)) return true;
    return false;
  }
  size_t k = item.split;
  if (k <= begin || k >= end) return false;
  if (!Replay(begin, k, item.left) || !Replay(k, end, item.right)) return false;
  std::string key = item.Key();
  for (const auto& r : Combine(Cell(begin, k)[item.left], Cell(k, end)[item.right]))
    if (r.rule == item.rule && r.Key() == key) return true;
  return false;
}

std::vector<Token> StripFinalPunct(std::vector<Token> tokens) {
  while (!tokens.empty() && tokens.back().punct) tokens.pop_back();
  return tokens;
}

namespace {

// Only commas take part in derivations; other punctuation is dropped, and
// so are parenthesized asides.
std::vector<Token> ParseableTokens(const std::vector<Token>& tokens) {
  std::vector<Token> out;
  int depth = 0;
  for (const auto& t : StripFinalPunct(tokens)) {
    if (t.punct && t.norm == "(") ++depth;
    if (depth == 0 && (!t.punct || t.norm == ",")) out.push_back(t);
    if (t.punct && t.norm == ")" && depth > 0) --depth;
  }
  return out;
}

}  // namespace

ParseResult ParseSentence(const std::vector<Token>& tokens, const Lexicon& lexicon,
                          const ParseOptions& options, const std::string& sentence) {
  ParseResult r;
  r.sentence = sentence;
  std::vector<Token> toks = ParseableTokens(tokens);
  if (!toks.empty()) {
    Chart chart(std::move(toks), lexicon, options, sentence);
    r.lfs = chart.LogicalForms();
  }
  r.note = r.lfs.empty() ? StageNote::kZeroLf : StageNote::kParsed;
  return r;
}

ParseResult ReparseWithSubject(const ParseResult& prior, const std::string& field,
                               const std::vector<Token>& tokens,
                               const Lexicon& lexicon, const ParseOptions& options) {
  if (!prior.lfs.empty())
    throw std::invalid_argument("reparse requires a zero-LF prior parse");
  if (field.empty())
    throw std::invalid_argument("reparse requires a field-description context");
  Token subject;
  subject.text = field;
  subject.norm = ToLower(field);
  std::replace(subject.norm.begin(), subject.norm.end(), '_', ' ');
  subject.merged = true;
  subject.subject = true;
  std::vector<Token> toks;
  toks.push_back(subject);
  toks.insert(toks.end(), tokens.begin(), tokens.end());
  ParseResult r = ParseSentence(toks, lexicon, options, prior.sentence);
  r.note = StageNote::kReparsedWithSubject;
  return r;
}

}  // namespace rfcc

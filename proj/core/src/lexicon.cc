#include "rfcc/lexicon.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace rfcc {

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string ToLower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string Trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

namespace {

std::vector<std::string> SplitWords(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::string Join(const std::vector<std::string>& words, size_t b, size_t e) {
  std::string out;
  for (size_t i = b; i < e; ++i) {
    if (i > b) out += ' ';
    out += words[i];
  }
  return out;
}

std::string NormalizePhrase(std::string_view s) {
  std::vector<std::string> w = SplitWords(ToLower(s));
  return Join(w, 0, w.size());
}

}  // namespace

bool ParseInteger(std::string_view text, int64_t* value) {
  if (text.empty()) return false;
  size_t i = text[0] == '-' ? 1 : 0;
  if (i == text.size()) return false;
  for (size_t k = i; k < text.size(); ++k)
    if (!std::isdigit(static_cast<unsigned char>(text[k]))) return false;
  if (text.size() - i > 18) return false;
  *value = std::stoll(std::string(text));
  return true;
}

// ---------------------------------------------------------------------------
// TermDictionary

TermDictionary::TermDictionary(const std::vector<std::string>& terms) {
  for (const auto& t : terms) Add(t);
}

void TermDictionary::Add(std::string_view phrase) {
  std::string norm = NormalizePhrase(phrase);
  if (norm.empty()) return;
  max_words_ = std::max(max_words_, SplitWords(norm).size());
  terms_.insert(std::move(norm));
}

bool TermDictionary::Contains(std::string_view phrase) const {
  return terms_.count(NormalizePhrase(phrase)) > 0;
}

TermDictionary TermDictionary::Parse(std::string_view text) {
  TermDictionary dict;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    dict.Add(line);
  }
  return dict;
}

TermDictionary TermDictionary::Load(const std::string& path) {
  return Parse(ReadFile(path));
}

// ---------------------------------------------------------------------------
// Tokenization and chunking

namespace {

const std::set<std::string, std::less<>>& Abbreviations() {
  static const std::set<std::string, std::less<>> kAbbrev = {
      "e.g.", "i.e.", "etc.", "cf.", "vs.", "no.", "fig."};
  return kAbbrev;
}

bool IsUnit(std::string_view w) {
  static const std::set<std::string, std::less<>> kUnits = {
      "bit", "bits", "octet", "octets", "byte", "bytes"};
  return kUnits.count(ToLower(w)) > 0;
}

bool IsLeadingPunct(char c) { return c == '(' || c == '"'; }
bool IsTrailingPunct(char c) {
  return c == ',' || c == ';' || c == ':' || c == ')' || c == '"' || c == '?' ||
         c == '!';
}

Token MakeWord(std::string_view sentence, size_t b, size_t e) {
  Token t;
  t.text = std::string(sentence.substr(b, e - b));
  t.offset = b;
  t.norm = ToLower(t.text);
  t.punct = t.text.size() == 1 && !std::isalnum(static_cast<unsigned char>(t.text[0])) &&
            t.text != "=" && t.text != "<" && t.text != ">";
  return t;
}

}  // namespace

bool IsDeterminer(std::string_view word) {
  std::string w = ToLower(word);
  return w == "the" || w == "a" || w == "an";
}

std::vector<Token> Tokenize(std::string_view s) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i >= s.size()) break;
    size_t b = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    size_t e = i;
    std::vector<Token> tail;
    while (b < e && IsLeadingPunct(s[b]) && e - b > 1) {
      out.push_back(MakeWord(s, b, b + 1));
      ++b;
    }
    for (;;) {
      if (e - b <= 1) break;
      char last = s[e - 1];
      if (IsTrailingPunct(last)) {
        tail.push_back(MakeWord(s, e - 1, e));
        --e;
        continue;
      }
      if (last == '.' && !Abbreviations().count(ToLower(s.substr(b, e - b)))) {
        tail.push_back(MakeWord(s, e - 1, e));
        --e;
        continue;
      }
      break;
    }
    if (b < e) out.push_back(MakeWord(s, b, e));
    out.insert(out.end(), tail.rbegin(), tail.rend());
  }
  return out;
}

std::string Detokenize(std::string_view sentence, const std::vector<Token>& tokens) {
  std::string out;
  size_t pos = 0;
  for (const auto& t : tokens) {
    if (t.offset >= pos) out += sentence.substr(pos, t.offset - pos);
    out += t.text;
    pos = t.offset + t.text.size();
  }
  if (pos < sentence.size()) out += sentence.substr(pos);
  return out;
}

namespace {

Token MergeRange(std::string_view sentence, const std::vector<Token>& words,
                 size_t b, size_t e, size_t norm_from) {
  Token t;
  t.offset = words[b].offset;
  size_t end = words[e - 1].offset + words[e - 1].text.size();
  t.text = std::string(sentence.substr(t.offset, end - t.offset));
  std::vector<std::string> parts;
  for (size_t k = norm_from; k < e; ++k) parts.push_back(words[k].norm);
  t.norm = Join(parts, 0, parts.size());
  t.merged = true;
  return t;
}

// Removes parenthesized asides so that "Multipoint (M) bit" can match the
// dictionary term "multipoint bit".
std::vector<Token> DropAsides(std::vector<Token> words) {
  std::vector<Token> out;
  int depth = 0;
  for (auto& t : words) {
    if (t.punct && t.norm == "(") ++depth;
    if (depth == 0) out.push_back(std::move(t));
    if (t.punct && t.norm == ")" && depth > 0) --depth;
  }
  return out;
}

// Merges "<int> <unit>" pairs into one quantity token.
std::vector<Token> MergeQuantities(std::string_view sentence, std::vector<Token> in) {
  std::vector<Token> out;
  for (size_t i = 0; i < in.size(); ++i) {
    int64_t v;
    if (!in[i].merged && i + 1 < in.size() && ParseInteger(in[i].norm, &v) &&
        !in[i + 1].merged && IsUnit(in[i + 1].norm)) {
      Token t = MergeRange(sentence, in, i, i + 2, i);
      t.merged = false;
      out.push_back(t);
      ++i;
      continue;
    }
    out.push_back(in[i]);
  }
  return out;
}

}  // namespace

std::vector<Token> ChunkNounPhrases(std::string_view sentence,
                                    const TermDictionary& dict) {
  std::vector<Token> words = DropAsides(Tokenize(sentence));
  std::vector<Token> out;
  size_t i = 0;
  while (i < words.size()) {
    size_t start = i;
    bool det = IsDeterminer(words[i].norm) && i + 1 < words.size();
    size_t from = det ? i + 1 : i;
    size_t best = 0;
    size_t limit = std::min(words.size(), from + dict.max_words());
    std::string phrase;
    for (size_t j = from; j < limit; ++j) {
      if (words[j].punct) break;
      if (j > from) phrase += ' ';
      phrase += words[j].norm;
      if (dict.Contains(phrase)) best = j + 1;
    }
    if (best > 0) {
      out.push_back(MergeRange(sentence, words, start, best, from));
      i = best;
      continue;
    }
    out.push_back(words[i]);
    ++i;
  }
  return MergeQuantities(sentence, std::move(out));
}

// ---------------------------------------------------------------------------
// Predicate registry

std::string ToString(const KindSpec& k) {
  switch (k.kind) {
    case ArgKind::kFunctionName: return "function_name";
    case ArgKind::kFieldName: return "field_name";
    case ArgKind::kNumber: return "number";
    case ArgKind::kString: return "string";
    case ArgKind::kPredicate:
      return k.predicate.empty() ? "predicate" : "predicate:" + k.predicate;
    case ArgKind::kAny: return "any";
  }
  return "any";
}

KindSpec ParseKindSpec(std::string_view text) {
  std::string t = Trim(text);
  if (t == "function_name") return {ArgKind::kFunctionName, ""};
  if (t == "field_name") return {ArgKind::kFieldName, ""};
  if (t == "number") return {ArgKind::kNumber, ""};
  if (t == "string") return {ArgKind::kString, ""};
  if (t == "any") return {ArgKind::kAny, ""};
  if (t == "predicate") return {ArgKind::kPredicate, ""};
  if (t.rfind("predicate:", 0) == 0) {
    std::string name = t.substr(10);
    if (name.empty() || name[0] != '@')
      throw std::invalid_argument("bad predicate kind '" + t + "'");
    return {ArgKind::kPredicate, name};
  }
  throw std::invalid_argument("unknown argument kind '" + t + "'");
}

PredicateRegistry PredicateRegistry::Builtin() {
  PredicateRegistry r;
  r.Extend(R"(
@Is 2 2 any any
@And 2 8 any
@Or 2 8 any
@If 2 3 any
@Of 2 2 any
@Action 1 4 any
@Num 1 2 number string
@StartsWith 2 2 any
@AdvBefore 2 2 any
@AdvComment 1 1 any
)", "<builtin>");
  return r;
}

void PredicateRegistry::Register(PredicateSig sig) {
  if (sig.positions.empty()) sig.positions.push_back({ArgKind::kAny, ""});
  sigs_[sig.name] = std::move(sig);
}

void PredicateRegistry::Extend(std::string_view text, const std::string& origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::vector<std::string> f = SplitWords(line);
    if (f.empty()) continue;
    if (f.size() < 3 || f[0].size() < 2 || f[0][0] != '@')
      throw LoadError(origin, lineno, "expected '@Name min max [kinds]'");
    PredicateSig sig;
    sig.name = f[0];
    try {
      sig.min_arity = std::stoi(f[1]);
      sig.max_arity = std::stoi(f[2]);
      for (size_t k = 3; k < f.size(); ++k) sig.positions.push_back(ParseKindSpec(f[k]));
    } catch (const std::exception& e) {
      throw LoadError(origin, lineno, e.what());
    }
    if (sig.min_arity < 0 || sig.max_arity < sig.min_arity)
      throw LoadError(origin, lineno, "bad arity range");
    Register(std::move(sig));
  }
}

bool PredicateRegistry::Has(std::string_view name) const {
  return sigs_.find(name) != sigs_.end();
}

const PredicateSig* PredicateRegistry::Find(std::string_view name) const {
  auto it = sigs_.find(name);
  return it == sigs_.end() ? nullptr : &it->second;
}

bool PredicateRegistry::ArityOk(const TermPtr& t) const {
  if (t->kind == Term::Kind::kPred) {
    const PredicateSig* sig = Find(t->name);
    int n = static_cast<int>(t->args.size());
    if (!sig || n < sig->min_arity || n > sig->max_arity) return false;
  }
  for (const auto& a : t->args)
    if (!ArityOk(a)) return false;
  return true;
}

std::vector<std::string> PredicateRegistry::Names() const {
  std::vector<std::string> out;
  for (const auto& [name, sig] : sigs_) out.push_back(name);
  return out;
}

void CollectPredicates(const TermPtr& t, std::set<std::string>& out) {
  if (t->kind == Term::Kind::kPred) out.insert(t->name);
  for (const auto& a : t->args) CollectPredicates(a, out);
}

// ---------------------------------------------------------------------------
// Lexicon

std::string LexEntry::SurfaceText() const { return Join(surface, 0, surface.size()); }

namespace {

bool IsPlaceholder(std::string_view key) {
  return key == kNumSurface || key == kQuantitySurface || key == kSubjectSurface;
}

}  // namespace

LexEntry ParseLexEntry(std::string_view line) {
  size_t turnstile = line.find("|-");
  if (turnstile == std::string_view::npos) throw SyntaxError("missing '|-'", 0);
  std::string_view rest = line.substr(turnstile + 2);
  // The category never contains ':', so the first one separates semantics.
  size_t colon = rest.find(':');
  if (colon == std::string_view::npos) throw SyntaxError("missing ':'", turnstile);
  LexEntry e;
  e.surface = SplitWords(ToLower(line.substr(0, turnstile)));
  if (e.surface.empty()) throw SyntaxError("empty surface", 0);
  e.category = ParseCategory(rest.substr(0, colon));
  e.semantics = ParseTerm(rest.substr(colon + 1));
  int slots = e.category->Arity();
  int arity = LambdaArity(e.semantics);
  if (slots != arity) {
    throw std::invalid_argument("category " + ToString(e.category) + " has " +
                                std::to_string(slots) + " argument slot(s) but " +
                                "semantics has " + std::to_string(arity) +
                                " abstraction(s)");
  }
  std::string key = e.SurfaceText();
  if (HasFreeVariables(e.semantics) && !IsPlaceholder(key)) {
    throw std::invalid_argument("semantics has free variables");
  }
  return e;
}

Lexicon Lexicon::Parse(std::string_view text, const std::string& origin,
                       const PredicateRegistry* registry) {
  Lexicon lex;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    LexEntry e;
    try {
      e = ParseLexEntry(t);
    } catch (const std::exception& ex) {
      throw LoadError(origin, lineno, ex.what());
    }
    if (registry) {
      std::set<std::string> preds;
      CollectPredicates(e.semantics, preds);
      for (const auto& p : preds)
        if (!registry->Has(p))
          throw LoadError(origin, lineno, "unregistered predicate " + p);
    }
    lex.Add(std::move(e));
  }
  return lex;
}

Lexicon Lexicon::Load(const std::string& path, const PredicateRegistry* registry) {
  return Parse(ReadFile(path), path, registry);
}

void Lexicon::Add(LexEntry entry) {
  std::string key = entry.SurfaceText();
  max_words_ = std::max(max_words_, entry.surface.size());
  auto& bucket = entries_[key];
  for (const auto& e : bucket) {
    if (CatEqual(e.category, entry.category) && TermEqual(e.semantics, entry.semantics))
      return;
  }
  bucket.push_back(std::move(entry));
}

void Lexicon::Merge(const Lexicon& other) {
  for (const auto& [key, bucket] : other.entries_)
    for (const auto& e : bucket) Add(e);
}

const std::vector<LexEntry>* Lexicon::Find(std::string_view key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

bool Lexicon::HasWord(std::string_view word) const {
  int64_t v;
  if (ParseInteger(word, &v)) return Find(kNumSurface) != nullptr;
  return Find(ToLower(word)) != nullptr;
}

namespace {

LexEntry Instantiate(const LexEntry& templ, const std::string& surface,
                     TermPtr n, TermPtr u) {
  LexEntry e = templ;
  e.surface = SplitWords(surface);
  e.semantics = Substitute(e.semantics, "n", n);
  if (u) e.semantics = Substitute(e.semantics, "u", u);
  return e;
}

}  // namespace

std::vector<LexEntry> Lexicon::Lookup(const Token& token) const {
  std::vector<LexEntry> out;
  if (token.punct) return out;
  if (const auto* found = Find(token.norm)) out = *found;
  std::vector<std::string> parts = SplitWords(token.norm);
  int64_t v;
  if (parts.size() == 1 && ParseInteger(parts[0], &v)) {
    if (const auto* t = Find(kNumSurface))
      for (const auto& e : *t) out.push_back(Instantiate(e, token.norm, Num(v), nullptr));
  } else if (parts.size() == 2 && ParseInteger(parts[0], &v) && IsUnit(parts[1])) {
    if (const auto* t = Find(kQuantitySurface))
      for (const auto& e : *t)
        out.push_back(Instantiate(e, token.norm, Num(v), Str(parts[1])));
  }
  bool explicit_entries = !out.empty();
  if (token.subject) {
    std::string name = token.norm;
    std::replace(name.begin(), name.end(), ' ', '_');
    if (const auto* t = Find(kSubjectSurface)) {
      for (const auto& e : *t) {
        LexEntry inst = e;
        inst.surface = parts;
        inst.semantics = Substitute(e.semantics, "f", Str(name));
        out.push_back(std::move(inst));
      }
    }
  }
  if (!explicit_entries && token.merged) {
    LexEntry e;
    e.surface = parts;
    e.category = Category::Atom("NP");
    std::string name = token.norm;
    std::replace(name.begin(), name.end(), ' ', '_');
    e.semantics = Str(name);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<LexEntry> Lexicon::LookupSpan(const std::vector<Token>& tokens,
                                          size_t begin, size_t end) const {
  if (end - begin < 2 || end > tokens.size()) return {};
  std::string key;
  for (size_t i = begin; i < end; ++i) {
    // A chunk of several words is opaque; a one-word chunk is still a word.
    if (tokens[i].merged && tokens[i].text.find(' ') != std::string::npos) return {};
    if (i > begin) key += ' ';
    key += tokens[i].norm;
  }
  const auto* found = Find(key);
  return found ? *found : std::vector<LexEntry>{};
}

size_t Lexicon::size() const {
  size_t n = 0;
  for (const auto& [k, bucket] : entries_) n += bucket.size();
  return n;
}

std::set<std::string> Lexicon::PredicatesUsed() const {
  std::set<std::string> out;
  for (const auto& [k, bucket] : entries_)
    for (const auto& e : bucket) CollectPredicates(e.semantics, out);
  return out;
}

std::vector<LexEntry> Lexicon::Entries() const {
  std::vector<LexEntry> out;
  for (const auto& [k, bucket] : entries_) out.insert(out.end(), bucket.begin(), bucket.end());
  return out;
}

std::string Lexicon::Serialize() const {
  std::string out;
  for (const auto& e : Entries()) {
    out += e.SurfaceText() + " |- " + ToString(e.category) + " : " +
           ToString(e.semantics) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Chunk modes

std::vector<Token> Chunk(std::string_view sentence, const TermDictionary& dict,
                         const Lexicon& lexicon, ChunkMode mode) {
  switch (mode) {
    case ChunkMode::kFull:
      return ChunkNounPhrases(sentence, dict);
    case ChunkMode::kNone:
      return Tokenize(sentence);
    case ChunkMode::kNoDictionary:
      break;
  }
  std::vector<Token> words = DropAsides(Tokenize(sentence));
  std::vector<Token> out;
  size_t i = 0;
  auto unknown = [&](const Token& t) {
    return !t.punct && !IsDeterminer(t.norm) && !lexicon.HasWord(t.norm);
  };
  while (i < words.size()) {
    size_t start = i;
    size_t from = i;
    if (IsDeterminer(words[i].norm) && i + 1 < words.size() && unknown(words[i + 1]))
      from = i + 1;
    size_t j = from;
    while (j < words.size() && unknown(words[j])) ++j;
    if (j > from) {
      out.push_back(MergeRange(sentence, words, start, j, from));
      i = j;
      continue;
    }
    out.push_back(words[i]);
    ++i;
  }
  return MergeQuantities(sentence, std::move(out));
}

}  // namespace rfcc

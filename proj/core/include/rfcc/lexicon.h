// Term dictionary, noun-phrase chunking, predicate registry and the CCG
// lexicon.
#ifndef RFCC_LEXICON_H_
#define RFCC_LEXICON_H_

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rfcc/term.h"

namespace rfcc {

class LoadError : public std::runtime_error {
 public:
  LoadError(const std::string& file, int line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

std::string ReadFile(const std::string& path);
std::string ToLower(std::string_view s);
std::string Trim(std::string_view s);

// ---------------------------------------------------------------------------
// Term dictionary

class TermDictionary {
 public:
  TermDictionary() = default;
  explicit TermDictionary(const std::vector<std::string>& terms);

  static TermDictionary Parse(std::string_view text);
  static TermDictionary Load(const std::string& path);

  // Case-insensitive; `phrase` words must be single-space separated.
  bool Contains(std::string_view phrase) const;
  void Add(std::string_view phrase);
  size_t size() const { return terms_.size(); }
  size_t max_words() const { return max_words_; }
  const std::set<std::string>& terms() const { return terms_; }

 private:
  std::set<std::string> terms_;
  size_t max_words_ = 0;
};

// ---------------------------------------------------------------------------
// Chunking

struct Token {
  std::string text;   // exact source slice
  size_t offset = 0;  // byte offset of `text` in the sentence
  std::string norm;   // lookup key: lowercase, determiner stripped
  bool merged = false;  // produced by a dictionary or heuristic NP match
  bool punct = false;
  bool subject = false;  // supplied from document context on re-parse
};

enum class ChunkMode {
  kFull,          // dictionary longest match, determiners absorbed
  kNoDictionary,  // runs of words unknown to the lexicon form one NP
  kNone,          // every word is its own token
};

// Splits on whitespace and peels punctuation off word edges.
std::vector<Token> Tokenize(std::string_view sentence);

// Greedy longest match over `dict`; remaining words pass through.
std::vector<Token> ChunkNounPhrases(std::string_view sentence,
                                    const TermDictionary& dict);

// Rebuilds the sentence from tokens using the original inter-token gaps.
std::string Detokenize(std::string_view sentence, const std::vector<Token>& tokens);

bool IsDeterminer(std::string_view word);

// ---------------------------------------------------------------------------
// Predicate registry

enum class ArgKind { kFunctionName, kFieldName, kNumber, kString, kPredicate, kAny };

struct KindSpec {
  ArgKind kind = ArgKind::kAny;
  std::string predicate;  // for kPredicate; empty matches any predicate

  bool operator==(const KindSpec&) const = default;
};

std::string ToString(const KindSpec& k);
// "function_name", "field_name", "number", "string", "predicate",
// "predicate:@Is", "any".
KindSpec ParseKindSpec(std::string_view text);

struct PredicateSig {
  std::string name;
  int min_arity = 1;
  int max_arity = 1;
  // Coarse declared kinds per position; the last entry repeats.
  std::vector<KindSpec> positions;
};

class PredicateRegistry {
 public:
  // The core predicates shared by every protocol.
  static PredicateRegistry Builtin();
  // Adds "@Name min max [kind...]" lines from `text`.
  void Extend(std::string_view text, const std::string& origin = "<registry>");
  void LoadFile(const std::string& path) { Extend(ReadFile(path), path); }

  void Register(PredicateSig sig);
  bool Has(std::string_view name) const;
  const PredicateSig* Find(std::string_view name) const;
  // True if every predicate application in `t` respects its arity range.
  bool ArityOk(const TermPtr& t) const;
  size_t size() const { return sigs_.size(); }
  std::vector<std::string> Names() const;

 private:
  std::map<std::string, PredicateSig, std::less<>> sigs_;
};

void CollectPredicates(const TermPtr& t, std::set<std::string>& out);

// ---------------------------------------------------------------------------
// Lexicon

struct LexEntry {
  std::vector<std::string> surface;  // lowercase words
  CatPtr category;
  TermPtr semantics;

  std::string SurfaceText() const;
};

// Placeholder surfaces. "<num>" matches an integer token and binds the free
// variable `n`; "<quantity>" matches an integer with a unit ("64 bits") and
// binds `n` and the unit string `u`.
inline constexpr std::string_view kNumSurface = "<num>";
inline constexpr std::string_view kQuantitySurface = "<quantity>";
// "<subject>" entries apply only to a subject token supplied on re-parse and
// bind `f` to the field name.
inline constexpr std::string_view kSubjectSurface = "<subject>";

class Lexicon {
 public:
  static Lexicon Parse(std::string_view text, const std::string& origin = "<lexicon>",
                       const PredicateRegistry* registry = nullptr);
  static Lexicon Load(const std::string& path,
                      const PredicateRegistry* registry = nullptr);

  void Add(LexEntry entry);
  void Merge(const Lexicon& other);

  // Explicit entries for a (possibly multi-word) lowercase key.
  const std::vector<LexEntry>* Find(std::string_view key) const;
  // Entries for one token, including placeholder and default NP entries.
  std::vector<LexEntry> Lookup(const Token& token) const;
  // Entries whose surface spans tokens [begin, end) (end - begin >= 2). Chunks
  // of several words never take part.
  std::vector<LexEntry> LookupSpan(const std::vector<Token>& tokens, size_t begin,
                                   size_t end) const;
  bool HasWord(std::string_view word) const;

  size_t size() const;
  size_t max_surface_words() const { return max_words_; }
  std::set<std::string> PredicatesUsed() const;
  std::string Serialize() const;
  std::vector<LexEntry> Entries() const;

 private:
  std::map<std::string, std::vector<LexEntry>, std::less<>> entries_;
  size_t max_words_ = 1;
};

// Chunks `sentence` under `mode`. kNoDictionary treats each maximal run of
// words unknown to `lexicon` as one NP; it stands in for a generic NP tagger.
std::vector<Token> Chunk(std::string_view sentence, const TermDictionary& dict,
                         const Lexicon& lexicon, ChunkMode mode);

// Parses "surface |- CATEGORY : lambda". Throws SyntaxError or
// std::invalid_argument on arity mismatch.
LexEntry ParseLexEntry(std::string_view line);

// Parses an integer token; supports a leading sign.
bool ParseInteger(std::string_view text, int64_t* value);

}  // namespace rfcc

#endif  // RFCC_LEXICON_H_

// CKY chart parser over chunked tokens.
#ifndef RFCC_CCG_PARSER_H_
#define RFCC_CCG_PARSER_H_

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "rfcc/lexicon.h"
#include "rfcc/term.h"

namespace rfcc {

class ChartOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Rule {
  kLexical,
  kForwardApp,
  kBackwardApp,
  kForwardComp,
  kCommaAbsorb,  // X , -> X (clause separator)
  kCommaConj,    // , X -> X[conj]
  kCoordinate,   // X X[conj] -> X
};

const char* RuleName(Rule r);

struct ChartItem {
  CatPtr cat;        // null for a punctuation item
  TermPtr sem;       // beta-normal
  std::string punct; // "," for punctuation items
  bool conj = false; // right conjunct awaiting its left partner
  Rule rule = Rule::kLexical;
  // Backpointers: split point and item indices into the two child cells.
  size_t split = 0;
  size_t left = 0;
  size_t right = 0;

  std::string Key() const;
};

// All results of combining two adjacent items (without backpointers).
std::vector<ChartItem> Combine(const ChartItem& l, const ChartItem& r);

struct ParseOptions {
  size_t max_items_per_cell = 2000;
  const PredicateRegistry* registry = nullptr;  // arity filter on final LFs
};

class Chart {
 public:
  Chart(std::vector<Token> tokens, const Lexicon& lexicon,
        const ParseOptions& options = {}, std::string sentence = {});

  size_t size() const { return n_; }
  const std::vector<Token>& tokens() const { return tokens_; }
  const std::vector<ChartItem>& Cell(size_t begin, size_t end) const;
  // Sentence-spanning S items converted to deduplicated, sorted LFs.
  std::vector<TermPtr> LogicalForms() const;
  // Recomputes the item at (begin, end, index) from its backpointers.
  // Returns false if the replay does not reproduce category and semantics.
  bool Replay(size_t begin, size_t end, size_t index) const;
  size_t TotalItems() const;

 private:
  size_t Idx(size_t b, size_t e) const { return b * (n_ + 1) + e; }
  void AddItem(size_t b, size_t e, ChartItem item);

  std::vector<Token> tokens_;
  const Lexicon& lexicon_;
  ParseOptions options_;
  std::string sentence_;
  size_t n_ = 0;
  std::vector<std::vector<ChartItem>> cells_;
  std::vector<std::unordered_set<std::string>> keys_;
};

enum class StageNote { kParsed, kZeroLf, kReparsedWithSubject };
const char* StageNoteName(StageNote n);

struct ParseResult {
  std::string sentence;
  std::vector<TermPtr> lfs;
  StageNote note = StageNote::kZeroLf;
};

// Drops a trailing run of sentence-final punctuation tokens.
std::vector<Token> StripFinalPunct(std::vector<Token> tokens);

ParseResult ParseSentence(const std::vector<Token>& tokens, const Lexicon& lexicon,
                          const ParseOptions& options = {},
                          const std::string& sentence = {});

// Prepends `field` as a merged NP subject token and parses again. Throws
// std::invalid_argument when `prior` has LFs or `field` is empty.
ParseResult ReparseWithSubject(const ParseResult& prior, const std::string& field,
                               const std::vector<Token>& tokens,
                               const Lexicon& lexicon, const ParseOptions& options = {});

}  // namespace rfcc

#endif  // RFCC_CCG_PARSER_H_

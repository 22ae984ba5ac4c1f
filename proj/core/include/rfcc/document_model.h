// Structured view of an RFC-style text: sections, indented paragraphs,
// header diagrams, field descriptions and per-sentence context.
#ifndef RFCC_DOCUMENT_MODEL_H_
#define RFCC_DOCUMENT_MODEL_H_

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rfcc/header_layout.h"

namespace rfcc {

class DocumentError : public std::runtime_error {
 public:
  DocumentError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

enum class ParagraphKind { kProse, kHeaderArt, kFieldDescription, kPseudoCode };
const char* ParagraphKindName(ParagraphKind k);

struct ValueCode {
  int64_t code = 0;
  std::string meaning;

  bool operator==(const ValueCode&) const = default;
};

struct Paragraph {
  int indent_level = 0;  // columns of leading space
  ParagraphKind kind = ParagraphKind::kProse;
  std::string label;  // field or group label; empty for plain blocks
  std::vector<std::string> sentences;
  std::vector<ValueCode> value_codes;
  std::vector<std::string> lines;  // raw lines (kept for art and pseudo-code)
  int parent = -1;                 // index within the section, -1 for none
  int first_line = 0;              // 1-based source line
};

struct Section {
  std::string heading;
  std::vector<Paragraph> paragraphs;
};

struct SpecDocument {
  std::string title;
  std::string protocol;
  std::vector<Section> sections;
};

// Blocks are separated by blank lines. An unindented single line without
// closing punctuation is a section heading; the first one is the title when
// another heading follows it directly. A label line followed by deeper blocks
// becomes one paragraph carrying the label. Throws DocumentError when tabs
// appear in leading whitespace.
SpecDocument ExtractParagraphs(std::string_view raw);

// Field widths are half the column distance between '|' separators, or an
// explicit "Name(N)". Rows must be 32 bits. Open-ended data rows ("Data ...")
// become the layout trailer.
HeaderLayout ExtractHeaderLayout(const Paragraph& art, const std::string& protocol = {},
                                 const std::string& message = {});

struct FieldDescription {
  std::string field_name;  // field key, e.g. "sequence_number"
  std::vector<std::string> sentences;
  std::vector<ValueCode> value_codes;
  bool matched = false;  // names a field of the section's layout
  int section = 0;
  int paragraph = 0;
};

std::vector<FieldDescription> ExtractFieldDescriptions(const SpecDocument& doc);

// Per-sentence context inferred from document structure.
struct DynamicContext {
  std::string protocol;
  std::string message;
  std::string field;
  std::string role;  // "", "sender" or "receiver"

  bool operator==(const DynamicContext&) const = default;
};

struct SourceLocation {
  int section = 0;
  int paragraph = 0;
  int sentence = 0;

  bool operator==(const SourceLocation&) const = default;
  auto operator<=>(const SourceLocation&) const = default;
};

std::string ToString(const SourceLocation& loc);

struct SentenceRecord {
  std::string text;
  DynamicContext context;
  SourceLocation source;
};

std::vector<SentenceRecord> BuildSentenceContexts(const SpecDocument& doc);

// Header layouts of every header_art paragraph, in document order.
std::vector<HeaderLayout> ExtractLayouts(const SpecDocument& doc);

// Splits on '.' followed by whitespace, keeping abbreviations and numbers.
std::vector<std::string> SplitSentences(std::string_view text);

std::string DocumentToJson(const SpecDocument& doc);
std::string ContextToJson(const DynamicContext& ctx);

}  // namespace rfcc

#endif  // RFCC_DOCUMENT_MODEL_H_

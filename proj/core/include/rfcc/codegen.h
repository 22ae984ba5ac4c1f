// Logical forms to packet-program IR: context resolution, predicate
// handlers, advice, function assembly and C-like emission.
#ifndef RFCC_CODEGEN_H_
#define RFCC_CODEGEN_H_

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfcc/document_model.h"
#include "rfcc/header_layout.h"
#include "rfcc/ir.h"
#include "rfcc/term.h"

namespace rfcc {

class CodegenError : public std::runtime_error {
 public:
  enum class Kind { kHandlerMissing, kUnresolvedTerm, kAdviceTarget };
  CodegenError(Kind kind, const std::string& subject);
  Kind kind() const { return kind_; }
  const std::string& subject() const { return subject_; }

 private:
  Kind kind_;
  std::string subject_;
};

// Lookup key for a term: lowercase, runs of other characters folded to '_'.
std::string BindingKey(std::string_view term);

// Pre-defined bindings. File lines are "term -> target" where target is
//   layer.field          a header field, e.g. ip.src_addr
//   orig.layer.field     a field of the received packet
//   a.b,c.d              several fields (e.g. an address pair)
//   fn:name              runtime function
//   os:name              operating-system service
//   state:name           state variable
//   const:N              named constant
//   scope:orig           qualifier selecting the received packet
//   alias:term           another term, resolved again (dynamic first)
// plus "range <layer> -> field..end" lines giving the default checksum range,
// with end one of end_of_header, end_of_message or a byte count.
struct StaticContext {
  std::map<std::string, std::vector<std::string>> fields;
  std::map<std::string, std::string> functions;
  std::map<std::string, std::string> services;
  std::map<std::string, std::string> state;
  std::map<std::string, int64_t> constants;
  std::map<std::string, std::string> aliases;
  std::map<std::string, std::string> scopes;
  std::map<std::string, ChecksumRange> ranges;  // by layer

  static StaticContext Parse(std::string_view text, const std::string& origin = "<context>");
  static StaticContext Load(const std::string& path);
  void Merge(const StaticContext& other);

  std::set<std::string> FunctionNames() const;
  std::set<std::string> StateNames() const;
};

// Where a term resolved to.
struct Target {
  enum class Kind { kField, kService, kFunction, kConstant, kScope };
  Kind kind = Kind::kField;
  std::vector<std::string> paths;  // kField
  std::string name;                // service, function or scope prefix
  int64_t value = 0;               // kConstant
  bool dynamic = false;            // resolved through the dynamic context
};

// Resolves terms dynamic-first: fields of the current message layout, then
// the static context.
class Resolver {
 public:
  Resolver(const DynamicContext& dyn, const HeaderLayout* layout, const StaticContext& stat);

  std::optional<Target> Resolve(const std::string& term) const;
  // Resolves to exactly one field path or throws UnresolvedTerm.
  std::string FieldPath(const TermPtr& t) const;
  std::vector<std::string> FieldPaths(const TermPtr& t) const;
  const std::string& layer() const { return layer_; }
  const DynamicContext& dyn() const { return dyn_; }
  const StaticContext& stat() const { return stat_; }

 private:
  std::optional<Target> ResolveKey(const std::string& key, int depth) const;

  const DynamicContext& dyn_;
  const HeaderLayout* layout_;
  const StaticContext& stat_;
  std::string layer_;
};

// Code attached before the invocation of a function in the unit.
struct Advice {
  std::string function;  // e.g. "compute"
  std::string object;    // resolved path of the function's object
  std::vector<Instruction> instructions;
};

struct Converted {
  std::vector<Instruction> body;
  std::vector<Advice> advice;
};

// Drops LFs whose root is @AdvComment; returns the number removed.
size_t FilterNonActionable(std::vector<TermPtr>& lfs);

// Post-order conversion of one LF. Throws CodegenError.
Converted LfToInstructions(const TermPtr& lf, const DynamicContext& dyn,
                           const HeaderLayout* layout, const StaticContext& stat);

// Names of predicates with a registered handler.
std::set<std::string> HandledPredicates();

// Role for a sentence from its wording ("To form ... reply" -> receiver).
std::string InferRole(std::string_view sentence);

struct ConvertedSentence {
  SourceLocation source;
  DynamicContext context;
  Converted code;
};

// Unit name from protocol, message heading and role.
std::string UnitName(const std::string& protocol, const std::string& message,
                     const std::string& role);

struct AssemblyError {
  SourceLocation source;
  std::string message;
};

// Index of the layout drawn for `message`, else of the protocol's only
// layout (procedure sections describing a header drawn elsewhere); -1 if
// neither exists.
int LayoutIndex(const std::vector<HeaderLayout>& layouts, const std::string& protocol,
                const std::string& message);

// Groups instructions by (protocol, message, role) in source order. A message
// with any role-specific instruction gets sender and receiver units, and
// role-free instructions go to both; otherwise it gets one unit. Checksum
// computations are deduplicated and moved to the end of each body. Advice is
// attached to every unit computing its target; advice without a target is
// reported in `errors`.
PacketProgram AssembleProgram(const std::vector<ConvertedSentence>& sentences,
                              const std::vector<HeaderLayout>& layouts,
                              std::vector<AssemblyError>* errors = nullptr);

// Attaches one advice record to `unit`. Throws CodegenError(kAdviceTarget)
// when the unit does not invoke the advised function.
void AttachAdvice(FunctionUnit& unit, const Advice& advice);

// C-like rendering: one function per unit, advice first, 2-space indent.
std::string EmitSourceText(const PacketProgram& program);
std::string EmitUnit(const FunctionUnit& unit);
// Statements only, each line prefixed by `indent` spaces.
std::string EmitInstructions(const std::vector<Instruction>& code, const std::string& layer,
                             int indent = 0);

// Reads text produced by EmitSourceText back into units: name, advice, body
// and the header layer named in the signature. Layouts are not part of the
// text, so a unit with a header gets layout 0. Throws std::invalid_argument
// on text outside that subset.
PacketProgram ParseSourceText(std::string_view text);

// ---------------------------------------------------------------------------
// Annotations: the human-in-the-loop decisions.

struct Annotation {
  SourceLocation location;
  std::string text;       // sentence text the directive was made against
  std::string directive;  // "advcomment", "role=sender", "role=receiver", "rewrite"
  std::string rewrite;    // replacement text for "rewrite"
  bool confirmed = false;
  std::string reason;     // free-form note, e.g. the codegen failure
};

struct AnnotationSet {
  std::vector<Annotation> entries;

  static AnnotationSet Parse(std::string_view json_text);
  static AnnotationSet Load(const std::string& path);
  std::string ToJson() const;
  void Save(const std::string& path) const;

  // Matching entries for a sentence (location and text must both match).
  std::vector<const Annotation*> For(const SourceLocation& loc, const std::string& text) const;
  bool IsConfirmedComment(const SourceLocation& loc, const std::string& text) const;
  std::string RoleFor(const SourceLocation& loc, const std::string& text) const;
  size_t ConfirmedComments() const;
};

struct CodegenFailure {
  SourceLocation location;
  std::string text;
  std::string reason;
};

// Appends an unconfirmed advcomment candidate for every failure not already
// annotated; returns the number added.
size_t DiscoverNonActionable(const std::vector<CodegenFailure>& failures,
                             AnnotationSet& annotations);

}  // namespace rfcc

#endif  // RFCC_CODEGEN_H_

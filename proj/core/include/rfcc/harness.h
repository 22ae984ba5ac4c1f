// End-to-end pipeline over one specification text: document model, chunking,
// parsing, winnowing, annotations, codegen and assembly. Also the batch
// human-in-the-loop helpers (rewrites, discovery), metrics, ablation and the
// ICMP scenario runner.
#ifndef RFCC_HARNESS_H_
#define RFCC_HARNESS_H_

#include <optional>
#include <string>
#include <vector>

#include "rfcc/ccg_parser.h"
#include "rfcc/codegen.h"
#include "rfcc/disambiguator.h"
#include "rfcc/document_model.h"
#include "rfcc/lexicon.h"
#include "rfcc/packet_runtime.h"

namespace rfcc {

struct PipelineConfig {
  std::string spec;
  std::string dictionary;
  std::vector<std::string> lexicons;
  std::vector<std::string> registries;  // predicate registry extensions
  std::vector<std::string> checks;
  std::vector<std::string> contexts;
  std::string annotations;  // optional
  std::string out_dir;      // optional
  ChunkMode mode = ChunkMode::kFull;
};

// Everything a run needs, loaded once.
struct Resources {
  TermDictionary dictionary;
  PredicateRegistry registry = PredicateRegistry::Builtin();
  Lexicon lexicon;
  CheckRuleSet rules;
  StaticContext context;
  AnnotationSet annotations;

  // Throws on missing files or malformed content.
  static Resources Load(const PipelineConfig& config);
};

enum class Outcome {
  kUnique,
  kAmbiguous,
  kEmpty,
  kNonActionable,  // unique and confirmed @AdvComment
  kCodegenFailed,
  kError,  // chart overflow or other module error
};
const char* OutcomeName(Outcome o);

struct SentenceReport {
  SourceLocation source;
  std::string text;
  DynamicContext context;  // role filled in from annotations or wording
  StageNote parse_note = StageNote::kZeroLf;
  Outcome outcome = Outcome::kEmpty;
  std::vector<std::pair<std::string, size_t>> stage_counts;
  std::vector<size_t> isolated_counts;  // per kPipelineOrder check
  std::vector<std::string> lfs;         // surviving LFs, canonical
  std::string error;
  size_t instructions = 0;
};

struct RunReport {
  std::string protocol;
  std::vector<SentenceReport> sentences;
  std::vector<std::string> units;
  std::vector<AssemblyError> assembly_errors;
  std::vector<CodegenFailure> failures;  // unconfirmed codegen failures
  size_t filtered = 0;                   // LFs dropped as non-actionable

  size_t Count(Outcome o) const;
  // Residual ambiguity, empty parses, codegen failures or errors.
  bool Clean() const;
};

struct RunResult {
  RunReport report;
  PacketProgram program;
  SpecDocument document;
};

// Runs the pipeline on `spec_text`. Module errors are attached to the
// offending sentence.
RunResult RunPipeline(std::string_view spec_text, const Resources& res,
                      ChunkMode mode = ChunkMode::kFull);

// Leaf kinds from the static context and the document's layouts.
KindOracle BuildKindOracle(const StaticContext& context, const std::vector<HeaderLayout>& layouts);

std::string ReportToJson(const RunReport& report);

// ---------------------------------------------------------------------------
// Metrics

struct StageStats {
  std::string stage;
  size_t min = 0;
  double avg = 0;
  size_t max = 0;
};

struct IsolatedStats {
  std::string check;
  double mean_removed = 0;
  size_t affected = 0;
};

struct Metrics {
  size_t ambiguous_sentences = 0;  // base LF count > 1
  std::vector<StageStats> pipeline;
  std::vector<IsolatedStats> isolated;
};

Metrics ComputeMetrics(const RunReport& report);
std::string MetricsToJson(const Metrics& m);
std::string MetricsToText(const Metrics& m);

// ---------------------------------------------------------------------------
// Ablation of noun-phrase labeling

struct AblationRow {
  SourceLocation source;
  std::string text;
  size_t full = 0;
  size_t ablated = 0;
};

struct AblationTable {
  std::string mode;
  std::vector<AblationRow> rows;
  size_t increase = 0;
  size_t decrease = 0;
  size_t same = 0;
  size_t zero_full = 0;
  size_t zero_ablated = 0;
};

ChunkMode ParseChunkMode(const std::string& name);
const char* ChunkModeName(ChunkMode m);

// Base LF counts (after parse and subject re-parse, before winnowing) under
// kFull and under `mode`.
AblationTable Ablate(std::string_view spec_text, const Resources& res, ChunkMode mode);
std::string AblationToJson(const AblationTable& t);
std::string AblationToText(const AblationTable& t);

// ---------------------------------------------------------------------------
// Rewrites

class RewriteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Replaces the text of every rewrite directive. Each directive's location
// must still hold its recorded text; otherwise RewriteError lists the
// mismatches. Rewritten blocks are re-wrapped at their indentation.
std::string ApplyRewrites(std::string_view spec_text, const AnnotationSet& annotations);

// ---------------------------------------------------------------------------
// ICMP scenarios

struct ScenarioStep {
  std::string actor;
  std::string unit;
  Packet packet;
};

struct ScenarioResult {
  std::string name;
  std::vector<ScenarioStep> steps;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

// The eight ICMP message exchanges between two hosts and a router with a
// subnet table. Each generated message is checked for its type and a valid
// checksum.
std::vector<ScenarioResult> RunIcmpScenarios(const PacketProgram& program);

// Unit for `stem` ("icmp_echo") and `role`: the role-specific unit when the
// program has one, otherwise the role-free unit. Empty when neither exists.
std::string FindUnit(const PacketProgram& program, const std::string& stem,
                     const std::string& role);

// Writes report.json, program.c and, when scenarios ran, one pcap per
// scenario under `dir`.
void WriteArtifacts(const std::string& dir, const RunResult& result,
                    const std::vector<ScenarioResult>& scenarios);

}  // namespace rfcc

#endif  // RFCC_HARNESS_H_

// rfcc: command-line driver for the specification-to-code pipeline.
//
// Exit status: 0 for a clean run, 2 when ambiguity, empty parses or
// unconfirmed codegen failures remain, 1 on usage or input errors.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "rfcc/harness.h"

namespace {

namespace fs = std::filesystem;

struct Options {
  rfcc::PipelineConfig config;
  std::string data_dir;
  std::string mode = "full";
  bool json = false;
};

void AddCommon(CLI::App* cmd, Options& o) {
  cmd->add_option("--spec", o.config.spec, "Specification text")->required()->check(CLI::ExistingFile);
  cmd->add_option("--data", o.data_dir, "Directory supplying defaults for the files below")
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--dict", o.config.dictionary, "Term dictionary")->check(CLI::ExistingFile);
  cmd->add_option("--lexicon", o.config.lexicons, "Lexicon file (repeatable)")->check(CLI::ExistingFile);
  cmd->add_option("--registry", o.config.registries, "Predicate registry extension (repeatable)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--checks", o.config.checks, "Check-rule file (repeatable)")->check(CLI::ExistingFile);
  cmd->add_option("--context", o.config.contexts, "Static context file (repeatable)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--annotations", o.config.annotations, "Annotation file");
}

void FillDefaults(Options& o) {
  if (o.data_dir.empty()) return;
  fs::path d(o.data_dir);
  auto pick = [&](const char* name) {
    fs::path p = d / name;
    return fs::exists(p) ? p.string() : std::string();
  };
  if (o.config.dictionary.empty()) o.config.dictionary = pick("terms.txt");
  auto add = [&](std::vector<std::string>& v, const char* name) {
    if (v.empty() && !pick(name).empty()) v.push_back(pick(name));
  };
  add(o.config.lexicons, "lexicon.txt");
  add(o.config.registries, "predicates.txt");
  add(o.config.checks, "checks.txt");
  add(o.config.contexts, "context.txt");
}

rfcc::Resources LoadResources(Options& o) {
  FillDefaults(o);
  rfcc::PipelineConfig cfg = o.config;
  if (!cfg.annotations.empty() && !fs::exists(cfg.annotations)) cfg.annotations.clear();
  return rfcc::Resources::Load(cfg);
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void PrintSummary(const rfcc::RunReport& r) {
  std::cout << "sentences: " << r.sentences.size() << "\n";
  for (rfcc::Outcome o : {rfcc::Outcome::kUnique, rfcc::Outcome::kAmbiguous, rfcc::Outcome::kEmpty,
                          rfcc::Outcome::kNonActionable, rfcc::Outcome::kCodegenFailed,
                          rfcc::Outcome::kError})
    std::cout << "  " << rfcc::OutcomeName(o) << ": " << r.Count(o) << "\n";
  for (const auto& s : r.sentences) {
    if (s.outcome == rfcc::Outcome::kUnique || s.outcome == rfcc::Outcome::kNonActionable) continue;
    std::cout << "  [" << rfcc::OutcomeName(s.outcome) << "] " << rfcc::ToString(s.source) << " "
              << s.text << "\n";
    if (!s.error.empty()) std::cout << "      " << s.error << "\n";
    for (const auto& lf : s.lfs) std::cout << "      " << lf << "\n";
  }
  for (const auto& e : r.assembly_errors)
    std::cout << "  [assembly] " << rfcc::ToString(e.source) << " " << e.message << "\n";
  std::cout << "units:";
  for (const auto& u : r.units) std::cout << " " << u;
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Specification text to packet programs"};
  app.require_subcommand(1);
  Options o;

  bool discover = false;
  bool scenarios = false;
  auto* run = app.add_subcommand("run", "Run the pipeline and write the report");
  AddCommon(run, o);
  run->add_option("--out", o.config.out_dir, "Output directory for report, source and pcaps");
  run->add_option("--mode", o.mode, "Chunking mode: full, no_dictionary, no_chunking");
  run->add_flag("--discover", discover, "Append codegen failures to the annotation file");
  run->add_flag("--scenarios", scenarios, "Also run the ICMP scenarios");

  auto* metrics = app.add_subcommand("metrics", "Per-stage and per-check LF statistics");
  AddCommon(metrics, o);
  metrics->add_flag("--json", o.json, "JSON instead of a text table");

  auto* ablate = app.add_subcommand("ablate", "Compare LF counts with NP labeling disabled");
  AddCommon(ablate, o);
  ablate->add_option("--mode", o.mode, "no_dictionary or no_chunking")->required();
  ablate->add_flag("--json", o.json, "JSON instead of a text table");

  std::string rewrite_out;
  auto* rewrite = app.add_subcommand("rewrite", "Apply rewrite annotations to a specification");
  rewrite->add_option("--spec", o.config.spec, "Specification text")->required()->check(CLI::ExistingFile);
  rewrite->add_option("--annotations", o.config.annotations, "Annotation file")
      ->required()
      ->check(CLI::ExistingFile);
  rewrite->add_option("--out", rewrite_out, "Output file (default: stdout)");

  auto* scenario = app.add_subcommand("scenario", "Run the ICMP scenarios and write pcaps");
  AddCommon(scenario, o);
  scenario->add_option("--out", o.config.out_dir, "Output directory")->required();

  std::string sentence, field;
  auto* parse = app.add_subcommand("parse", "Show chunks and logical forms for one sentence");
  parse->add_option("sentence", sentence, "Sentence text")->required();
  parse->add_option("--field", field, "Field name for the subject re-parse");
  parse->add_option("--data", o.data_dir, "Data directory")->required();
  parse->add_option("--mode", o.mode, "Chunking mode");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*rewrite) {
      std::string text = rfcc::ApplyRewrites(rfcc::ReadFile(o.config.spec),
                                             rfcc::AnnotationSet::Load(o.config.annotations));
      if (rewrite_out.empty())
        std::cout << text;
      else
        WriteFile(rewrite_out, text);
      return 0;
    }

    rfcc::Resources res = LoadResources(o);
    rfcc::ChunkMode mode = rfcc::ParseChunkMode(o.mode);

    if (*parse) {
      std::vector<rfcc::Token> tokens = rfcc::Chunk(sentence, res.dictionary, res.lexicon, mode);
      for (const auto& t : tokens) std::cout << "[" << t.norm << "] ";
      std::cout << "\n";
      rfcc::ParseOptions opts;
      opts.registry = &res.registry;
      rfcc::ParseResult pr = rfcc::ParseSentence(tokens, res.lexicon, opts, sentence);
      if (pr.lfs.empty() && !field.empty())
        pr = rfcc::ReparseWithSubject(pr, field, tokens, res.lexicon, opts);
      std::cout << rfcc::StageNoteName(pr.note) << ", " << pr.lfs.size() << " LFs\n";
      for (const auto& lf : pr.lfs) std::cout << "  " << rfcc::ToString(lf) << "\n";
      rfcc::WinnowOutcome w =
          rfcc::Winnow(pr.lfs, res.rules, rfcc::BuildKindOracle(res.context, {}));
      for (const auto& [stage, n] : w.stage_counts) std::cout << stage << "=" << n << " ";
      std::cout << "\n" << rfcc::OutcomeName(w.kind) << "\n";
      for (const auto& lf : w.lfs) std::cout << "  " << rfcc::ToString(lf) << "\n";
      return 0;
    }

    std::string spec = rfcc::ReadFile(o.config.spec);
    if (*ablate) {
      rfcc::AblationTable t = rfcc::Ablate(spec, res, mode);
      std::cout << (o.json ? rfcc::AblationToJson(t) : rfcc::AblationToText(t));
      return 0;
    }

    rfcc::RunResult result = rfcc::RunPipeline(spec, res, mode);
    if (*metrics) {
      rfcc::Metrics m = rfcc::ComputeMetrics(result.report);
      std::cout << (o.json ? rfcc::MetricsToJson(m) : rfcc::MetricsToText(m));
      return 0;
    }

    std::vector<rfcc::ScenarioResult> ran;
    if (*scenario || scenarios) {
      ran = rfcc::RunIcmpScenarios(result.program);
      for (const auto& s : ran) {
        std::cout << (s.ok() ? "ok   " : "FAIL ") << s.name << " (" << s.steps.size()
                  << " packets)\n";
        for (const auto& f : s.failures) std::cout << "     " << f << "\n";
      }
    }
    if (*run) PrintSummary(result.report);
    if (!o.config.out_dir.empty()) rfcc::WriteArtifacts(o.config.out_dir, result, ran);

    if (discover) {
      std::string path = !o.config.annotations.empty()
                             ? o.config.annotations
                             : (fs::path(o.config.out_dir.empty() ? "." : o.config.out_dir) /
                                "annotations.json")
                                   .string();
      size_t added = rfcc::DiscoverNonActionable(result.report.failures, res.annotations);
      res.annotations.Save(path);
      std::cout << "non-actionable candidates added: " << added << " (" << path << ")\n";
    }

    bool scenario_ok = std::all_of(ran.begin(), ran.end(), [](const auto& s) { return s.ok(); });
    return result.report.Clean() && scenario_ok ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "rfcc/harness.h"
#include "support.h"

namespace rfcc {
namespace {

std::set<std::string> Flagged(const RunReport& r, Outcome o) {
  std::set<std::string> out;
  for (const auto& s : r.sentences)
    if (s.outcome == o) out.insert(ToString(s.source));
  return out;
}

class IcmpCorpus : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    original_ = new RunResult(testing::RunShipped("icmp/rfc792_original.txt"));
    rewritten_ =
        new RunResult(testing::RunShipped("icmp/rfc792_rewritten.txt", "icmp/annotations.json"));
  }
  static void TearDownTestSuite() {
    delete original_;
    delete rewritten_;
  }
  static RunResult* original_;
  static RunResult* rewritten_;
};

RunResult* IcmpCorpus::original_ = nullptr;
RunResult* IcmpCorpus::rewritten_ = nullptr;

TEST_F(IcmpCorpus, OriginalFlagsTheKnownResidualSentences) {
  const RunReport& r = original_->report;
  EXPECT_EQ(r.sentences.size(), 90u);
  EXPECT_EQ(Flagged(r, Outcome::kAmbiguous),
            (std::set<std::string>{"5:2:1", "6:2:1", "7:2:1", "6:9:0"}));
  EXPECT_EQ(Flagged(r, Outcome::kEmpty), (std::set<std::string>{"4:7:0"}));
  EXPECT_EQ(r.Count(Outcome::kError), 0u);
  EXPECT_FALSE(r.Clean());
}

TEST_F(IcmpCorpus, RewrittenIsCleanAndCoversEveryMessageType) {
  const RunReport& r = rewritten_->report;
  EXPECT_TRUE(r.Clean());
  EXPECT_EQ(r.Count(Outcome::kAmbiguous), 0u);
  EXPECT_EQ(r.Count(Outcome::kEmpty), 0u);
  EXPECT_EQ(r.Count(Outcome::kNonActionable), 35u);
  EXPECT_TRUE(r.assembly_errors.empty());
  for (const char* stem :
       {"icmp_destination_unreachable", "icmp_time_exceeded", "icmp_parameter_problem",
        "icmp_source_quench", "icmp_redirect", "icmp_echo", "icmp_timestamp",
        "icmp_information_request"}) {
    bool found = false;
    for (const auto& u : r.units) found |= u.rfind(stem, 0) == 0;
    EXPECT_TRUE(found) << stem;
  }
}

TEST_F(IcmpCorpus, RewrittenScenariosAllPass) {
  std::vector<ScenarioResult> runs = RunIcmpScenarios(rewritten_->program);
  EXPECT_EQ(runs.size(), 8u);
  for (const auto& s : runs) {
    EXPECT_TRUE(s.ok()) << s.name << ": " << (s.failures.empty() ? "" : s.failures[0]);
    EXPECT_FALSE(s.steps.empty()) << s.name;
  }
}

TEST_F(IcmpCorpus, StageCountsAreMonotone) {
  for (const RunResult* run : {original_, rewritten_}) {
    for (const auto& s : run->report.sentences) {
      for (size_t i = 1; i < s.stage_counts.size(); ++i)
        ASSERT_LE(s.stage_counts[i].second, s.stage_counts[i - 1].second) << s.text;
      if (s.outcome == Outcome::kUnique || s.outcome == Outcome::kNonActionable ||
          s.outcome == Outcome::kCodegenFailed) {
        ASSERT_FALSE(s.stage_counts.empty());
        EXPECT_EQ(s.stage_counts.back().second, 1u) << s.text;
      }
    }
  }
}

TEST_F(IcmpCorpus, MetricsFinalStageIsOne) {
  Metrics m = ComputeMetrics(rewritten_->report);
  ASSERT_FALSE(m.pipeline.empty());
  EXPECT_EQ(m.pipeline.front().stage, "base");
  const StageStats& last = m.pipeline.back();
  EXPECT_EQ(last.min, 1u);
  EXPECT_EQ(last.max, 1u);
  EXPECT_DOUBLE_EQ(last.avg, 1.0);
  EXPECT_GT(m.ambiguous_sentences, 0u);
  EXPECT_EQ(m.isolated.size(), 5u);
  EXPECT_NE(MetricsToJson(m).find("\"pipeline\""), std::string::npos);
}

TEST_F(IcmpCorpus, ReportJsonListsEverySentence) {
  std::string json = ReportToJson(rewritten_->report);
  EXPECT_NE(json.find("\"sentences\""), std::string::npos);
  EXPECT_NE(json.find("5:2:1"), std::string::npos);
}

TEST(Harness, EmptySpecHasNoSentences) {
  Resources res = testing::ShippedResources();
  RunResult r = RunPipeline("", res);
  EXPECT_TRUE(r.report.sentences.empty());
  EXPECT_TRUE(r.program.units.empty());
  EXPECT_TRUE(r.report.Clean());
}

struct Corpus {
  const char* spec;
  const char* annotations;
  size_t min_units;
};

class ExtensionCorpora : public ::testing::TestWithParam<Corpus> {};

TEST_P(ExtensionCorpora, ConvergeWithMonotoneCounts) {
  const Corpus& c = GetParam();
  RunResult r = testing::RunShipped(c.spec, c.annotations);
  EXPECT_TRUE(r.report.Clean()) << c.spec;
  EXPECT_GE(r.report.units.size(), c.min_units);
  for (const auto& s : r.report.sentences) {
    for (size_t i = 1; i < s.stage_counts.size(); ++i)
      EXPECT_LE(s.stage_counts[i].second, s.stage_counts[i - 1].second) << s.text;
    if (!s.stage_counts.empty()) {
      EXPECT_EQ(s.stage_counts.back().second, 1u) << s.text;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Shipped, ExtensionCorpora,
                         ::testing::Values(Corpus{"igmp/rfc1112_appendix1.txt", "igmp/annotations.json", 1},
                                           Corpus{"bfd/rfc5880_reception_rewritten.txt",
                                                  "bfd/annotations.json", 1},
                                           Corpus{"ntp/ntp.txt", "", 3}));

TEST(Harness, NtpTimeoutUnitIsNested) {
  RunResult r = testing::RunShipped("ntp/ntp.txt");
  auto it = r.program.units.find("ntp_timeout_procedure");
  ASSERT_NE(it, r.program.units.end());
  const auto& body = it->second.body;
  ASSERT_EQ(body.size(), 1u);
  ASSERT_EQ(body[0].kind, Instruction::Kind::kIf);
  ASSERT_EQ(body[0].then.size(), 1u);
  EXPECT_EQ(body[0].then[0].kind, Instruction::Kind::kIf);
  ASSERT_EQ(body[0].then[0].then.size(), 1u);
  EXPECT_EQ(body[0].then[0].then[0], Instruction::Call("timeout_procedure"));
}

TEST(Ablation, DirectionsOnTheRewrittenCorpus) {
  Resources res = testing::ShippedResources("icmp/annotations.json");
  std::string spec = ReadFile(testing::DataPath("icmp/rfc792_rewritten.txt"));
  AblationTable none = Ablate(spec, res, ChunkMode::kNone);
  EXPECT_GT(none.zero_ablated, none.zero_full);
  AblationTable nodict = Ablate(spec, res, ChunkMode::kNoDictionary);
  EXPECT_GE(nodict.increase, 1u);
  EXPECT_EQ(nodict.rows.size(), 90u);
  EXPECT_EQ(nodict.increase + nodict.decrease + nodict.same, nodict.rows.size());
}

TEST(Ablation, ModeNamesRoundTrip) {
  for (ChunkMode m : {ChunkMode::kFull, ChunkMode::kNoDictionary, ChunkMode::kNone})
    EXPECT_EQ(ParseChunkMode(ChunkModeName(m)), m);
  EXPECT_THROW(ParseChunkMode("sideways"), std::exception);
}

TEST(Rewrites, EmptyAnnotationsLeaveTextUnchanged) {
  std::string spec = ReadFile(testing::DataPath("icmp/rfc792_original.txt"));
  EXPECT_EQ(ApplyRewrites(spec, AnnotationSet{}), spec);
}

TEST(Rewrites, ShippedIcmpRewritesReproduceTheRewrittenCorpus) {
  std::string spec = ReadFile(testing::DataPath("icmp/rfc792_original.txt"));
  AnnotationSet a = AnnotationSet::Load(testing::DataPath("icmp/annotations.json"));
  EXPECT_EQ(ApplyRewrites(spec, a), ReadFile(testing::DataPath("icmp/rfc792_rewritten.txt")));
}

TEST(Rewrites, ShippedBfdRewritesReproduceTheRewrittenCorpus) {
  std::string spec = ReadFile(testing::DataPath("bfd/rfc5880_reception.txt"));
  AnnotationSet a = AnnotationSet::Load(testing::DataPath("bfd/annotations.json"));
  EXPECT_EQ(ApplyRewrites(spec, a), ReadFile(testing::DataPath("bfd/rfc5880_reception_rewritten.txt")));
}

TEST(Rewrites, StaleLocationIsAnError) {
  AnnotationSet a = AnnotationSet::Parse(
      R"({"annotations":[{"location":"0:0:0","text":"Not there.","directive":"rewrite",)"
      R"("rewrite":"x","confirmed":true}]})");
  EXPECT_THROW(ApplyRewrites("Heading\n\n   Something else.\n", a), RewriteError);
}

TEST(Rewrites, EndOfMessageRewriteParsesUniquely) {
  Resources res = testing::ShippedResources();
  std::string s =
      "The checksum is the 16-bit ones's complement of the one's complement sum of the ICMP message "
      "starting with the ICMP Type and ending at the end of the ICMP message.";
  ParseOptions o;
  o.registry = &res.registry;
  ParseResult p = ParseSentence(Chunk(s, res.dictionary, res.lexicon, ChunkMode::kFull), res.lexicon, o, s);
  WinnowOutcome w = Winnow(p.lfs, res.rules, BuildKindOracle(res.context, {}));
  ASSERT_EQ(w.kind, WinnowOutcome::Kind::kUnique);
  EXPECT_EQ(w.lfs[0]->name, "@EndsAt");
}

TEST(Discovery, SecondPassProposesNothing) {
  Resources res = testing::ShippedResources();
  std::string spec = ReadFile(testing::DataPath("icmp/rfc792_rewritten.txt"));
  RunResult first = RunPipeline(spec, res);
  size_t added = DiscoverNonActionable(first.report.failures, res.annotations);
  EXPECT_EQ(added, 35u);
  for (auto& a : res.annotations.entries) a.confirmed = true;
  RunResult second = RunPipeline(spec, res);
  EXPECT_EQ(DiscoverNonActionable(second.report.failures, res.annotations), 0u);
  EXPECT_EQ(second.report.Count(Outcome::kNonActionable), 35u);
}

TEST(Artifacts, WritesReportProgramAndCaptures) {
  RunResult r = testing::RunShipped("icmp/rfc792_rewritten.txt", "icmp/annotations.json");
  std::vector<ScenarioResult> ran = RunIcmpScenarios(r.program);
  std::filesystem::path dir = std::filesystem::temp_directory_path() / "rfcc_artifacts_test";
  std::filesystem::remove_all(dir);
  WriteArtifacts(dir.string(), r, ran);
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "program.c"));
  size_t pcaps = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) pcaps += e.path().extension() == ".pcap";
  EXPECT_EQ(pcaps, ran.size());
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace rfcc

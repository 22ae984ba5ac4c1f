// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "rfcc/harness.h"
#include "support.h"

namespace {

using namespace rfcc;
using Clock = std::chrono::steady_clock;

constexpr double kParseBudgetSeconds = 1.0;
constexpr double kEchoBudgetSeconds = 5.0;
constexpr int kEchoRuns = 100;
constexpr size_t kMaxEchoPayload = 64;
constexpr int kChecksumSpans = 1000;
constexpr size_t kConfirmedIcmpComments = 35;

struct Verdict {
  bool ok = true;
  std::string detail;

  void Require(bool cond, const std::string& why) {
    if (!cond && ok) {
      ok = false;
      detail = why;
    }
  }
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

const Resources& Shipped() {
  static const Resources res = testing::ShippedResources();
  return res;
}

LfSet ParseLfs(const std::string& s) {
  const Resources& res = Shipped();
  ParseOptions o;
  o.registry = &res.registry;
  return ParseSentence(Chunk(s, res.dictionary, res.lexicon, ChunkMode::kFull), res.lexicon, o, s).lfs;
}

KindOracle Oracle() { return BuildKindOracle(Shipped().context, {}); }

std::string Squash(const std::string& s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

Verdict AdviceWinnowing() {
  Verdict v;
  auto start = Clock::now();
  LfSet lfs = ParseLfs("For computing the checksum, the checksum field should be zero");
  WinnowOutcome w = Winnow(lfs, Shipped().rules, Oracle());
  double took = Seconds(start);
  std::set<std::string> figure;
  for (const auto& lf : lfs) figure.insert(ToString(lf, PrintStyle::kFigure));
  v.Require(lfs.size() >= 2, "fewer than 2 LFs");
  for (const char* shape :
       {"@AdvBefore(@Action('compute','0'),@Is(@And('checksum_field','checksum'),'0'))",
        "@AdvBefore(@Action('compute','checksum'),@Is('checksum_field','0'))",
        "@AdvBefore('0',@Is(@Action('compute',@And('checksum_field','checksum')),'0'))",
        "@AdvBefore('0',@Is(@And('checksum_field',@Action('compute','checksum')),'0'))"})
    v.Require(figure.count(shape) > 0, std::string("missing shape ") + shape);
  v.Require(w.kind == WinnowOutcome::Kind::kUnique, "not unique after winnowing");
  if (w.kind == WinnowOutcome::Kind::kUnique)
    v.Require(ToString(w.lfs[0], PrintStyle::kFigure) ==
                  "@AdvBefore(@Action('compute','checksum'),@Is('checksum_field','0'))",
              "wrong survivor " + ToString(w.lfs[0]));
  v.Require(took < kParseBudgetSeconds, "took " + std::to_string(took) + " s");
  return v;
}

Verdict AssociativityMerge() {
  Verdict v;
  auto start = Clock::now();
  LfSet lfs = ParseLfs(
      "The checksum is the 16-bit ones's complement of the one's complement sum of the ICMP message "
      "starting with the ICMP Type.");
  v.Require(lfs.size() >= 2, "fewer than 2 LFs: " + std::to_string(lfs.size()));
  const std::set<std::string>& assoc = Shipped().rules.associative;
  std::set<std::string> flat;
  for (const auto& lf : lfs) flat.insert(TermKey(FlattenAssociative(lf, assoc)));
  v.Require(flat.size() == 1, "LFs differ beyond bracketing");
  v.Require(ApplyAssociativityCheck(lfs, assoc).size() == 1, "associativity check did not reduce to 1");
  WinnowOutcome w = Winnow(lfs, Shipped().rules, Oracle());
  v.Require(w.kind == WinnowOutcome::Kind::kUnique, "winnowing not unique");
  double took = Seconds(start);
  v.Require(took < kParseBudgetSeconds, "took " + std::to_string(took) + " s");
  return v;
}

std::set<std::string> Flagged(const RunReport& r, Outcome o) {
  std::set<std::string> out;
  for (const auto& s : r.sentences)
    if (s.outcome == o) out.insert(ToString(s.source));
  return out;
}

Verdict AmbiguityCensus(const RunResult& original) {
  Verdict v;
  std::set<std::string> amb = Flagged(original.report, Outcome::kAmbiguous);
  std::set<std::string> zero = Flagged(original.report, Outcome::kEmpty);
  const std::set<std::string> want_amb = {"5:2:1", "6:2:1", "7:2:1", "6:9:0"};
  const std::set<std::string> want_zero = {"4:7:0"};
  auto join = [](const std::set<std::string>& s) {
    std::string out;
    for (const auto& x : s) out += (out.empty() ? "" : ",") + x;
    return out;
  };
  v.Require(amb == want_amb, "ambiguous = {" + join(amb) + "}");
  v.Require(zero == want_zero, "zero = {" + join(zero) + "}");
  return v;
}

Verdict RewrittenConvergence(const RunResult& rewritten) {
  Verdict v;
  const RunReport& r = rewritten.report;
  v.Require(r.Count(Outcome::kAmbiguous) == 0, "ambiguous sentences remain");
  v.Require(r.Count(Outcome::kEmpty) == 0, "zero-LF sentences remain");
  v.Require(r.Count(Outcome::kCodegenFailed) == 0 && r.failures.empty(), "codegen failures remain");
  v.Require(r.Count(Outcome::kError) == 0, "module errors");
  const std::vector<std::string> stems = {
      "icmp_destination_unreachable", "icmp_time_exceeded", "icmp_parameter_problem",
      "icmp_source_quench",           "icmp_redirect",      "icmp_echo",
      "icmp_timestamp",               "icmp_information_request"};
  for (const auto& stem : stems) {
    bool sender = !FindUnit(rewritten.program, stem, "sender").empty();
    bool receiver = !FindUnit(rewritten.program, stem, "receiver").empty();
    v.Require(sender && receiver, "no unit for " + stem);
  }
  return v;
}

Verdict EchoInterop(const RunResult& rewritten) {
  Verdict v;
  const PacketProgram& p = rewritten.program;
  std::string tx = FindUnit(p, "icmp_echo", "sender");
  std::string rx = FindUnit(p, "icmp_echo", "receiver");
  if (tx.empty() || rx.empty()) {
    v.Require(false, "echo units missing");
    return v;
  }
  std::mt19937 rng(20240501);
  std::uniform_int_distribution<uint32_t> u16(0, 0xFFFF);
  std::uniform_int_distribution<uint32_t> addr(0x0A000002, 0x0AFFFFFE);
  std::uniform_int_distribution<size_t> len(0, kMaxEchoPayload);
  std::uniform_int_distribution<int> byte(0, 255);
  const ChecksumRange range{"icmp", "type", ChecksumRange::End::kEndOfMessage, 0};
  FixedServices svc;
  int passed = 0;
  auto start = Clock::now();
  for (int i = 0; i < kEchoRuns; ++i) {
    uint64_t id = u16(rng), seq = u16(rng);
    std::vector<uint8_t> payload(len(rng));
    for (auto& b : payload) b = static_cast<uint8_t>(byte(rng));
    ExecOptions o;
    o.services = &svc;
    o.presets = {{"ip.dst_addr", addr(rng)}, {"icmp.identifier", id}, {"icmp.sequence_number", seq}};
    o.payload = payload;
    try {
      Packet req = Execute(p, tx, std::nullopt, o);
      FinalizeIpv4(req);
      ExecOptions ro;
      ro.services = &svc;
      Packet rep = Execute(p, rx, req, ro);
      const HeaderInstance* ri = rep.Find("icmp");
      const HeaderInstance* rip = rep.Find("ip");
      bool ok = ri && rip && ri->Get("type") == 0 && ri->Get("identifier") == id &&
                ri->Get("sequence_number") == seq && rep.payload == payload &&
                rip->Get("src_addr") == req.Find("ip")->Get("dst_addr") &&
                rip->Get("dst_addr") == req.Find("ip")->Get("src_addr") && VerifyChecksum(rep, range);
      passed += ok;
    } catch (const std::exception& e) {
      v.Require(false, std::string("run ") + std::to_string(i) + ": " + e.what());
    }
  }
  double took = Seconds(start);
  v.Require(passed == kEchoRuns, std::to_string(passed) + "/" + std::to_string(kEchoRuns) + " replies ok");
  v.Require(took < kEchoBudgetSeconds, "took " + std::to_string(took) + " s");
  return v;
}

Verdict ChecksumOracle() {
  Verdict v;
  std::mt19937 rng(99);
  std::uniform_int_distribution<size_t> words(2, 750);
  std::uniform_int_distribution<int> byte(0, 255);
  std::bernoulli_distribution odd(0.5);
  int mismatches = 0, involution = 0;
  for (int i = 0; i < kChecksumSpans; ++i) {
    std::vector<uint8_t> b(2 * words(rng) + (odd(rng) ? 1 : 0));
    for (auto& x : b) x = static_cast<uint8_t>(byte(rng));
    if (OnesComplementChecksum(b) != testing::OracleChecksum(b)) ++mismatches;
    // Insert at a word-aligned slot and re-sum the full range.
    b[0] = b[1] = 0;
    uint16_t c = OnesComplementChecksum(b);
    b[0] = static_cast<uint8_t>(c >> 8);
    b[1] = static_cast<uint8_t>(c);
    if (OnesComplementSum(b) != 0xFFFF) ++involution;
  }
  v.Require(mismatches == 0, std::to_string(mismatches) + " oracle mismatches");
  v.Require(involution == 0, std::to_string(involution) + " involution failures");
  return v;
}

Verdict Monotonicity(const std::vector<std::pair<std::string, const RunResult*>>& runs) {
  Verdict v;
  for (const auto& [name, run] : runs) {
    for (const auto& s : run->report.sentences) {
      for (size_t i = 1; i < s.stage_counts.size(); ++i)
        v.Require(s.stage_counts[i].second <= s.stage_counts[i - 1].second,
                  name + " " + ToString(s.source) + " count increased");
      bool flagged = s.outcome == Outcome::kAmbiguous || s.outcome == Outcome::kEmpty ||
                     s.outcome == Outcome::kError;
      if (!flagged)
        v.Require(!s.stage_counts.empty() && s.stage_counts.back().second == 1,
                  name + " " + ToString(s.source) + " does not end at 1");
    }
  }
  return v;
}

Verdict AblationDirection() {
  Verdict v;
  Resources res = testing::ShippedResources("icmp/annotations.json");
  std::string spec = ReadFile(testing::DataPath("icmp/rfc792_rewritten.txt"));
  AblationTable none = Ablate(spec, res, ChunkMode::kNone);
  v.Require(none.zero_ablated > none.zero_full,
            "no_chunking zero " + std::to_string(none.zero_ablated) + " vs full " +
                std::to_string(none.zero_full));
  AblationTable nodict = Ablate(spec, res, ChunkMode::kNoDictionary);
  v.Require(nodict.increase >= 1, "no_dictionary increases none");
  return v;
}

Verdict NtpTimeout() {
  Verdict v;
  RunResult r = testing::RunShipped("ntp/ntp.txt");
  auto it = r.program.units.find("ntp_timeout_procedure");
  if (it == r.program.units.end()) {
    v.Require(false, "no ntp_timeout_procedure unit");
    return v;
  }
  const auto& body = it->second.body;
  v.Require(body.size() == 1 && body[0].kind == Instruction::Kind::kIf && body[0].then.size() == 1 &&
                body[0].then[0].kind == Instruction::Kind::kIf,
            "IR is not a nested conditional");
  const std::string want =
      "if (peer.timer >= peer.threshold) {\n"
      "  if (symmetric_mode || client_mode) {\n"
      "    timeout_procedure();\n"
      "  }\n"
      "}\n";
  std::string got = EmitInstructions(body, LayerName("ntp"));
  v.Require(Squash(got) == Squash(want), "emitted:\n" + got);
  return v;
}

uint32_t Le32(const std::string& s, size_t at) {
  uint32_t x = 0;
  for (int i = 3; i >= 0; --i) x = (x << 8) | static_cast<uint8_t>(s[at + i]);
  return x;
}

uint16_t Le16(const std::string& s, size_t at) {
  return static_cast<uint16_t>(static_cast<uint8_t>(s[at]) | (static_cast<uint8_t>(s[at + 1]) << 8));
}

Verdict PcapValidity(const RunResult& rewritten) {
  Verdict v;
  std::vector<ScenarioResult> ran = RunIcmpScenarios(rewritten.program);
  v.Require(!ran.empty(), "no scenarios ran");
  for (const auto& sc : ran) {
    std::vector<std::vector<uint8_t>> packets;
    for (const auto& step : sc.steps) packets.push_back(step.packet.Serialize());
    std::ostringstream out;
    WritePcap(out, packets);
    std::string s = out.str();
    v.Require(s.size() >= 24 && Le32(s, 0) == 0xa1b2c3d4u, sc.name + ": bad magic");
    v.Require(Le16(s, 4) == 2 && Le16(s, 6) == 4, sc.name + ": bad version");
    size_t at = 24;
    for (const auto& pkt : packets) {
      if (at + 16 > s.size()) {
        v.Require(false, sc.name + ": truncated record header");
        break;
      }
      v.Require(Le32(s, at + 8) == pkt.size() && Le32(s, at + 12) == pkt.size(),
                sc.name + ": record length mismatch");
      at += 16 + Le32(s, at + 8);
    }
    v.Require(at == s.size(), sc.name + ": trailing bytes");
  }
  return v;
}

Verdict Discovery() {
  Verdict v;
  Resources res = testing::ShippedResources();
  std::string spec = ReadFile(testing::DataPath("icmp/rfc792_rewritten.txt"));
  RunResult first = RunPipeline(spec, res);
  size_t proposed = DiscoverNonActionable(first.report.failures, res.annotations);
  v.Require(proposed > 0, "first pass proposed nothing");
  for (auto& a : res.annotations.entries) a.confirmed = true;
  RunResult second = RunPipeline(spec, res);
  size_t again = DiscoverNonActionable(second.report.failures, res.annotations);
  v.Require(again == 0, "second pass proposed " + std::to_string(again));
  AnnotationSet shipped = AnnotationSet::Load(testing::DataPath("icmp/annotations.json"));
  v.Require(shipped.ConfirmedComments() == kConfirmedIcmpComments,
            "shipped confirmed = " + std::to_string(shipped.ConfirmedComments()));
  return v;
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int n, const char* name, const std::function<Verdict()>& fn) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.ok = false;
      v.detail = std::string("exception: ") + e.what();
    }
    std::cout << (v.ok ? "PASS" : "FAIL") << " " << n << " " << name;
    if (!v.ok) std::cout << ": " << v.detail;
    std::cout << std::endl;
    failed += !v.ok;
  };

  RunResult original = testing::RunShipped("icmp/rfc792_original.txt");
  RunResult rewritten = testing::RunShipped("icmp/rfc792_rewritten.txt", "icmp/annotations.json");
  RunResult igmp = testing::RunShipped("igmp/rfc1112_appendix1.txt", "igmp/annotations.json");
  RunResult bfd = testing::RunShipped("bfd/rfc5880_reception_rewritten.txt", "bfd/annotations.json");

  report(1, "advice sentence winnows to the compute-checksum reading", AdviceWinnowing);
  report(2, "associativity merges the checksum definition readings", AssociativityMerge);
  report(3, "original ICMP corpus flags the known residual sentences", [&] { return AmbiguityCensus(original); });
  report(4, "rewritten ICMP corpus converges with all eight message types",
         [&] { return RewrittenConvergence(rewritten); });
  report(5, "echo request/reply round trips", [&] { return EchoInterop(rewritten); });
  report(6, "checksum matches the reference oracle", ChecksumOracle);
  report(7, "stage counts are monotone and end at one LF", [&] {
    return Monotonicity({{"icmp-original", &original}, {"icmp-rewritten", &rewritten}, {"igmp", &igmp},
                         {"bfd", &bfd}});
  });
  report(8, "noun-phrase labeling ablation directions", AblationDirection);
  report(9, "NTP timeout sentence emits the nested conditional", NtpTimeout);
  report(10, "pcap captures are well formed", [&] { return PcapValidity(rewritten); });
  report(11, "non-actionable discovery is idempotent", Discovery);

  std::cout << (11 - failed) << "/11 criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}

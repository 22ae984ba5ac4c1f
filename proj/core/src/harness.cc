#include "rfcc/harness.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"

namespace rfcc {

using ojson = nlohmann::ordered_json;

const char* OutcomeName(Outcome o) {
  switch (o) {
    case Outcome::kUnique: return "unique";
    case Outcome::kAmbiguous: return "ambiguous";
    case Outcome::kEmpty: return "zero";
    case Outcome::kNonActionable: return "non_actionable";
    case Outcome::kCodegenFailed: return "codegen_failed";
    case Outcome::kError: return "error";
  }
  return "?";
}

Resources Resources::Load(const PipelineConfig& config) {
  Resources r;
  if (!config.dictionary.empty()) r.dictionary = TermDictionary::Load(config.dictionary);
  for (const auto& path : config.registries) r.registry.LoadFile(path);
  for (const auto& path : config.lexicons) r.lexicon.Merge(Lexicon::Load(path, &r.registry));
  for (const auto& path : config.checks) r.rules.Merge(CheckRuleSet::Load(path, &r.registry));
  for (const auto& path : config.contexts) r.context.Merge(StaticContext::Load(path));
  if (!config.annotations.empty()) r.annotations = AnnotationSet::Load(config.annotations);
  return r;
}

size_t RunReport::Count(Outcome o) const {
  return static_cast<size_t>(std::count_if(sentences.begin(), sentences.end(),
                                           [o](const SentenceReport& s) { return s.outcome == o; }));
}

bool RunReport::Clean() const {
  return Count(Outcome::kAmbiguous) == 0 && Count(Outcome::kEmpty) == 0 &&
         Count(Outcome::kCodegenFailed) == 0 && Count(Outcome::kError) == 0 &&
         assembly_errors.empty();
}

KindOracle BuildKindOracle(const StaticContext& context, const std::vector<HeaderLayout>& layouts) {
  KindOracle o;
  auto add = [](std::set<std::string>& set, const std::string& key) {
    set.insert(key);
    set.insert(KindOracle::Normalize(key));
  };
  for (const auto& [key, fn] : context.functions) {
    add(o.functions, key);
    add(o.functions, fn);
  }
  for (const auto& [key, paths] : context.fields) add(o.fields, key);
  for (const auto& [key, var] : context.state) add(o.fields, key);
  for (const auto& l : layouts) {
    std::string layer = FieldKey(l.protocol);
    for (const auto& f : l.fields) {
      add(o.fields, FieldKey(f.name));
      add(o.fields, layer + "_" + FieldKey(f.name));
    }
  }
  for (const auto& [key, alias] : context.aliases) {
    std::string target = BindingKey(alias);
    if (o.fields.count(target)) add(o.fields, key);
    if (o.functions.count(target)) add(o.functions, key);
  }
  return o;
}

namespace {

const HeaderLayout* LayoutFor(const std::vector<HeaderLayout>& layouts, const DynamicContext& ctx) {
  int i = LayoutIndex(layouts, ctx.protocol, ctx.message);
  return i < 0 ? nullptr : &layouts[i];
}

ParseResult ParseRecord(const SentenceRecord& rec, const Resources& res, ChunkMode mode) {
  ParseOptions opts;
  opts.registry = &res.registry;
  std::vector<Token> tokens = Chunk(rec.text, res.dictionary, res.lexicon, mode);
  ParseResult pr = ParseSentence(tokens, res.lexicon, opts, rec.text);
  if (pr.lfs.empty() && !rec.context.field.empty())
    pr = ReparseWithSubject(pr, rec.context.field, tokens, res.lexicon, opts);
  return pr;
}

}  // namespace

RunResult RunPipeline(std::string_view spec_text, const Resources& res, ChunkMode mode) {
  RunResult out;
  out.document = ExtractParagraphs(spec_text);
  std::vector<HeaderLayout> layouts = ExtractLayouts(out.document);
  KindOracle oracle = BuildKindOracle(res.context, layouts);
  RunReport& report = out.report;
  report.protocol = out.document.protocol;

  std::vector<ConvertedSentence> converted;
  for (const SentenceRecord& rec : BuildSentenceContexts(out.document)) {
    SentenceReport s;
    s.source = rec.source;
    s.text = rec.text;
    s.context = rec.context;
    TermPtr lf;
    try {
      ParseResult pr = ParseRecord(rec, res, mode);
      s.parse_note = pr.note;
      WinnowOutcome w = Winnow(pr.lfs, res.rules, oracle);
      s.stage_counts = w.stage_counts;
      s.isolated_counts = IsolatedCounts(pr.lfs, res.rules, oracle);
      for (const auto& t : w.lfs) s.lfs.push_back(ToString(t));
      switch (w.kind) {
        case WinnowOutcome::Kind::kUnique:
          s.outcome = Outcome::kUnique;
          lf = w.lfs[0];
          break;
        case WinnowOutcome::Kind::kAmbiguous: s.outcome = Outcome::kAmbiguous; break;
        case WinnowOutcome::Kind::kEmpty: s.outcome = Outcome::kEmpty; break;
      }
    } catch (const std::exception& e) {
      s.outcome = Outcome::kError;
      s.error = e.what();
    }

    if (lf && res.annotations.IsConfirmedComment(rec.source, rec.text)) {
      std::vector<TermPtr> tagged = {Pred("@AdvComment", {lf})};
      report.filtered += FilterNonActionable(tagged);
      s.outcome = Outcome::kNonActionable;
      lf = nullptr;
    }

    if (lf) {
      std::string role = res.annotations.RoleFor(rec.source, rec.text);
      if (role.empty()) role = InferRole(rec.text);
      s.context.role = role;
      try {
        Converted code = LfToInstructions(lf, s.context, LayoutFor(layouts, s.context), res.context);
        s.instructions = code.body.size();
        for (const auto& a : code.advice) s.instructions += a.instructions.size();
        converted.push_back({rec.source, s.context, std::move(code)});
      } catch (const CodegenError& e) {
        s.outcome = Outcome::kCodegenFailed;
        s.error = e.what();
        report.failures.push_back({rec.source, rec.text, e.what()});
      }
    }
    report.sentences.push_back(std::move(s));
  }

  out.program = AssembleProgram(converted, layouts, &report.assembly_errors);
  for (const auto& [name, unit] : out.program.units) report.units.push_back(name);
  return out;
}

namespace {

ojson ContextJson(const DynamicContext& c) {
  return ojson{{"protocol", c.protocol}, {"message", c.message}, {"field", c.field}, {"role", c.role}};
}

}  // namespace

std::string ReportToJson(const RunReport& report) {
  ojson j;
  j["protocol"] = report.protocol;
  ojson summary;
  for (Outcome o : {Outcome::kUnique, Outcome::kAmbiguous, Outcome::kEmpty, Outcome::kNonActionable,
                    Outcome::kCodegenFailed, Outcome::kError})
    summary[OutcomeName(o)] = report.Count(o);
  summary["sentences"] = report.sentences.size();
  summary["filtered_non_actionable"] = report.filtered;
  summary["clean"] = report.Clean();
  j["summary"] = summary;
  ojson sentences = ojson::array();
  for (const auto& s : report.sentences) {
    ojson js;
    js["location"] = ToString(s.source);
    js["text"] = s.text;
    js["context"] = ContextJson(s.context);
    js["parse"] = StageNoteName(s.parse_note);
    js["outcome"] = OutcomeName(s.outcome);
    ojson stages = ojson::object();
    for (const auto& [name, n] : s.stage_counts) stages[name] = n;
    js["stage_counts"] = stages;
    ojson iso = ojson::object();
    for (size_t i = 0; i < s.isolated_counts.size(); ++i)
      iso[CheckName(kPipelineOrder[i])] = s.isolated_counts[i];
    js["isolated_counts"] = iso;
    js["lfs"] = s.lfs;
    if (!s.error.empty()) js["error"] = s.error;
    js["instructions"] = s.instructions;
    sentences.push_back(std::move(js));
  }
  j["sentences"] = sentences;
  j["units"] = report.units;
  ojson errs = ojson::array();
  for (const auto& e : report.assembly_errors)
    errs.push_back({{"location", ToString(e.source)}, {"message", e.message}});
  j["assembly_errors"] = errs;
  ojson cands = ojson::array();
  for (const auto& f : report.failures)
    cands.push_back({{"location", ToString(f.location)}, {"text", f.text}, {"reason", f.reason}});
  j["non_actionable_candidates"] = cands;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Metrics

Metrics ComputeMetrics(const RunReport& report) {
  Metrics m;
  std::vector<const SentenceReport*> amb;
  for (const auto& s : report.sentences)
    if (!s.stage_counts.empty() && s.stage_counts[0].second > 1) amb.push_back(&s);
  m.ambiguous_sentences = amb.size();
  if (amb.empty()) return m;

  for (size_t k = 0; k < amb[0]->stage_counts.size(); ++k) {
    StageStats st;
    st.stage = amb[0]->stage_counts[k].first;
    st.min = SIZE_MAX;
    double sum = 0;
    for (const auto* s : amb) {
      size_t n = s->stage_counts[k].second;
      st.min = std::min(st.min, n);
      st.max = std::max(st.max, n);
      sum += static_cast<double>(n);
    }
    st.avg = sum / static_cast<double>(amb.size());
    m.pipeline.push_back(st);
  }
  for (size_t i = 0; i < std::size(kPipelineOrder); ++i) {
    IsolatedStats st;
    st.check = CheckName(kPipelineOrder[i]);
    double removed = 0;
    for (const auto* s : amb) {
      size_t base = s->stage_counts[0].second;
      size_t after = i < s->isolated_counts.size() ? s->isolated_counts[i] : base;
      removed += static_cast<double>(base - after);
      if (after < base) ++st.affected;
    }
    st.mean_removed = removed / static_cast<double>(amb.size());
    m.isolated.push_back(st);
  }
  return m;
}

std::string MetricsToJson(const Metrics& m) {
  ojson j;
  j["ambiguous_sentences"] = m.ambiguous_sentences;
  ojson p = ojson::array();
  for (const auto& s : m.pipeline)
    p.push_back({{"stage", s.stage}, {"min", s.min}, {"avg", s.avg}, {"max", s.max}});
  j["pipeline"] = p;
  ojson iso = ojson::array();
  for (const auto& s : m.isolated)
    iso.push_back({{"check", s.check}, {"mean_removed", s.mean_removed}, {"affected", s.affected}});
  j["isolated"] = iso;
  return j.dump(2) + "\n";
}

std::string MetricsToText(const Metrics& m) {
  std::string out = "ambiguous sentences: " + std::to_string(m.ambiguous_sentences) + "\n";
  if (m.pipeline.empty()) return out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-16s %6s %8s %6s\n", "stage", "min", "avg", "max");
  out += buf;
  for (const auto& s : m.pipeline) {
    std::snprintf(buf, sizeof buf, "%-16s %6zu %8.2f %6zu\n", s.stage.c_str(), s.min, s.avg, s.max);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-16s %12s %9s\n", "check", "mean_removed", "affected");
  out += buf;
  for (const auto& s : m.isolated) {
    std::snprintf(buf, sizeof buf, "%-16s %12.2f %9zu\n", s.check.c_str(), s.mean_removed,
                  s.affected);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ablation

ChunkMode ParseChunkMode(const std::string& name) {
  if (name == "full") return ChunkMode::kFull;
  if (name == "no_dictionary") return ChunkMode::kNoDictionary;
  if (name == "no_chunking") return ChunkMode::kNone;
  throw std::invalid_argument("unknown mode '" + name + "' (full, no_dictionary, no_chunking)");
}

const char* ChunkModeName(ChunkMode m) {
  switch (m) {
    case ChunkMode::kFull: return "full";
    case ChunkMode::kNoDictionary: return "no_dictionary";
    case ChunkMode::kNone: return "no_chunking";
  }
  return "?";
}

AblationTable Ablate(std::string_view spec_text, const Resources& res, ChunkMode mode) {
  AblationTable t;
  t.mode = ChunkModeName(mode);
  SpecDocument doc = ExtractParagraphs(spec_text);
  auto count = [&](const SentenceRecord& rec, ChunkMode m) -> size_t {
    try {
      return ParseRecord(rec, res, m).lfs.size();
    } catch (const ChartOverflow&) {
      return 0;
    }
  };
  for (const SentenceRecord& rec : BuildSentenceContexts(doc)) {
    AblationRow row{rec.source, rec.text, count(rec, ChunkMode::kFull), count(rec, mode)};
    if (row.ablated > row.full) ++t.increase;
    else if (row.ablated < row.full) ++t.decrease;
    else ++t.same;
    if (row.full == 0) ++t.zero_full;
    if (row.ablated == 0) ++t.zero_ablated;
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string AblationToJson(const AblationTable& t) {
  ojson j;
  j["mode"] = t.mode;
  j["increase"] = t.increase;
  j["decrease"] = t.decrease;
  j["same"] = t.same;
  j["zero_full"] = t.zero_full;
  j["zero_ablated"] = t.zero_ablated;
  ojson rows = ojson::array();
  for (const auto& r : t.rows)
    rows.push_back(
        {{"location", ToString(r.source)}, {"text", r.text}, {"full", r.full}, {"ablated", r.ablated}});
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

std::string AblationToText(const AblationTable& t) {
  char buf[160];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-14s %8s %8s %6s %10s %12s\n", "mode", "increase", "decrease",
                "same", "zero(full)", "zero(mode)");
  out += buf;
  std::snprintf(buf, sizeof buf, "%-14s %8zu %8zu %6zu %10zu %12zu\n", t.mode.c_str(), t.increase,
                t.decrease, t.same, t.zero_full, t.zero_ablated);
  out += buf;
  return out;
}

// ---------------------------------------------------------------------------
// Rewrites

namespace {

std::string EscapeRegex(const std::string& s) {
  static const std::string kSpecial = R"(\^$.|?*+()[]{}/)";
  std::string out;
  for (char c : s) {
    if (kSpecial.find(c) != std::string::npos) out += '\\';
    out += c;
  }
  return out;
}

std::vector<std::string> Words(std::string_view s) {
  std::istringstream in{std::string(s)};
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::string Wrap(const std::vector<std::string>& words, size_t indent, size_t width = 72) {
  std::string out;
  std::string line;
  for (const auto& w : words) {
    if (!line.empty() && indent + line.size() + 1 + w.size() > width) {
      out += std::string(indent, ' ') + line + "\n";
      line.clear();
    }
    line += (line.empty() ? "" : " ") + w;
  }
  if (!line.empty()) out += std::string(indent, ' ') + line + "\n";
  return out;
}

struct Edit {
  size_t begin;
  size_t end;
  std::string text;
};

}  // namespace

std::string ApplyRewrites(std::string_view spec_text, const AnnotationSet& annotations) {
  std::string raw(spec_text);
  SpecDocument doc = ExtractParagraphs(raw);
  std::vector<SentenceRecord> records = BuildSentenceContexts(doc);

  // Byte offset of each line start.
  std::vector<size_t> line_start = {0};
  for (size_t i = 0; i < raw.size(); ++i)
    if (raw[i] == '\n') line_start.push_back(i + 1);

  std::vector<std::string> mismatches;
  std::vector<Edit> edits;
  for (const auto& a : annotations.entries) {
    if (a.directive != "rewrite" || !a.confirmed) continue;
    auto rec = std::find_if(records.begin(), records.end(),
                            [&](const SentenceRecord& r) { return r.source == a.location; });
    if (rec == records.end()) {
      mismatches.push_back(ToString(a.location) + ": no sentence at this location");
      continue;
    }
    if (rec->text != a.text) {
      mismatches.push_back(ToString(a.location) + ": expected \"" + a.text + "\", found \"" +
                           rec->text + "\"");
      continue;
    }
    const Paragraph& p = doc.sections[static_cast<size_t>(a.location.section)]
                             .paragraphs[static_cast<size_t>(a.location.paragraph)];
    std::string pattern;
    for (const auto& w : Words(a.text)) pattern += (pattern.empty() ? "" : R"(\s+)") + EscapeRegex(w);
    std::regex re(pattern);
    size_t from = line_start[static_cast<size_t>(std::max(0, p.first_line - 1))];
    // Earlier sentences of the paragraph may repeat the text; skip them.
    int nth = 0;
    for (int k = 0; k < a.location.sentence; ++k)
      if (p.sentences[static_cast<size_t>(k)] == a.text) ++nth;
    std::smatch m;
    auto it = raw.cbegin() + static_cast<std::ptrdiff_t>(from);
    bool found = false;
    while (std::regex_search(it, raw.cend(), m, re)) {
      if (nth-- == 0) {
        found = true;
        break;
      }
      it = m[0].second;
    }
    if (!found) {
      mismatches.push_back(ToString(a.location) + ": text not found in the source");
      continue;
    }
    size_t b = static_cast<size_t>(m[0].first - raw.cbegin());
    edits.push_back({b, b + static_cast<size_t>(m[0].length()), a.rewrite});
  }
  if (!mismatches.empty()) {
    std::string msg = "stale rewrite annotations:";
    for (const auto& s : mismatches) msg += "\n  " + s;
    throw RewriteError(msg);
  }

  // Group edits by block (blank-line delimited) and rewrite each block once.
  auto line_text = [&](size_t i) {
    size_t e = i + 1 < line_start.size() ? line_start[i + 1] : raw.size();
    return raw.substr(line_start[i], e - line_start[i]);
  };
  auto block_of = [&](size_t pos) {
    size_t first = static_cast<size_t>(
        std::upper_bound(line_start.begin(), line_start.end(), pos) - line_start.begin() - 1);
    size_t last = first;
    while (first > 0 && !Trim(line_text(first - 1)).empty()) --first;
    while (last + 1 < line_start.size() && !Trim(line_text(last + 1)).empty()) ++last;
    size_t end = last + 1 < line_start.size() ? line_start[last + 1] : raw.size();
    return std::make_pair(line_start[first], end);
  };
  std::map<size_t, std::pair<size_t, std::vector<Edit>>, std::greater<>> blocks;
  for (const auto& e : edits) {
    auto [b, end] = block_of(e.begin);
    auto& entry = blocks[b];
    entry.first = end;
    entry.second.push_back(e);
  }
  for (auto& [b, entry] : blocks) {
    auto& [end, list] = entry;
    std::string text = raw.substr(b, end - b);
    std::sort(list.begin(), list.end(), [](const Edit& x, const Edit& y) { return x.begin > y.begin; });
    for (const auto& e : list) text.replace(e.begin - b, e.end - e.begin, e.text);
    std::vector<size_t> indents;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line))
      if (!Trim(line).empty()) indents.push_back(line.find_first_not_of(' '));
    bool uniform = !indents.empty() &&
                   std::all_of(indents.begin(), indents.end(), [&](size_t i) { return i == indents[0]; });
    if (uniform) {
      std::string wrapped = Wrap(Words(text), indents[0]);
      if (text.empty() || text.back() != '\n') wrapped.pop_back();
      text = wrapped;
    }
    raw.replace(b, end - b, text);
  }
  return raw;
}

// ---------------------------------------------------------------------------
// Scenarios

std::string FindUnit(const PacketProgram& program, const std::string& stem, const std::string& role) {
  if (!role.empty() && program.units.count(stem + "_" + role)) return stem + "_" + role;
  if (program.units.count(stem)) return stem;
  return "";
}

namespace {

constexpr uint32_t kHostA = 0x0A000101;   // 10.0.1.1
constexpr uint32_t kHostB = 0x0A000202;   // 10.0.2.2
constexpr uint32_t kRouter = 0x0A0001FE;  // 10.0.1.254
constexpr uint32_t kGateway = 0x0A0001FD; // 10.0.1.253

// A router with a subnet table: next hop per subnet, plus the conditions
// that make it answer with an error message instead of forwarding.
struct Router {
  struct Route {
    uint32_t network;
    uint32_t mask;
    uint32_t next_hop;  // 0 = directly attached
  };
  std::vector<Route> routes = {
      {0x0A000100, 0xFFFFFF00, 0},
      {0x0A000200, 0xFFFFFF00, 0},
      {0x0A000300, 0xFFFFFF00, kGateway},
  };
  bool buffer_full = false;

  const Route* Lookup(uint32_t dst) const {
    for (const auto& r : routes)
      if ((dst & r.mask) == r.network) return &r;
    return nullptr;
  }

  // Stem of the error message to send for `datagram`, or "" to forward.
  std::string Decide(const Packet& datagram, uint32_t* gateway, uint32_t* octet) const {
    const HeaderInstance& ip = *datagram.Find("ip");
    const Route* route = Lookup(static_cast<uint32_t>(ip.Get("dst_addr")));
    if (!route) return "destination_unreachable";
    if (ip.Get("ttl") <= 1) return "time_exceeded";
    if (ip.Get("tos") != 0) {
      *octet = static_cast<uint32_t>(ip.FieldByteOffset("tos"));
      return "parameter_problem";
    }
    if (buffer_full) return "source_quench";
    const Route* src_net = Lookup(static_cast<uint32_t>(ip.Get("src_addr")));
    if (route->next_hop != 0 && src_net && src_net->next_hop == 0 &&
        (route->next_hop & src_net->mask) == src_net->network) {
      *gateway = route->next_hop;
      return "redirect";
    }
    return "";
  }
};

Packet Datagram(uint32_t src, uint32_t dst) {
  Packet p;
  HeaderInstance ip("ip", Ipv4Layout());
  ip.Set("version", 4);
  ip.Set("ihl", 5);
  ip.Set("ttl", 64);
  ip.Set("protocol", 17);
  ip.Set("src_addr", src);
  ip.Set("dst_addr", dst);
  p.headers.push_back(std::move(ip));
  for (uint8_t i = 0; i < 16; ++i) p.payload.push_back(static_cast<uint8_t>(0x40 + i));
  FinalizeIpv4(p);
  return p;
}

const ChecksumRange kIcmpRange{"icmp", "type", ChecksumRange::End::kEndOfMessage, 0};

class Runner {
 public:
  Runner(const PacketProgram& program, ScenarioResult& result) : prog_(program), r_(result) {}

  std::optional<Packet> Run(const std::string& actor, const std::string& stem,
                            const std::string& role, const std::optional<Packet>& input,
                            const FixedServices& services, ExecOptions opts = {}) {
    std::string unit = FindUnit(prog_, stem, role);
    if (unit.empty()) {
      r_.failures.push_back("no unit for " + stem + (role.empty() ? "" : " " + role));
      return std::nullopt;
    }
    opts.services = &services;
    try {
      Packet p = Execute(prog_, unit, input, opts);
      r_.steps.push_back({actor, unit, p});
      return p;
    } catch (const std::exception& e) {
      r_.failures.push_back(unit + ": " + e.what());
      return std::nullopt;
    }
  }

  void Expect(bool ok, const std::string& what) {
    if (!ok) r_.failures.push_back(what);
  }

  void ExpectMessage(const std::optional<Packet>& p, uint64_t type) {
    if (!p) return;
    const HeaderInstance* icmp = p->Find("icmp");
    if (!icmp) {
      r_.failures.push_back("no icmp header");
      return;
    }
    Expect(icmp->Get("type") == type,
           "type " + std::to_string(icmp->Get("type")) + ", expected " + std::to_string(type));
    Expect(VerifyChecksum(*p, kIcmpRange), "invalid checksum on type " + std::to_string(type));
  }

 private:
  const PacketProgram& prog_;
  ScenarioResult& r_;
};

uint64_t Field(const std::optional<Packet>& p, const char* header, const char* field) {
  if (!p || !p->Find(header) || !p->Find(header)->Has(field)) return ~0ULL;
  return p->Find(header)->Get(field);
}

ScenarioResult RouterError(const PacketProgram& prog, const std::string& name, Packet datagram,
                           Router router, uint64_t type) {
  ScenarioResult res{name, {}, {}};
  Runner run(prog, res);
  res.steps.push_back({"host_a", "", datagram});
  uint32_t gateway = 0, octet = 0;
  std::string stem = router.Decide(datagram, &gateway, &octet);
  if (stem != name) {
    res.failures.push_back("router decided '" + stem + "'");
    return res;
  }
  FixedServices services(kRouter);
  services.set_gateway(gateway);
  services.set_error_octet(octet);
  std::optional<Packet> msg = run.Run("router", "icmp_" + stem, "sender", datagram, services);
  run.ExpectMessage(msg, type);
  if (!msg) return res;
  run.Expect(Field(msg, "ip", "dst_addr") == kHostA, "error not addressed to the source host");
  std::vector<uint8_t> orig = datagram.Serialize();
  orig.resize(std::min<size_t>(orig.size(), 28));
  run.Expect(msg->payload == orig, "payload is not the original header plus 64 bits");
  if (name == "parameter_problem")
    run.Expect(Field(msg, "icmp", "pointer") == octet, "pointer does not mark the bad octet");
  if (name == "redirect")
    run.Expect(Field(msg, "icmp", "gateway_internet_address") == gateway,
               "redirect does not carry the gateway");
  return res;
}

}  // namespace

std::vector<ScenarioResult> RunIcmpScenarios(const PacketProgram& prog) {
  std::vector<ScenarioResult> out;
  FixedServices host_a(kHostA, 3600000, 7);
  FixedServices host_b(kHostB, 3600050, 5);

  {
    ScenarioResult res{"echo", {}, {}};
    Runner run(prog, res);
    ExecOptions opts;
    opts.presets = {{"ip.dst_addr", kHostB}, {"icmp.identifier", 0x1234}, {"icmp.sequence_number", 1}};
    opts.payload = std::vector<uint8_t>{'p', 'i', 'n', 'g', 0, 1, 2, 3};
    auto req = run.Run("host_a", "icmp_echo", "sender", std::nullopt, host_a, opts);
    run.ExpectMessage(req, 8);
    if (req) {
      auto rep = run.Run("host_b", "icmp_echo", "receiver", req, host_b);
      run.ExpectMessage(rep, 0);
      run.Expect(Field(rep, "ip", "dst_addr") == kHostA && Field(rep, "ip", "src_addr") == kHostB,
                 "reply addresses not reversed");
      run.Expect(Field(rep, "icmp", "identifier") == 0x1234 &&
                     Field(rep, "icmp", "sequence_number") == 1,
                 "identifier or sequence number changed");
      run.Expect(rep && rep->payload == req->payload, "echo data not returned");
    }
    out.push_back(std::move(res));
  }

  Router router;
  out.push_back(RouterError(prog, "destination_unreachable", Datagram(kHostA, 0x0A090001), router, 3));
  {
    Packet d = Datagram(kHostA, kHostB);
    d.Find("ip")->Set("ttl", 1);
    FinalizeIpv4(d);
    out.push_back(RouterError(prog, "time_exceeded", d, router, 11));
  }
  {
    Packet d = Datagram(kHostA, kHostB);
    d.Find("ip")->Set("tos", 0xFF);
    FinalizeIpv4(d);
    out.push_back(RouterError(prog, "parameter_problem", d, router, 12));
  }
  {
    Router busy = router;
    busy.buffer_full = true;
    out.push_back(RouterError(prog, "source_quench", Datagram(kHostA, kHostB), busy, 4));
  }
  out.push_back(RouterError(prog, "redirect", Datagram(kHostA, 0x0A000303), router, 5));

  {
    ScenarioResult res{"timestamp", {}, {}};
    Runner run(prog, res);
    ExecOptions opts;
    opts.presets = {{"ip.dst_addr", kHostB}, {"icmp.identifier", 7}, {"icmp.sequence_number", 1}};
    auto req = run.Run("host_a", "icmp_timestamp", "sender", std::nullopt, host_a, opts);
    run.ExpectMessage(req, 13);
    run.Expect(Field(req, "icmp", "originate_timestamp") != 0, "originate timestamp not set");
    if (req) {
      auto rep = run.Run("host_b", "icmp_timestamp", "receiver", req, host_b);
      run.ExpectMessage(rep, 14);
      uint64_t orig = Field(req, "icmp", "originate_timestamp");
      uint64_t recv = Field(rep, "icmp", "receive_timestamp");
      uint64_t xmit = Field(rep, "icmp", "transmit_timestamp");
      run.Expect(Field(rep, "icmp", "originate_timestamp") == orig, "originate timestamp changed");
      run.Expect(recv != 0 && xmit != 0 && xmit >= recv, "receive/transmit timestamps not ordered");
      run.Expect(Field(rep, "ip", "dst_addr") == kHostA, "reply addresses not reversed");
    }
    out.push_back(std::move(res));
  }
  {
    ScenarioResult res{"information", {}, {}};
    Runner run(prog, res);
    ExecOptions opts;
    opts.presets = {{"ip.dst_addr", 0}, {"icmp.identifier", 9}, {"icmp.sequence_number", 2}};
    auto req = run.Run("host_a", "icmp_information_request", "sender", std::nullopt, host_a, opts);
    run.ExpectMessage(req, 15);
    if (req) {
      auto rep = run.Run("host_b", "icmp_information_request", "receiver", req, host_b);
      run.ExpectMessage(rep, 16);
      run.Expect(Field(rep, "ip", "dst_addr") == kHostA, "reply addresses not reversed");
    }
    out.push_back(std::move(res));
  }
  return out;
}

void WriteArtifacts(const std::string& dir, const RunResult& result,
                    const std::vector<ScenarioResult>& scenarios) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
    out << text;
  };
  write("report.json", ReportToJson(result.report));
  write("program.c", EmitSourceText(result.program));
  for (const auto& s : scenarios) {
    std::vector<std::vector<uint8_t>> packets;
    for (const auto& step : s.steps) packets.push_back(step.packet.Serialize());
    WritePcap(((fs::path(dir) / s.name).string() + ".pcap"), packets);
  }
}

}  // namespace rfcc

#include "rfcc/document_model.h"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

#include "json.hpp"
#include "rfcc/lexicon.h"

namespace rfcc {

const char* ParagraphKindName(ParagraphKind k) {
  switch (k) {
    case ParagraphKind::kProse: return "prose";
    case ParagraphKind::kHeaderArt: return "header_art";
    case ParagraphKind::kFieldDescription: return "field_description";
    case ParagraphKind::kPseudoCode: return "pseudo_code";
  }
  return "?";
}

std::string ToString(const SourceLocation& loc) {
  return std::to_string(loc.section) + ":" + std::to_string(loc.paragraph) + ":" +
         std::to_string(loc.sentence);
}

namespace {

struct Block {
  int indent = 0;
  int first_line = 0;
  std::vector<std::string> lines;  // with indentation
};

std::string Strip(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<Block> SplitBlocks(std::string_view raw) {
  std::vector<Block> blocks;
  std::istringstream in{std::string(raw)};
  std::string line;
  int lineno = 0;
  Block cur;
  auto flush = [&] {
    if (!cur.lines.empty()) blocks.push_back(std::move(cur));
    cur = Block{};
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t lead = line.find_first_not_of(" \t");
    if (lead == std::string::npos) {
      flush();
      continue;
    }
    if (line.substr(0, lead).find('\t') != std::string::npos)
      throw DocumentError(lineno, "tab in indentation");
    if (cur.lines.empty()) {
      cur.first_line = lineno;
      cur.indent = static_cast<int>(lead);
    }
    cur.lines.push_back(line);
  }
  flush();
  return blocks;
}

std::string JoinText(const Block& b) {
  std::string out;
  for (const auto& l : b.lines) {
    std::string s = Strip(l);
    if (s.empty()) continue;
    if (!out.empty()) out += ' ';
    out += s;
  }
  // Collapse internal whitespace runs.
  std::string collapsed;
  bool space = false;
  for (char c : out) {
    if (c == ' ') {
      if (!space) collapsed += c;
      space = true;
    } else {
      collapsed += c;
      space = false;
    }
  }
  return collapsed;
}

bool IsArt(const Block& b) {
  for (const auto& l : b.lines)
    if (l.find("+-+") != std::string::npos) return true;
  return false;
}

bool EndsSentence(const std::string& text) {
  return !text.empty() && (text.back() == '.' || text.back() == ';' || text.back() == '?' ||
                           text.back() == '!');
}

bool IsHeading(const Block& b) {
  if (b.indent != 0 || b.lines.size() != 1) return false;
  std::string t = Strip(b.lines[0]);
  return !t.empty() && !EndsSentence(t);
}

bool IsLabelLine(const Block& b) {
  if (b.lines.size() != 1) return false;
  std::string t = Strip(b.lines[0]);
  return !t.empty() && !EndsSentence(t) && t.size() <= 60 &&
         std::isalpha(static_cast<unsigned char>(t[0]));
}

bool IsPseudoCode(const Block& b) {
  if (b.lines.size() < 2) return false;
  size_t sym = 0, total = 0;
  for (const auto& l : b.lines) {
    for (char c : l) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      ++total;
      if (std::string_view("=<>(){};:+*/|&!").find(c) != std::string_view::npos) ++sym;
    }
  }
  return total > 0 && sym * 100 >= total * 12;
}

bool NonFieldLabel(const std::string& label) {
  static const char* kLabels[] = {"description", "summary", "purpose", "note",
                                  "notes",       "example", "discussion"};
  std::string l = FieldKey(label);
  return std::any_of(std::begin(kLabels), std::end(kLabels),
                     [&](const char* k) { return l == k; });
}

const std::regex& ValueCodeRe() {
  static const std::regex re(R"(^\s*(\d+)\s*=\s*(.*?)\s*[;.,]?\s*$)");
  return re;
}

const std::regex& ValueForRe() {
  static const std::regex re(R"(^\s*(\d+)\s+for\s+(.*?)\s*[;.,]?\s*$)");
  return re;
}

const std::regex& BareIntRe() {
  static const std::regex re(R"(^\s*(\d+)\s*[;.,]?\s*$)");
  return re;
}

// Adds the content of one block under a label paragraph.
void AddLabelContent(Paragraph& p, const Block& b) {
  std::smatch m;
  std::vector<std::string> prose;
  for (const auto& l : b.lines) {
    if (std::regex_match(l, m, ValueCodeRe())) {
      p.value_codes.push_back({std::stoll(m[1]), m[2]});
      continue;
    }
    prose.push_back(l);
  }
  if (prose.empty()) return;
  Block rest = b;
  rest.lines = prose;
  std::string text = JoinText(rest);
  if (std::regex_match(text, m, BareIntRe())) {
    p.value_codes.push_back({std::stoll(m[1]), ""});
  } else if (std::regex_match(text, m, ValueForRe())) {
    p.value_codes.push_back({std::stoll(m[1]), m[2]});
  }
  for (auto& s : SplitSentences(text)) p.sentences.push_back(std::move(s));
}

void AssignParents(Section& s) {
  for (size_t i = 0; i < s.paragraphs.size(); ++i) {
    s.paragraphs[i].parent = -1;
    for (size_t j = i; j-- > 0;) {
      if (s.paragraphs[j].indent_level < s.paragraphs[i].indent_level) {
        s.paragraphs[i].parent = static_cast<int>(j);
        break;
      }
    }
  }
}

std::string ProtocolOf(const std::string& title) {
  size_t colon = title.find(':');
  std::string head = colon == std::string::npos ? title : title.substr(0, colon);
  head = Strip(head);
  size_t sp = head.find(' ');
  return colon == std::string::npos && sp != std::string::npos ? head.substr(0, sp) : head;
}

}  // namespace

std::vector<std::string> SplitSentences(std::string_view text) {
  static const char* kAbbrev[] = {"e.g.", "i.e.", "etc.", "vs.", "cf.", "fig.", "no.",
                                  "sec.", "approx."};
  std::vector<std::string> out;
  std::string t = Strip(text);
  size_t start = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] != '.') continue;
    if (i + 1 < t.size() && !std::isspace(static_cast<unsigned char>(t[i + 1]))) continue;
    // Word ending at this period.
    size_t ws = t.rfind(' ', i);
    ws = ws == std::string::npos ? 0 : ws + 1;
    std::string word = ToLower(t.substr(ws, i + 1 - ws));
    while (!word.empty() && (word[0] == '(' || word[0] == '"')) word.erase(0, 1);
    bool abbrev = std::any_of(std::begin(kAbbrev), std::end(kAbbrev),
                              [&](const char* a) { return word == a; });
    if (abbrev) continue;
    std::string s = Strip(t.substr(start, i + 1 - start));
    if (!s.empty()) out.push_back(s);
    start = i + 1;
  }
  std::string tail = Strip(t.substr(std::min(start, t.size())));
  if (!tail.empty()) out.push_back(tail);
  return out;
}

SpecDocument ExtractParagraphs(std::string_view raw) {
  SpecDocument doc;
  std::vector<Block> blocks = SplitBlocks(raw);
  size_t i = 0;
  if (blocks.size() >= 2 && IsHeading(blocks[0]) && IsHeading(blocks[1])) {
    doc.title = Strip(blocks[0].lines[0]);
    doc.protocol = ProtocolOf(doc.title);
    i = 1;
  }
  auto current = [&]() -> Section& {
    if (doc.sections.empty()) doc.sections.push_back({});
    return doc.sections.back();
  };
  while (i < blocks.size()) {
    const Block& b = blocks[i];
    if (IsArt(b)) {
      Paragraph p;
      p.indent_level = b.indent;
      p.kind = ParagraphKind::kHeaderArt;
      p.lines = b.lines;
      p.first_line = b.first_line;
      current().paragraphs.push_back(std::move(p));
      ++i;
      continue;
    }
    if (IsHeading(b)) {
      doc.sections.push_back({Strip(b.lines[0]), {}});
      ++i;
      continue;
    }
    if (IsLabelLine(b)) {
      Paragraph p;
      p.indent_level = b.indent;
      p.first_line = b.first_line;
      p.lines = b.lines;
      std::string label = Strip(b.lines[0]);
      bool group = label.back() == ':';
      if (group) label.pop_back();
      p.label = Strip(label);
      size_t j = i + 1;
      while (j < blocks.size() && blocks[j].indent > b.indent && !IsArt(blocks[j])) {
        AddLabelContent(p, blocks[j]);
        p.lines.insert(p.lines.end(), blocks[j].lines.begin(), blocks[j].lines.end());
        ++j;
      }
      bool has_content = j > i + 1;
      if (!has_content || group || NonFieldLabel(p.label)) {
        p.kind = ParagraphKind::kProse;
        if (!has_content && !group) p.sentences = SplitSentences(JoinText(b));
        if (!has_content && !group) p.label.clear();
      } else {
        p.kind = ParagraphKind::kFieldDescription;
      }
      current().paragraphs.push_back(std::move(p));
      i = j;
      continue;
    }
    Paragraph p;
    p.indent_level = b.indent;
    p.first_line = b.first_line;
    p.lines = b.lines;
    if (IsPseudoCode(b)) {
      p.kind = ParagraphKind::kPseudoCode;
    } else {
      p.sentences = SplitSentences(JoinText(b));
    }
    current().paragraphs.push_back(std::move(p));
    ++i;
  }
  for (auto& s : doc.sections) AssignParents(s);
  return doc;
}

// ---------------------------------------------------------------------------
// Header art

namespace {

struct ArtRow {
  std::vector<std::string> lines;  // '|' lines between two rulings
  int line_no = 0;
};

std::vector<ArtRow> ArtRows(const Paragraph& art) {
  std::vector<ArtRow> rows;
  ArtRow cur;
  for (size_t k = 0; k < art.lines.size(); ++k) {
    std::string t = Strip(art.lines[k]);
    if (t.rfind("+-", 0) == 0) {
      if (!cur.lines.empty()) rows.push_back(std::move(cur));
      cur = ArtRow{};
      continue;
    }
    if (!t.empty() && t[0] == '|') {
      if (cur.lines.empty()) cur.line_no = art.first_line + static_cast<int>(k);
      cur.lines.push_back(art.lines[k]);
    }
  }
  if (!cur.lines.empty()) rows.push_back(std::move(cur));
  return rows;
}

bool IsTrailerLabel(const std::string& label) {
  std::string l = ToLower(label);
  return l.find("data") != std::string::npos || l.find("...") != std::string::npos;
}

}  // namespace

HeaderLayout ExtractHeaderLayout(const Paragraph& art, const std::string& protocol,
                                 const std::string& message) {
  HeaderLayout layout;
  layout.protocol = protocol;
  layout.message = message;
  static const std::regex explicit_width(R"(^(.*?)\s*\((\d+)\)$)");
  std::vector<ArtRow> rows = ArtRows(art);
  for (size_t r = 0; r < rows.size(); ++r) {
    const ArtRow& row = rows[r];
    const std::string& first = row.lines[0];
    std::vector<size_t> pipes;
    for (size_t k = 0; k < first.size(); ++k)
      if (first[k] == '|') pipes.push_back(k);
    std::string tail = Strip(first.substr(pipes.back() + 1));
    if (pipes.size() == 1 || !tail.empty()) {
      // Open-ended row such as "|  Data ...".
      layout.trailer = Strip(first.substr(pipes[0] + 1));
      continue;
    }
    std::vector<HeaderField> cells;
    int row_bits = 0;
    for (size_t k = 0; k + 1 < pipes.size(); ++k) {
      std::string label;
      for (const auto& l : row.lines) {
        if (pipes[k + 1] > l.size()) continue;
        std::string part = Strip(l.substr(pipes[k] + 1, pipes[k + 1] - pipes[k] - 1));
        if (part.empty()) continue;
        if (!label.empty()) label += ' ';
        label += part;
      }
      int width = static_cast<int>((pipes[k + 1] - pipes[k]) / 2);
      std::smatch m;
      if (std::regex_match(label, m, explicit_width)) {
        label = m[1];
        width = std::stoi(m[2]);
      }
      if (label.empty())
        throw DocumentError(row.line_no, "unlabeled field span in header row " +
                                             std::to_string(r + 1));
      cells.push_back({label, width});
      row_bits += width;
    }
    if (row_bits != 32)
      throw DocumentError(row.line_no, "header row " + std::to_string(r + 1) + " sums to " +
                                           std::to_string(row_bits) + " bits");
    if (cells.size() == 1 && IsTrailerLabel(cells[0].name) && r + 1 == rows.size()) {
      layout.trailer = cells[0].name;
      continue;
    }
    for (auto& c : cells) {
      if (!layout.fields.empty() && layout.fields.back().name == c.name) {
        layout.fields.back().width_bits += c.width_bits;  // field continued on next row
      } else {
        layout.fields.push_back(std::move(c));
      }
    }
  }
  return layout;
}

std::vector<HeaderLayout> ExtractLayouts(const SpecDocument& doc) {
  std::vector<HeaderLayout> out;
  for (const auto& s : doc.sections)
    for (const auto& p : s.paragraphs)
      if (p.kind == ParagraphKind::kHeaderArt)
        out.push_back(ExtractHeaderLayout(p, doc.protocol, s.heading));
  return out;
}

std::vector<FieldDescription> ExtractFieldDescriptions(const SpecDocument& doc) {
  std::vector<FieldDescription> out;
  for (size_t si = 0; si < doc.sections.size(); ++si) {
    const Section& s = doc.sections[si];
    std::vector<HeaderLayout> layouts;
    for (const auto& p : s.paragraphs)
      if (p.kind == ParagraphKind::kHeaderArt)
        layouts.push_back(ExtractHeaderLayout(p, doc.protocol, s.heading));
    for (size_t pi = 0; pi < s.paragraphs.size(); ++pi) {
      const Paragraph& p = s.paragraphs[pi];
      if (p.kind != ParagraphKind::kFieldDescription) continue;
      FieldDescription fd;
      fd.field_name = FieldKey(p.label);
      fd.sentences = p.sentences;
      fd.value_codes = p.value_codes;
      fd.matched = std::any_of(layouts.begin(), layouts.end(), [&](const HeaderLayout& l) {
        return l.IndexOf(fd.field_name) >= 0;
      });
      fd.section = static_cast<int>(si);
      fd.paragraph = static_cast<int>(pi);
      out.push_back(std::move(fd));
    }
  }
  return out;
}

std::vector<SentenceRecord> BuildSentenceContexts(const SpecDocument& doc) {
  std::vector<SentenceRecord> out;
  for (size_t si = 0; si < doc.sections.size(); ++si) {
    const Section& s = doc.sections[si];
    for (size_t pi = 0; pi < s.paragraphs.size(); ++pi) {
      const Paragraph& p = s.paragraphs[pi];
      if (p.kind == ParagraphKind::kHeaderArt || p.kind == ParagraphKind::kPseudoCode)
        continue;
      for (size_t k = 0; k < p.sentences.size(); ++k) {
        SentenceRecord r;
        r.text = p.sentences[k];
        r.context.protocol = doc.protocol;
        r.context.message = s.heading;
        if (p.kind == ParagraphKind::kFieldDescription) r.context.field = FieldKey(p.label);
        r.source = {static_cast<int>(si), static_cast<int>(pi), static_cast<int>(k)};
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

std::string DocumentToJson(const SpecDocument& doc) {
  nlohmann::ordered_json j;
  j["title"] = doc.title;
  j["protocol"] = doc.protocol;
  j["sections"] = nlohmann::ordered_json::array();
  for (const auto& s : doc.sections) {
    nlohmann::ordered_json js;
    js["heading"] = s.heading;
    js["paragraphs"] = nlohmann::ordered_json::array();
    for (const auto& p : s.paragraphs) {
      nlohmann::ordered_json jp;
      jp["indent_level"] = p.indent_level;
      jp["kind"] = ParagraphKindName(p.kind);
      jp["label"] = p.label;
      jp["parent"] = p.parent;
      jp["sentences"] = p.sentences;
      auto codes = nlohmann::ordered_json::array();
      for (const auto& v : p.value_codes) codes.push_back({{"code", v.code}, {"meaning", v.meaning}});
      jp["value_codes"] = codes;
      if (p.kind == ParagraphKind::kHeaderArt || p.kind == ParagraphKind::kPseudoCode)
        jp["lines"] = p.lines;
      js["paragraphs"].push_back(std::move(jp));
    }
    j["sections"].push_back(std::move(js));
  }
  return j.dump(2);
}

std::string ContextToJson(const DynamicContext& ctx) {
  nlohmann::ordered_json j;
  j["protocol"] = ctx.protocol;
  j["message"] = ctx.message;
  j["field"] = ctx.field;
  j["role"] = ctx.role;
  return j.dump();
}

}  // namespace rfcc

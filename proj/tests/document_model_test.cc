#include <gtest/gtest.h>

#include "rfcc/document_model.h"
#include "support.h"

namespace rfcc {
namespace {

const char* kEcho = R"(ICMP: Internet Control Message Protocol

Echo or Echo Reply Message

    0                   1                   2                   3
    0 1 2 3 4 5 6 7 8 9 0 1 2 3 4 5 6 7 8 9 0 1 2 3 4 5 6 7 8 9 0 1
   +-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+
   |     Type      |     Code      |          Checksum             |
   +-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+
   |           Identifier          |        Sequence Number        |
   +-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+
   |     Data ...
   +-+-+-+-+-

   ICMP Fields:

   Type

      8 for echo message;

      0 for echo reply message.

   Code

      0

   Checksum

      The checksum is the 16-bit ones's complement of the one's
      complement sum of the ICMP message starting with the ICMP Type.
      For computing the checksum , the checksum field should be zero.

   Identifier

      If code = 0, an identifier to aid in matching echos and replies,
      may be zero.

   Sequence Number

      If code = 0, a sequence number to aid in matching echos and
      replies, may be zero.
)";

std::vector<std::string> Labels(const Section& s) {
  std::vector<std::string> out;
  for (const auto& p : s.paragraphs)
    if (!p.label.empty()) out.push_back(p.label);
  return out;
}

TEST(ExtractParagraphs, EchoSectionShape) {
  SpecDocument doc = ExtractParagraphs(kEcho);
  EXPECT_EQ(doc.protocol, "ICMP");
  ASSERT_EQ(doc.sections.size(), 1u);
  const Section& s = doc.sections[0];
  EXPECT_EQ(s.heading, "Echo or Echo Reply Message");
  int art = 0;
  for (const auto& p : s.paragraphs) art += p.kind == ParagraphKind::kHeaderArt;
  EXPECT_EQ(art, 1);
  std::vector<std::string> labels = Labels(s);
  for (const char* want : {"Type", "Code", "Checksum", "Identifier", "Sequence Number"})
    EXPECT_NE(std::find(labels.begin(), labels.end(), want), labels.end()) << want;
}

TEST(ExtractParagraphs, EmptyInputHasNoSections) {
  EXPECT_TRUE(ExtractParagraphs("").sections.empty());
  EXPECT_TRUE(ExtractParagraphs("\n\n\n").sections.empty());
}

TEST(ExtractParagraphs, TabIndentIsAnError) {
  EXPECT_THROW(ExtractParagraphs("Heading\n\n\tindented with a tab.\n"), DocumentError);
}

TEST(ExtractParagraphs, IndentedBlockGetsShallowerParent) {
  SpecDocument doc = ExtractParagraphs(kEcho);
  const Section& s = doc.sections[0];
  for (const auto& p : s.paragraphs) {
    if (p.parent < 0) continue;
    ASSERT_LT(p.parent, static_cast<int>(s.paragraphs.size()));
    EXPECT_LT(s.paragraphs[p.parent].indent_level, p.indent_level);
  }
}

TEST(ExtractParagraphs, ValueCodesAreCollected) {
  SpecDocument doc = ExtractParagraphs(kEcho);
  std::vector<FieldDescription> fields = ExtractFieldDescriptions(doc);
  auto type = std::find_if(fields.begin(), fields.end(),
                           [](const auto& f) { return f.field_name == "type"; });
  ASSERT_NE(type, fields.end());
  EXPECT_TRUE(type->matched);
  EXPECT_EQ(type->value_codes, (std::vector<ValueCode>{{8, "echo message"}, {0, "echo reply message"}}));
}

TEST(ExtractHeaderLayout, EchoWidths) {
  SpecDocument doc = ExtractParagraphs(kEcho);
  std::vector<HeaderLayout> layouts = ExtractLayouts(doc);
  ASSERT_EQ(layouts.size(), 1u);
  const HeaderLayout& l = layouts[0];
  std::vector<HeaderField> want = {
      {"Type", 8}, {"Code", 8}, {"Checksum", 16}, {"Identifier", 16}, {"Sequence Number", 16}};
  EXPECT_EQ(l.fields, want);
  EXPECT_EQ(l.TotalBits(), 64);
  EXPECT_EQ(l.TotalBytes(), 8);
  EXPECT_FALSE(l.trailer.empty());
  EXPECT_EQ(l.IndexOf("sequence_number"), 4);
  EXPECT_EQ(l.OffsetBits(4), 48);
}

TEST(ExtractHeaderLayout, ExplicitWidthsOnOneRow) {
  Paragraph art;
  art.kind = ParagraphKind::kHeaderArt;
  art.lines = {"+-+-+", "|Type(8)|Code(8)|Checksum(16)|", "+-+-+"};
  HeaderLayout l = ExtractHeaderLayout(art, "icmp", "x");
  EXPECT_EQ(l.fields, (std::vector<HeaderField>{{"Type", 8}, {"Code", 8}, {"Checksum", 16}}));
}

TEST(ExtractHeaderLayout, RowThatIsNot32BitsIsAnError) {
  Paragraph art;
  art.kind = ParagraphKind::kHeaderArt;
  art.lines = {"+-+-+", "|Type(8)|Code(8)|", "+-+-+"};
  EXPECT_THROW(ExtractHeaderLayout(art), std::exception);
}

TEST(ExtractHeaderLayout, ShippedIgmpLayout) {
  SpecDocument doc = ExtractParagraphs(ReadFile(testing::DataPath("igmp/rfc1112_appendix1.txt")));
  std::vector<HeaderLayout> layouts = ExtractLayouts(doc);
  ASSERT_EQ(layouts.size(), 1u);
  std::vector<int> widths;
  for (const auto& f : layouts[0].fields) widths.push_back(f.width_bits);
  EXPECT_EQ(widths, (std::vector<int>{4, 4, 8, 16, 32}));
}

TEST(ExtractHeaderLayout, ShippedIcmpLayoutsAreWholeWords) {
  SpecDocument doc = ExtractParagraphs(ReadFile(testing::DataPath("icmp/rfc792_original.txt")));
  std::vector<HeaderLayout> layouts = ExtractLayouts(doc);
  EXPECT_GE(layouts.size(), 8u);
  for (const auto& l : layouts) {
    EXPECT_EQ(l.TotalBits() % 32, 0) << l.message;
    EXPECT_EQ(l.fields.at(0).name, "Type");
  }
}

TEST(FieldKey, FoldsPunctuationAndCase) {
  EXPECT_EQ(FieldKey("Sequence Number"), "sequence_number");
  EXPECT_EQ(FieldKey("Internet Header + 64 bits"), "internet_header_64_bits");
  EXPECT_EQ(FieldKey("Type"), "type");
}

TEST(SplitSentences, KeepsNumbersAndSplitsOnPeriodSpace) {
  EXPECT_EQ(SplitSentences("Codes 0, 1, 4, and 5 may be received.  Codes 2 and 3 may not."),
            (std::vector<std::string>{"Codes 0, 1, 4, and 5 may be received.", "Codes 2 and 3 may not."}));
  EXPECT_EQ(SplitSentences("Version 1.0 is used."), (std::vector<std::string>{"Version 1.0 is used."}));
}

TEST(BuildSentenceContexts, FieldSentencesCarryProtocolMessageAndField) {
  SpecDocument doc = ExtractParagraphs(kEcho);
  std::vector<SentenceRecord> recs = BuildSentenceContexts(doc);
  auto id = std::find_if(recs.begin(), recs.end(), [](const auto& r) {
    return r.text.rfind("If code = 0, an identifier", 0) == 0;
  });
  ASSERT_NE(id, recs.end());
  EXPECT_EQ(id->context.protocol, "ICMP");
  EXPECT_EQ(id->context.field, "identifier");
  EXPECT_EQ(id->context.message, "Echo or Echo Reply Message");
}

TEST(BuildSentenceContexts, SourceLocationsAreStrictlyIncreasing) {
  SpecDocument doc = ExtractParagraphs(ReadFile(testing::DataPath("icmp/rfc792_original.txt")));
  std::vector<SentenceRecord> recs = BuildSentenceContexts(doc);
  ASSERT_FALSE(recs.empty());
  for (size_t i = 1; i < recs.size(); ++i) EXPECT_LT(recs[i - 1].source, recs[i].source);
}

TEST(BuildSentenceContexts, DestinationUnreachableDescriptionHasNoField) {
  SpecDocument doc = ExtractParagraphs(ReadFile(testing::DataPath("icmp/rfc792_original.txt")));
  std::vector<SentenceRecord> recs = BuildSentenceContexts(doc);
  auto desc = std::find_if(recs.begin(), recs.end(), [](const auto& r) {
    return r.text.rfind("Codes 0, 1, 4, and 5", 0) == 0;
  });
  ASSERT_NE(desc, recs.end());
  EXPECT_EQ(desc->context, (DynamicContext{"ICMP", "Destination Unreachable Message", "", ""}));
}

TEST(BuildSentenceContexts, ShippedCorpusSentenceCount) {
  SpecDocument doc = ExtractParagraphs(ReadFile(testing::DataPath("icmp/rfc792_original.txt")));
  EXPECT_EQ(BuildSentenceContexts(doc).size(), 90u);
}

TEST(DocumentJson, MentionsHeadingsAndKinds) {
  std::string json = DocumentToJson(ExtractParagraphs(kEcho));
  EXPECT_NE(json.find("Echo or Echo Reply Message"), std::string::npos);
  EXPECT_NE(json.find(ParagraphKindName(ParagraphKind::kHeaderArt)), std::string::npos);
}

}  // namespace
}  // namespace rfcc

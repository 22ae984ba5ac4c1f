#include <gtest/gtest.h>

#include "rfcc/lexicon.h"
#include "support.h"

namespace rfcc {
namespace {

std::vector<std::string> Norms(const std::vector<Token>& toks) {
  std::vector<std::string> out;
  for (const auto& t : toks) out.push_back(t.norm);
  return out;
}

TEST(TermDictionary, ParsesAndDeduplicates) {
  EXPECT_EQ(TermDictionary::Parse("checksum\necho reply message\n").size(), 2u);
  EXPECT_EQ(TermDictionary::Parse("checksum\nchecksum\n").size(), 1u);
}

TEST(TermDictionary, LookupIsCaseInsensitive) {
  TermDictionary d = TermDictionary::Parse("Echo Reply Message\n");
  EXPECT_TRUE(d.Contains("echo reply message"));
  EXPECT_TRUE(d.Contains("ECHO reply Message"));
  EXPECT_FALSE(d.Contains("echo reply"));
}

TEST(TermDictionary, ShippedHasAtLeast400Terms) {
  TermDictionary d = TermDictionary::Load(testing::DataPath("terms.txt"));
  EXPECT_GE(d.size(), 400u);
  for (const auto& t : d.terms()) EXPECT_FALSE(t.empty());
}

TEST(Chunking, GoodLabelingMergesWholeMessageName) {
  TermDictionary d = TermDictionary::Parse("echo reply message\n");
  auto toks = ChunkNounPhrases("the destination of the echo reply message", d);
  ASSERT_FALSE(toks.empty());
  EXPECT_EQ(toks.back().norm, "echo reply message");
  EXPECT_TRUE(toks.back().merged);
}

TEST(Chunking, PoorLabelingLeavesMessageSeparate) {
  TermDictionary d = TermDictionary::Parse("echo reply\n");
  auto norms = Norms(ChunkNounPhrases("the destination of the echo reply message", d));
  EXPECT_EQ(norms, (std::vector<std::string>{"the", "destination", "of", "echo reply", "message"}));
}

TEST(Chunking, NoHitsGivesWords) {
  TermDictionary d;
  auto toks = ChunkNounPhrases("nothing matches here", d);
  EXPECT_EQ(Norms(toks), (std::vector<std::string>{"nothing", "matches", "here"}));
}

TEST(Chunking, TokensConcatenateBackToInput) {
  TermDictionary d = TermDictionary::Load(testing::DataPath("terms.txt"));
  for (const char* s : {"The checksum is the 16-bit ones's complement of the ICMP message.",
                        "If code = 0, an identifier to aid in matching echos and replies, may be zero."}) {
    EXPECT_EQ(Detokenize(s, ChunkNounPhrases(s, d)), s);
  }
}

TEST(Chunking, ParenthesizedAsidesDoNotSplitTerms) {
  TermDictionary d = TermDictionary::Parse("multipoint bit\n");
  auto norms = Norms(ChunkNounPhrases("If the Multipoint (M) bit is nonzero", d));
  EXPECT_EQ(norms, (std::vector<std::string>{"if", "multipoint bit", "is", "nonzero"}));
}

TEST(Chunking, NoChunkingModeKeepsEveryWord) {
  TermDictionary d = TermDictionary::Parse("checksum field\n");
  Lexicon lex;
  auto toks = Chunk("the checksum field is zero", d, lex, ChunkMode::kNone);
  EXPECT_EQ(toks.size(), 5u);
}

TEST(LexEntryParse, CopulaEntry) {
  LexEntry e = ParseLexEntry("is |- (S\\NP)/NP : \\x.\\y.@Is(y,x)");
  EXPECT_EQ(e.SurfaceText(), "is");
  EXPECT_TRUE(CatEqual(e.category, ParseCategory("(S\\NP)/NP")));
  EXPECT_EQ(LambdaArity(e.semantics), 2);
}

TEST(LexEntryParse, ZeroArityEntry) {
  LexEntry e = ParseLexEntry("zero |- NP : @Num(0)");
  EXPECT_EQ(LambdaArity(e.semantics), 0);
  EXPECT_EQ(ToString(e.semantics), "@Num(0)");
}

TEST(LexEntryParse, ArityMismatchIsAnError) {
  EXPECT_THROW(ParseLexEntry("is |- (S\\NP)/NP : \\x.@Is(x,'a')"), std::invalid_argument);
  EXPECT_THROW(ParseLexEntry("zero |- NP : \\x.x"), std::invalid_argument);
}

class ShippedLexicon : public ::testing::Test {
 protected:
  void SetUp() override {
    registry_ = PredicateRegistry::Builtin();
    registry_.LoadFile(testing::DataPath("predicates.txt"));
    lexicon_ = Lexicon::Load(testing::DataPath("lexicon.txt"), &registry_);
  }

  std::vector<LexEntry> Lookup(const std::string& word, bool merged = false) const {
    Token t;
    t.text = t.norm = word;
    t.merged = merged;
    return lexicon_.Lookup(t);
  }

  PredicateRegistry registry_;
  Lexicon lexicon_;
};

TEST_F(ShippedLexicon, DictionaryChunkWithoutEntriesIsAnNp) {
  EXPECT_TRUE(Lookup("checksum").empty());
  auto entries = Lookup("checksum", true);
  ASSERT_EQ(entries.size(), 1u);
  EXPECT_EQ(ToString(entries[0].category), "NP");
  EXPECT_EQ(ToString(entries[0].semantics), "'checksum'");
}

TEST_F(ShippedLexicon, IsHasTheAssignmentEntry) {
  bool found = false;
  for (const auto& e : Lookup("is"))
    found |= CatEqual(e.category, ParseCategory("(S\\NP)/NP")) && e.semantics->kind == Term::Kind::kAbs;
  EXPECT_TRUE(found);
}

TEST_F(ShippedLexicon, UnknownWordHasNoEntries) { EXPECT_TRUE(Lookup("frobnicate").empty()); }

TEST_F(ShippedLexicon, EveryEntryRespectsArityAndRegistry) {
  for (const auto& e : lexicon_.Entries()) {
    EXPECT_EQ(LambdaArity(e.semantics), e.category->Arity()) << e.SurfaceText();
  }
  for (const auto& p : lexicon_.PredicatesUsed()) EXPECT_TRUE(registry_.Has(p)) << p;
}

TEST_F(ShippedLexicon, SerializeRoundTrips) {
  Lexicon again = Lexicon::Parse(lexicon_.Serialize(), "<round-trip>", &registry_);
  EXPECT_EQ(again.size(), lexicon_.size());
}

TEST(PredicateRegistry, ExtendRejectsBadLines) {
  PredicateRegistry r = PredicateRegistry::Builtin();
  EXPECT_THROW(r.Extend("@Bad 2 1"), std::exception);
  EXPECT_THROW(r.Extend("NoAt 1 1"), std::exception);
  r.Extend("@Fine 1 2 field_name any");
  EXPECT_TRUE(r.Has("@Fine"));
}

TEST(PredicateRegistry, ArityCheck) {
  PredicateRegistry r = PredicateRegistry::Builtin();
  EXPECT_TRUE(r.ArityOk(ParseTerm("@Is('a',@Num(0))")));
  EXPECT_FALSE(r.ArityOk(ParseTerm("@Is('a')")));
}

}  // namespace
}  // namespace rfcc

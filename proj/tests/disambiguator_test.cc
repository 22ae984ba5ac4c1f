#include <gtest/gtest.h>

#include <functional>
#include <set>

#include "rfcc/disambiguator.h"
#include "support.h"

namespace rfcc {
namespace {

LfSet Lfs(std::initializer_list<const char*> texts) {
  LfSet out;
  for (const char* t : texts) out.push_back(ParseTerm(t));
  return out;
}

std::set<std::string> Keys(const LfSet& lfs) {
  std::set<std::string> out;
  for (const auto& lf : lfs) out.insert(ToString(lf));
  return out;
}

KindOracle TestOracle() {
  KindOracle o;
  o.functions = {"compute", "ones_complement", "ones_complement_sum"};
  o.fields = {"checksum", "code", "identifier", "type"};
  return o;
}

// The two lowest-scoring readings of the advice sentence: LF1 computes a
// number, LF2 computes the checksum.
const char* kLf1 = "@AdvBefore(@Action('compute',@Num(0)),@Is(@And('checksum_field','checksum'),@Num(0)))";
const char* kLf2 = "@AdvBefore(@Action('compute','checksum'),@Is('checksum_field',@Num(0)))";

TEST(TypeCheck, RemovesNumericOperandKeepsFieldOperand) {
  CheckRuleSet rules = CheckRuleSet::Parse("type @Action 2 field_name function_name string predicate\n");
  LfSet out = ApplyTypeChecks(Lfs({kLf1, kLf2}), rules, TestOracle());
  EXPECT_EQ(Keys(out), (std::set<std::string>{kLf2}));
}

TEST(TypeCheck, EmptyInEmptyOut) {
  CheckRuleSet rules = CheckRuleSet::Parse("type @Action 2 field_name\n");
  EXPECT_TRUE(ApplyTypeChecks({}, rules, TestOracle()).empty());
  EXPECT_TRUE(Winnow({}, rules, TestOracle()).lfs.empty());
  EXPECT_EQ(Winnow({}, rules, TestOracle()).kind, WinnowOutcome::Kind::kEmpty);
}

TEST(KindOracle, FieldSuffixAndNumbers) {
  KindOracle o = TestOracle();
  EXPECT_EQ(o.KindOf(Str("checksum_field")), ArgKind::kFieldName);
  EXPECT_EQ(o.KindOf(Str("Checksum Field")), ArgKind::kFieldName);
  EXPECT_EQ(o.KindOf(Str("compute")), ArgKind::kFunctionName);
  EXPECT_EQ(o.KindOf(Num(3)), ArgKind::kNumber);
  EXPECT_EQ(o.KindOf(ParseTerm("@Num(0)")), ArgKind::kNumber);
  EXPECT_EQ(o.KindOf(Str("datagram")), ArgKind::kString);
  EXPECT_EQ(o.KindOf(ParseTerm("@Is('a','b')")), ArgKind::kPredicate);
}

TEST(ArgOrderCheck, ConditionIsNeverAPermission) {
  CheckRuleSet rules = CheckRuleSet::Parse("argorder @If forbid(predicate:@May,_)\n");
  const char* test = "@If(@Is('code',@Num(0)),@May(@Is('identifier',@Num(0))))";
  const char* swapped = "@If(@May(@Is('identifier',@Num(0))),@Is('code',@Num(0)))";
  EXPECT_EQ(Keys(ApplyArgOrderChecks(Lfs({test, swapped}), rules, TestOracle())),
            (std::set<std::string>{test}));
}

TEST(ArgOrderCheck, KindPatternsAndClasses) {
  CheckRuleSet rules = CheckRuleSet::Parse(
      "class value @Num\n"
      "argorder @Is forbid(number,field_name)\n"
      "argorder @Eq forbid(value,_)\n");
  LfSet out = ApplyArgOrderChecks(
      Lfs({"@Is('code',@Num(0))", "@Is(@Num(0),'code')", "@Eq(@Num(1),'x')", "@Eq('x',@Num(1))"}),
      rules, TestOracle());
  EXPECT_EQ(Keys(out), (std::set<std::string>{"@Is('code',@Num(0))", "@Eq('x',@Num(1))"}));
}

TEST(PredOrderCheck, OfNeverWrapsIs) {
  CheckRuleSet rules = CheckRuleSet::Parse("predorder forbid parent=@Of child=@Is\n");
  const char* good = "@Is(@Of('a','b'),'c')";
  const char* bad = "@Of('a',@Is('b','c'))";
  EXPECT_EQ(Keys(ApplyPredOrderChecks(Lfs({good, bad}), rules)), (std::set<std::string>{good}));
}

TEST(PredOrderCheck, PositionRestrictsTheMatch) {
  CheckRuleSet rules = CheckRuleSet::Parse("predorder forbid parent=@If child=@And pos=2\n");
  const char* cond_and = "@If(@And(@Is('a',@Num(1)),@Is('b',@Num(2))),@Is('c',@Num(3)))";
  const char* body_and = "@If(@Is('a',@Num(1)),@And(@Is('b',@Num(2)),@Is('c',@Num(3))))";
  EXPECT_EQ(Keys(ApplyPredOrderChecks(Lfs({cond_and, body_and}), rules)),
            (std::set<std::string>{cond_and}));
}

TEST(DistributivityCheck, KeepsFactoredForm) {
  const char* factored = "@Is(@And('a','b'),'c')";
  const char* distributed = "@And(@Is('a','c'),@Is('b','c'))";
  EXPECT_EQ(Keys(ApplyDistributivityCheck(Lfs({factored, distributed}))),
            (std::set<std::string>{factored}));
}

TEST(DistributivityCheck, DistributedFormAloneSurvives) {
  const char* distributed = "@And(@Is('a','c'),@Is('b','c'))";
  EXPECT_EQ(ApplyDistributivityCheck(Lfs({distributed})).size(), 1u);
}

TEST(DistributivityCheck, DifferentOperandsAreNotMerged) {
  const char* factored = "@Is(@And('a','b'),'c')";
  const char* other = "@And(@Is('a','c'),@Is('b','d'))";
  EXPECT_EQ(ApplyDistributivityCheck(Lfs({factored, other})).size(), 2u);
}

// Oracle: distribute P(@And(x1..xn), rest) into @And(P(x1,rest),...) by hand
// and check every conjunct order against the factored reading.
TEST(DistributivityCheck, ThreeConjunctsInEveryOrder) {
  std::vector<std::string> names = {"a", "b", "c"};
  std::sort(names.begin(), names.end());
  const std::string factored = "@Is(@And('a','b','c'),'v')";
  do {
    std::string flat = "@And(";
    for (size_t i = 0; i < names.size(); ++i)
      flat += (i ? "," : "") + std::string("@Is('") + names[i] + "','v')";
    flat += ")";
    std::string nested = "@And(@And(@Is('" + names[0] + "','v'),@Is('" + names[1] +
                         "','v')),@Is('" + names[2] + "','v'))";
    for (const std::string& d : {flat, nested}) {
      LfSet out = ApplyDistributivityCheck(Lfs({factored.c_str(), d.c_str()}));
      ASSERT_EQ(out.size(), 1u) << d;
      EXPECT_EQ(ToString(out[0]), factored) << d;
    }
  } while (std::next_permutation(names.begin(), names.end()));
}

TEST(AssociativityCheck, ChecksumSentenceBracketingsCollapse) {
  LfSet lfs = Lfs(
      {"@StartsWith(@Is('checksum',@Of(@Action('ones_complement'),@Of(@Action('ones_complement_sum'),"
       "'icmp_message'))),'icmp_type')",
       "@StartsWith(@Is('checksum',@Of(@Of(@Action('ones_complement'),@Action('ones_complement_sum')),"
       "'icmp_message')),'icmp_type')"});
  EXPECT_EQ(ApplyAssociativityCheck(lfs, {"@Of"}).size(), 1u);
  EXPECT_EQ(ApplyAssociativityCheck(lfs, {}).size(), 2u);
}

// All binary bracketings of a leaf sequence, built independently of the
// flattening code.
std::vector<std::string> Bracketings(const std::string& pred, const std::vector<std::string>& leaves,
                                     size_t b, size_t e) {
  if (e - b == 1) return {"'" + leaves[b] + "'"};
  std::vector<std::string> out;
  for (size_t m = b + 1; m < e; ++m)
    for (const auto& l : Bracketings(pred, leaves, b, m))
      for (const auto& r : Bracketings(pred, leaves, m, e)) out.push_back(pred + "(" + l + "," + r + ")");
  return out;
}

TEST(AssociativityCheck, FourLeafChainHasFiveBracketingsAndOneSurvivor) {
  std::vector<std::string> leaves = {"a", "b", "c", "d"};
  std::vector<std::string> trees = Bracketings("@Of", leaves, 0, leaves.size());
  ASSERT_EQ(trees.size(), 5u);
  LfSet lfs;
  for (const auto& t : trees) lfs.push_back(ParseTerm(t));
  LfSet out = ApplyAssociativityCheck(lfs, {"@Of"});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(ToString(out[0]), "@Of(@Of(@Of('a','b'),'c'),'d')");
}

TEST(AssociativityCheck, NonAssociativePredicateKeepsBoth) {
  LfSet lfs = Lfs({"@P(@P('a','b'),'c')", "@P('a',@P('b','c'))"});
  EXPECT_EQ(ApplyAssociativityCheck(lfs, {"@Of"}).size(), 2u);
}

TEST(AssociativityCheck, FlattenAndLeftDeepRoundTrip) {
  TermPtr t = ParseTerm("@And('a',@And('b',@And('c','d')))");
  TermPtr flat = FlattenAssociative(t, {"@And"});
  EXPECT_EQ(ToString(flat), "@And('a','b','c','d')");
  EXPECT_EQ(ToString(LeftDeep(flat, {"@And"})), "@And(@And(@And('a','b'),'c'),'d')");
}

class ShippedRules : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { res_ = new Resources(testing::ShippedResources()); }
  static void TearDownTestSuite() {
    delete res_;
    res_ = nullptr;
  }

  LfSet Parse(const std::string& s) const {
    ParseOptions o;
    o.registry = &res_->registry;
    return ParseSentence(Chunk(s, res_->dictionary, res_->lexicon, ChunkMode::kFull), res_->lexicon, o, s)
        .lfs;
  }

  KindOracle Oracle() const { return BuildKindOracle(res_->context, {}); }

  static Resources* res_;
};

Resources* ShippedRules::res_ = nullptr;

TEST_F(ShippedRules, AdviceSentenceWinnowsToTheComputeChecksumReading) {
  LfSet lfs = Parse("For computing the checksum, the checksum field should be zero");
  ASSERT_EQ(lfs.size(), 5u);
  WinnowOutcome w = Winnow(lfs, res_->rules, Oracle());
  ASSERT_EQ(w.kind, WinnowOutcome::Kind::kUnique);
  EXPECT_EQ(ToString(w.lfs[0]), kLf2);
  EXPECT_EQ(w.stage_counts.front(), (std::pair<std::string, size_t>{"base", 5}));
}

TEST_F(ShippedRules, StageCountsNeverIncrease) {
  for (const char* s :
       {"For computing the checksum, the checksum field should be zero",
        "The checksum is the 16-bit ones's complement of the one's complement sum of the ICMP "
        "message starting with the ICMP Type.",
        "If code = 0, an identifier to aid in matching echos and replies, may be zero."}) {
    WinnowOutcome w = Winnow(Parse(s), res_->rules, Oracle());
    ASSERT_EQ(w.stage_counts.size(), 6u);
    for (size_t i = 1; i < w.stage_counts.size(); ++i)
      EXPECT_LE(w.stage_counts[i].second, w.stage_counts[i - 1].second) << s;
    EXPECT_EQ(w.lfs.size(), w.stage_counts.back().second);
  }
}

TEST_F(ShippedRules, IsolatedCountsNeverExceedBase) {
  LfSet lfs = Parse("For computing the checksum, the checksum field should be zero");
  std::vector<size_t> iso = IsolatedCounts(lfs, res_->rules, Oracle());
  ASSERT_EQ(iso.size(), 5u);
  for (size_t n : iso) EXPECT_LE(n, lfs.size());
  EXPECT_EQ(iso[0], 1u);
}

TEST_F(ShippedRules, ShippedRulesReferenceRegisteredPredicates) {
  EXPECT_FALSE(res_->rules.type_rules.empty());
  EXPECT_FALSE(res_->rules.arg_order_rules.empty());
  EXPECT_FALSE(res_->rules.pred_order_rules.empty());
  EXPECT_TRUE(res_->rules.associative.count("@Of"));
}

TEST(CheckRuleSetParse, RejectsMalformedLines) {
  EXPECT_THROW(CheckRuleSet::Parse("type @Is\n"), std::exception);
  EXPECT_THROW(CheckRuleSet::Parse("argorder @If (a,b)\n"), std::exception);
  EXPECT_THROW(CheckRuleSet::Parse("predorder forbid parent=@If\n"), std::exception);
  EXPECT_THROW(CheckRuleSet::Parse("bogus @If\n"), std::exception);
  PredicateRegistry reg = PredicateRegistry::Builtin();
  EXPECT_THROW(CheckRuleSet::Parse("assoc @NoSuchPredicate\n", "<t>", &reg), std::exception);
}

TEST(CheckRuleSetParse, CommentsAndMerge) {
  CheckRuleSet a = CheckRuleSet::Parse("# comment\n\nassoc @And\n");
  CheckRuleSet b = CheckRuleSet::Parse("assoc @Or\ntype @Is 1 field_name\n");
  a.Merge(b);
  EXPECT_EQ(a.associative, (std::set<std::string>{"@And", "@Or"}));
  EXPECT_EQ(a.type_rules.size(), 1u);
}

}  // namespace
}  // namespace rfcc

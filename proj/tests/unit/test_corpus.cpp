#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "techval/corpus/index.hpp"
#include "techval/corpus/io.hpp"

using namespace techval;
using techval::testing::make_record;

namespace {

std::string line(const std::string& id, const std::string& grant = R"("grant_date": "2001-05-01", )") {
  return R"({"patent_id": ")" + id + R"(", "filing_date": "2000-01-01", )" + grant +
         R"("abstract_word_count": 10, "fulltext_word_count": 100, "ipcs": ["H01L21/02"], "lifetime_years": 4})";
}

}  // namespace

TEST(Ipc, ResolvesLevels) {
  auto ipc = Ipc::parse("h01l 21/02");
  ASSERT_TRUE(ipc);
  EXPECT_EQ(ipc->code(), "H01L21/02");
  EXPECT_EQ(ipc->depth(), 5);
  EXPECT_EQ(*ipc->at(IpcLevel::kSection), "H");
  EXPECT_EQ(*ipc->at(IpcLevel::kClass), "H01");
  EXPECT_EQ(*ipc->at(IpcLevel::kSubclass), "H01L");
  EXPECT_EQ(Ipc::parse("G")->depth(), 1);
  EXPECT_FALSE(Ipc::parse("G")->at(IpcLevel::kClass));
  EXPECT_FALSE(Ipc::parse("Z01L"));
  EXPECT_FALSE(Ipc::parse(""));
}

TEST(Corpus, CanonicalNames) {
  EXPECT_EQ(canonical_name("  Acme   Corp., Inc. "), "acme corp inc");
  EXPECT_EQ(canonical_name("Beta K.K."), "beta kk");
  EXPECT_EQ(canonical_name("..."), "");
}

TEST(Corpus, ParsesValidJsonl) {
  std::istringstream in(line("A") + "\n" + line("B") + "\n" + line("C") + "\n");
  auto res = parse_jsonl(in, "fixture.jsonl");
  ASSERT_EQ(res.records.size(), 3u);
  EXPECT_TRUE(res.diagnostics.empty());
  EXPECT_EQ(res.records[0].patent_id, "A");
  EXPECT_EQ(res.records[2].patent_id, "C");
  EXPECT_EQ(res.records[1].grant_date - res.records[1].filing_date, 486);
}

TEST(Corpus, MalformedRowBecomesDiagnostic) {
  std::istringstream in(line("A") + "\n" + line("B", "") + "\n" + line("C") + "\n");
  auto res = parse_jsonl(in, "fixture.jsonl");
  ASSERT_EQ(res.records.size(), 2u);
  ASSERT_EQ(res.diagnostics.size(), 1u);
  EXPECT_EQ(res.diagnostics[0].line, 2u);
  EXPECT_NE(res.diagnostics[0].message.find("grant_date"), std::string::npos);
}

TEST(Corpus, StrictModeIsFatal) {
  std::istringstream in(line("A") + "\n" + line("B", "") + "\n");
  EXPECT_THROW(parse_jsonl(in, "fixture.jsonl", true), ParseError);
}

TEST(Corpus, DuplicateIdsAreFatal) {
  std::string text;
  for (int i = 0; i < 10; ++i) text += line(i == 7 ? "P3" : "P" + std::to_string(i)) + "\n";
  std::istringstream in(text);
  EXPECT_THROW(parse_jsonl(in, "fixture.jsonl"), DataError);
}

TEST(Corpus, InvariantViolationsAreDiagnosed) {
  std::string bad_dates = R"({"patent_id": "X", "filing_date": "2002-01-01", "grant_date": "2001-01-01",
    "abstract_word_count": 1, "fulltext_word_count": 1})";
  std::string bad_ipc = R"({"patent_id": "Y", "filing_date": "2000-01-01", "grant_date": "2001-01-01",
    "abstract_word_count": 1, "fulltext_word_count": 1, "ipcs": ["Q99"]})";
  std::string bad_offset = R"({"patent_id": "Z", "filing_date": "2000-01-01", "grant_date": "2001-01-01",
    "abstract_word_count": 1, "fulltext_word_count": 1, "maintenance_events": [{"event_year_offset": 5}]})";
  auto strip = [](std::string s) {
    s.erase(std::remove(s.begin(), s.end(), '\n'), s.end());
    return s;
  };
  std::istringstream in(strip(bad_dates) + "\n" + strip(bad_ipc) + "\n" + strip(bad_offset) + "\nnot json\n");
  auto res = parse_jsonl(in, "f");
  EXPECT_TRUE(res.records.empty());
  EXPECT_EQ(res.diagnostics.size(), 4u);
}

TEST(Corpus, UnreadableFileIsIoError) {
  EXPECT_THROW(parse_corpus("/nonexistent/corpus.jsonl", CorpusFormat::kJsonl), IoError);
}

TEST(Label, LifetimeRule) {
  auto r = make_record("A", "2001-01-01", {"H01L21/02"});
  r.lifetime_years = Lifetime::of_years(4);
  EXPECT_EQ(derive_label(r), Label::kNvp);
  r.lifetime_years = Lifetime::max();
  EXPECT_EQ(derive_label(r), Label::kVp);
  r.lifetime_years = Lifetime::of_years(8);
  EXPECT_EQ(derive_label(r), Label::kExcluded);
  r.lifetime_years = Lifetime::of_years(12);
  EXPECT_EQ(derive_label(r), Label::kExcluded);
  r.lifetime_years.reset();
  EXPECT_EQ(derive_label(r), Label::kExcluded);
}

TEST(Label, PartitionsAnyCorpus) {
  Rng rng(5);
  std::map<Label, int> counts;
  const int n = 500;
  for (int i = 0; i < n; ++i) {
    auto r = make_record("A", "2001-01-01", {"H01L"});
    const auto pick = rng.index(5);
    if (pick == 4) {
      r.lifetime_years.reset();
    } else if (pick == 3) {
      r.lifetime_years = Lifetime::max();
    } else {
      r.lifetime_years = Lifetime::of_years(static_cast<int>(4 * (pick + 1)));
    }
    const auto a = derive_label(r);
    EXPECT_EQ(a, derive_label(r));
    ++counts[a];
  }
  EXPECT_EQ(counts[Label::kVp] + counts[Label::kNvp] + counts[Label::kExcluded], n);
}

TEST(Corpus, CanonicalEmissionRoundTrips) {
  auto res = parse_corpus(techval::testing::data_dir() / "golden/corpus.jsonl", CorpusFormat::kJsonl);
  ASSERT_EQ(res.records.size(), 5u);
  auto reversed = res.records;
  std::reverse(reversed.begin(), reversed.end());
  const auto text = emit_canonical_jsonl(reversed);
  EXPECT_EQ(text, emit_canonical_jsonl(res.records));

  std::istringstream in(text);
  auto again = parse_jsonl(in, "canonical");
  EXPECT_EQ(again.records, res.records);
  EXPECT_EQ(emit_canonical_jsonl(again.records), text);
}

TEST(Corpus, RandomCorpusRoundTrips) {
  auto corpus = techval::testing::random_corpus(60, 3);
  corpus[4].lifetime_years = Lifetime::of_years(8);
  corpus[5].lifetime_years.reset();
  corpus[6].backward_citations.push_back({"X1", "JP", Date::parse("1990-02-03"), {"H01L21/00"}, "A title, with comma"});
  corpus[6].backward_citations.push_back({"X2", "", std::nullopt, {}, std::nullopt});
  corpus[7].assignees.push_back({"zeta", "KR", 3});
  std::istringstream in(emit_canonical_jsonl(corpus));
  auto parsed = parse_jsonl(in, "c");
  EXPECT_EQ(parsed.records, corpus);  // already in patent_id order
}

TEST(Corpus, CsvBundleMatchesJsonl) {
  auto dir = techval::testing::temp_dir("bundle");
  write_file(dir / "patents.csv",
             "patent_id,filing_date,grant_date,title,abstract_word_count,fulltext_word_count,ipcs,"
             "npl_citation_count,lifetime_years\n"
             "A1,2000-01-01,2001-02-03,\"Gate, electrode\",12,300,H01L21/02;G06F17/50,2,max\n"
             "A2,2000-01-01,,Broken,1,1,H01L,0,4\n"
             "A3,2000-06-01,2002-02-03,Memory,5,50,G11C11/40,0,4\n");
  write_file(dir / "claims.csv", "patent_id,is_independent,word_count\nA1,true,40\nA1,false,12\nA3,1,9\n");
  write_file(dir / "citations.csv",
             "patent_id,cited_id,cited_country,cited_filing_date,cited_ipcs,cited_title\n"
             "A1,US9,us,1999-01-01,H01L21/00,Old gate\nA3,JP1,JP,,,\n");
  write_file(dir / "parties.csv",
             "patent_id,role,name,country,overdue_fee_count\nA1,assignee,Acme Corp.,US,2\nA1,inventor,Bob,US,\n"
             "A2,assignee,Ghost,US,\n");
  auto res = parse_corpus(dir, CorpusFormat::kCsvBundle);
  ASSERT_EQ(res.records.size(), 2u);
  ASSERT_EQ(res.diagnostics.size(), 1u);
  EXPECT_EQ(res.diagnostics[0].line, 3u);
  const auto& a1 = res.records[0];
  EXPECT_EQ(a1.title, "Gate, electrode");
  EXPECT_EQ(a1.ipcs, (std::vector<std::string>{"H01L21/02", "G06F17/50"}));
  ASSERT_EQ(a1.claims.size(), 2u);
  EXPECT_TRUE(a1.claims[0].is_independent);
  ASSERT_EQ(a1.backward_citations.size(), 1u);
  EXPECT_EQ(a1.backward_citations[0].cited_country, "US");
  EXPECT_EQ(a1.assignees[0].name, "acme corp");
  EXPECT_EQ(a1.assignees[0].overdue_fee_count, 2);
  EXPECT_TRUE(a1.lifetime_years->is_max);

  // Same content through JSONL yields the same record.
  std::istringstream in(emit_canonical_jsonl({a1}));
  EXPECT_EQ(parse_jsonl(in, "x").records.front(), a1);
}

TEST(Index, CumulativeCount) {
  std::vector<PatentRecord> corpus{make_record("A", "2001-03-01", {"H01L21/02"}),
                                   make_record("B", "2003-03-01", {"H01L29/78"})};
  auto idx = build_index(corpus);
  EXPECT_EQ(idx.cumulative_through("H01L", 2003), 2);
  EXPECT_EQ(idx.cumulative_through("H01L", 2002), 1);
  EXPECT_EQ(idx.cumulative_through("H01L", 2000), 0);
  EXPECT_EQ(idx.patents_in("H01L", 2003), 1);
}

TEST(Index, DistinctApplicantsDeduplicate) {
  std::vector<PatentRecord> corpus{make_record("A", "2001-03-01", {"H01L21/02"}, {"Acme Corp."}),
                                   make_record("B", "2001-05-01", {"H01L29/78"}, {"ACME corp"}),
                                   make_record("C", "2001-07-01", {"H01L23/00"}, {"Beta"})};
  auto idx = build_index(corpus);
  EXPECT_EQ(idx.applicants_in("H01L", 2001), 2);
  EXPECT_EQ(idx.patents_in("H01L", 2001), 3);
}

TEST(Index, EmptyCorpusAndShallowIpcAreErrors) {
  EXPECT_THROW(build_index({}), DataError);
  std::vector<PatentRecord> corpus{make_record("A", "2001-03-01", {"H01"})};
  EXPECT_THROW(build_index(corpus, IpcLevel::kSubclass), DataError);
  EXPECT_NO_THROW(build_index(corpus, IpcLevel::kClass));
}

TEST(Index, MatchesBruteForceRecount) {
  for (auto level : {IpcLevel::kSection, IpcLevel::kClass, IpcLevel::kSubclass}) {
    auto corpus = techval::testing::random_corpus(50, 11);
    auto idx = build_index(corpus, level);
    std::set<std::string> keys;
    for (const auto& r : corpus) {
      for (const auto& c : r.ipcs) keys.insert(*Ipc::parse(c)->at(level));
    }
    for (const auto& key : keys) {
      int previous = 0;
      for (int year = 1999; year <= 2005; ++year) {
        int count = 0, cumulative = 0;
        std::set<std::string> applicants;
        for (const auto& r : corpus) {
          bool has = false;
          for (const auto& c : r.ipcs) has = has || *Ipc::parse(c)->at(level) == key;
          if (!has) continue;
          if (r.grant_date.year() <= year) ++cumulative;
          if (r.grant_date.year() == year) {
            ++count;
            for (const auto& a : r.assignees) applicants.insert(a.name);
          }
        }
        EXPECT_EQ(idx.patents_in(key, year), count) << key << " " << year;
        EXPECT_EQ(idx.cumulative_through(key, year), cumulative) << key << " " << year;
        EXPECT_EQ(idx.applicants_in(key, year), static_cast<int>(applicants.size())) << key << " " << year;
        EXPECT_GE(cumulative, previous);
        previous = cumulative;
      }
    }
    for (const auto& r : corpus) {
      for (const auto& a : r.assignees) {
        int prior = 0;
        for (const auto& o : corpus) {
          bool has = false;
          for (const auto& oa : o.assignees) has = has || oa.name == a.name;
          if (has && o.grant_date < r.grant_date) ++prior;
        }
        EXPECT_EQ(idx.assignee_prior(a.name, r.grant_date), prior);
      }
    }
  }
}

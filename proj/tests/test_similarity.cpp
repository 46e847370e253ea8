#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "multiref/corpus.hpp"
#include "multiref/errors.hpp"
#include "multiref/rng.hpp"
#include "multiref/similarity.hpp"

using namespace multiref;

namespace {

EmbeddingTable table_from_text(const std::string& text,
                               EmbeddingLoadReport* report = nullptr) {
  std::istringstream in(text);
  return load_embeddings(in, report);
}

const char kSmallTable[] =
    "alpha 1 0 0\n"
    "beta 0 1 0\n"
    "gamma 0 0 1\n"
    "delta 1 1 0\n"
    "omega 2 0 0\n";

ParallelGroup group_with_texts(const std::string& id,
                               const std::vector<std::string>& texts) {
  ParallelGroup group;
  group.group_id = id;
  group.language = "xx";
  group.book_id = "b";
  group.source_text = "src";
  for (std::size_t i = 0; i < texts.size(); ++i) {
    group.references.push_back(
        {id + ".r" + std::to_string(i), "", texts[i]});
  }
  return group;
}

// Independent cosine for cross-checks: re-averages vectors and never clamps.
double oracle_cosine(const std::string& a, const std::string& b,
                     const EmbeddingTable& table) {
  auto va = embed(a, table);
  auto vb = embed(b, table);
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    dot += va[i] * vb[i];
    na += va[i] * va[i];
    nb += vb[i] * vb[i];
  }
  return dot / std::sqrt(na) / std::sqrt(nb);
}

}  // namespace

TEST_CASE("load_embeddings parses dimensions and entries") {
  EmbeddingLoadReport report;
  EmbeddingTable table = table_from_text(kSmallTable, &report);
  CHECK(table.dimension() == 3);
  CHECK(table.size() == 5);
  CHECK(report.entries == 5);
  CHECK(report.duplicate_conflicts == 0);
  auto v = table.lookup("delta");
  REQUIRE(v.size() == 3);
  CHECK(v[0] == 1.0f);
  CHECK(v[1] == 1.0f);
  CHECK(v[2] == 0.0f);
  CHECK(table.lookup("missing").empty());
}

TEST_CASE("load_embeddings keeps the first of duplicate tokens") {
  EmbeddingLoadReport report;
  EmbeddingTable table =
      table_from_text("tok 1 0\ntok 0 1\nother 0 5\n", &report);
  CHECK(table.size() == 2);
  CHECK(report.duplicate_conflicts == 1);
  CHECK(table.lookup("tok")[0] == 1.0f);
}

TEST_CASE("load_embeddings rejects malformed tables") {
  CHECK_THROWS_AS(table_from_text(""), Error);
  CHECK_THROWS_AS(table_from_text("solo\n"), ParseError);
  CHECK_THROWS_AS(table_from_text("a 1 2\nb 1\n"), ParseError);
  CHECK_THROWS_AS(table_from_text("a 1 x\n"), ParseError);
  CHECK_THROWS_AS(table_from_text("a 1 inf\n"), ParseError);
}

TEST_CASE("load_embeddings accepts tab separators and blank lines") {
  EmbeddingTable table = table_from_text("a\t1\t2\n\nb 3 4\n");
  CHECK(table.size() == 2);
  CHECK(table.lookup("b")[1] == 4.0f);
}

TEST_CASE("embed averages in-vocabulary token vectors") {
  EmbeddingTable table = table_from_text(kSmallTable);
  auto v = embed("alpha beta", table);
  REQUIRE(v.size() == 3);
  CHECK(v[0] == doctest::Approx(0.5));
  CHECK(v[1] == doctest::Approx(0.5));
  CHECK(v[2] == 0.0);

  // Out-of-vocabulary tokens are skipped, not zero-filled.
  auto skipped = embed("alpha zzz", table);
  CHECK(skipped[0] == 1.0);

  CHECK_THROWS_AS(embed("zzz qqq", table), NoKnownTokensError);
}

TEST_CASE("embed tokenizes case-insensitively with punctuation peeled") {
  EmbeddingTable table = table_from_text(kSmallTable);
  auto a = embed("Alpha, beta!", table);
  auto b = embed("alpha beta", table);
  CHECK(a == b);
}

TEST_CASE("scorer is exact on identical texts") {
  EmbeddingTable table = table_from_text(kSmallTable);
  EmbeddingScorer scorer(table);
  CHECK(scorer.score("alpha beta gamma", "alpha beta gamma") == 1.0);
  // Same averaged vector through different tokens: omega is 2*alpha.
  CHECK(scorer.score("alpha", "omega") == 1.0);
}

TEST_CASE("scorer is symmetric and bounded") {
  EmbeddingTable table = table_from_text(kSmallTable);
  EmbeddingScorer scorer(table);
  std::vector<std::string> texts = {"alpha", "beta", "alpha delta",
                                    "gamma beta", "alpha beta gamma"};
  for (const auto& a : texts) {
    for (const auto& b : texts) {
      double ab = scorer.score(a, b);
      CHECK(ab == scorer.score(b, a));
      CHECK(ab >= -1.0);
      CHECK(ab <= 1.0);
    }
  }
  CHECK(scorer.score("alpha", "beta") == doctest::Approx(0.0));
  CHECK(scorer.score("alpha", "delta") ==
        doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("scorer matches a plain cosine oracle") {
  EmbeddingTable table = table_from_text(kSmallTable);
  EmbeddingScorer scorer(table);
  std::vector<std::string> texts = {"alpha beta", "delta gamma",
                                    "omega beta gamma", "alpha alpha beta"};
  for (const auto& a : texts) {
    for (const auto& b : texts) {
      CHECK(scorer.score(a, b) ==
            doctest::Approx(oracle_cosine(a, b, table)).epsilon(1e-12));
    }
  }
}

TEST_CASE("cosine is invariant under uniform scaling of the table") {
  EmbeddingTable table = table_from_text(kSmallTable);
  // Power-of-two scaling keeps every float exact.
  EmbeddingTable scaled = table_from_text(
      "alpha 4 0 0\nbeta 0 4 0\ngamma 0 0 4\ndelta 4 4 0\nomega 8 0 0\n");
  EmbeddingScorer scorer(table);
  EmbeddingScorer scaled_scorer(scaled);
  CHECK(scorer.score("alpha delta", "beta gamma") ==
        doctest::Approx(scaled_scorer.score("alpha delta", "beta gamma"))
            .epsilon(1e-15));
}

TEST_CASE("zero-norm averages are rejected") {
  EmbeddingTable table = table_from_text("null 0 0 0\nreal 1 0 0\n");
  EmbeddingScorer scorer(table);
  CHECK_THROWS_AS(scorer.score("null", "real"), ZeroVectorError);
}

TEST_CASE("bin boundaries are exact") {
  struct Case {
    double score;
    SimilarityBin bin;
    HighSubcategory sub;
  };
  const Case cases[] = {
      {-1.0, SimilarityBin::kLow, HighSubcategory::kNone},
      {0.4499, SimilarityBin::kLow, HighSubcategory::kNone},
      {0.45, SimilarityBin::kMedium, HighSubcategory::kNone},
      {0.8499, SimilarityBin::kMedium, HighSubcategory::kNone},
      {0.85, SimilarityBin::kHigh, HighSubcategory::k0p85To0p9},
      {0.8999, SimilarityBin::kHigh, HighSubcategory::k0p85To0p9},
      {0.9, SimilarityBin::kHigh, HighSubcategory::k0p9To1p0},
      {0.9999, SimilarityBin::kHigh, HighSubcategory::k0p9To1p0},
      {1.0, SimilarityBin::kHigh, HighSubcategory::kExactly1},
  };
  for (const auto& c : cases) {
    BinAssignment assignment = assign_bin(c.score);
    CHECK(assignment.bin == c.bin);
    CHECK(assignment.high_subcategory == c.sub);
  }
}

TEST_CASE("assign_bin validates inputs") {
  CHECK_THROWS_AS(assign_bin(1.5), Error);
  CHECK_THROWS_AS(assign_bin(-1.5), Error);
  CHECK_THROWS_AS(assign_bin(0.5, BinThresholds{0.9, 0.5}), Error);
  CHECK_THROWS_AS(assign_bin(0.5, BinThresholds{-1.5, 0.5}), Error);
}

TEST_CASE("custom thresholds shift the bins") {
  BinThresholds t{0.2, 0.6};
  CHECK(assign_bin(0.3, t).bin == SimilarityBin::kMedium);
  CHECK(assign_bin(0.7, t).bin == SimilarityBin::kHigh);
  CHECK(assign_bin(0.1, t).bin == SimilarityBin::kLow);
}

TEST_CASE("bin and subcategory names round trip") {
  CHECK(bin_name(SimilarityBin::kLow) == "low");
  CHECK(bin_name(SimilarityBin::kMedium) == "medium");
  CHECK(bin_name(SimilarityBin::kHigh) == "high");
  CHECK(parse_bin("medium") == SimilarityBin::kMedium);
  CHECK_THROWS_AS(parse_bin("extreme"), Error);
  CHECK(subcategory_name(HighSubcategory::kExactly1) == "exactly_1.0");
  CHECK(subcategory_name(HighSubcategory::k0p9To1p0) == "0.9_to_1.0");
  CHECK(subcategory_name(HighSubcategory::k0p85To0p9) == "0.85_to_0.9");
  CHECK(parse_subcategory("0.9_to_1.0") == HighSubcategory::k0p9To1p0);
  CHECK_THROWS_AS(parse_subcategory("1.1_to_2"), Error);
}

TEST_CASE("score_group covers every unordered pair in reference order") {
  EmbeddingTable table = table_from_text(kSmallTable);
  EmbeddingScorer scorer(table);
  ParallelGroup group =
      group_with_texts("g", {"alpha", "beta", "alpha beta", "delta"});
  ScoredGroup scored = score_group(group, scorer);
  REQUIRE(scored.pairwise.size() == 6);
  CHECK(scored.pairwise[0].ref_id_a == "g.r0");
  CHECK(scored.pairwise[0].ref_id_b == "g.r1");
  CHECK(scored.pairwise[5].ref_id_a == "g.r2");
  CHECK(scored.pairwise[5].ref_id_b == "g.r3");

  double sum = 0;
  for (const auto& pair : scored.pairwise) sum += pair.score;
  CHECK(scored.sim_p == doctest::Approx(sum / 6.0).epsilon(1e-15));
}

TEST_CASE("score_group needs two references") {
  EmbeddingTable table = table_from_text(kSmallTable);
  EmbeddingScorer scorer(table);
  ParallelGroup group = group_with_texts("g", {"alpha"});
  CHECK_THROWS_AS(score_group(group, scorer), FewerThanTwoReferencesError);
}

TEST_CASE("score_group names the offending pair on scorer failures") {
  EmbeddingTable table = table_from_text(kSmallTable);
  EmbeddingScorer scorer(table);
  ParallelGroup group = group_with_texts("g9", {"alpha", "zzz"});
  try {
    score_group(group, scorer);
    FAIL_CHECK("expected NoKnownTokensError");
  } catch (const NoKnownTokensError& e) {
    std::string what = e.what();
    CHECK(what.find("g9") != std::string::npos);
    CHECK(what.find("g9.r1") != std::string::npos);
  }
}

TEST_CASE("sim_p matches a brute-force mean over pairs") {
  std::vector<std::string> vocab = {"alpha", "beta", "gamma", "delta",
                                    "omega"};
  EmbeddingTable table = table_from_text(kSmallTable);
  EmbeddingScorer scorer(table);
  rng::Stream stream(17, "simp-test");
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 2 + stream.below(4);
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < n; ++i) {
      std::string text;
      std::size_t len = 1 + stream.below(6);
      for (std::size_t j = 0; j < len; ++j) {
        if (!text.empty()) text += ' ';
        text += vocab[stream.below(vocab.size())];
      }
      texts.push_back(text);
    }
    ParallelGroup group = group_with_texts("t", texts);
    ScoredGroup scored = score_group(group, scorer);

    double sum = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        sum += scorer.score(texts[i], texts[j]);
        ++pairs;
      }
    }
    CHECK(scored.pairwise.size() == pairs);
    CHECK(scored.sim_p ==
          doctest::Approx(sum / static_cast<double>(pairs)).epsilon(1e-12));
  }
}

TEST_CASE("score_corpus skips single-reference groups and keeps order") {
  EmbeddingTable table = table_from_text(kSmallTable);
  EmbeddingScorer scorer(table);
  Corpus corpus;
  corpus.groups.push_back(group_with_texts("a", {"alpha", "beta"}));
  corpus.groups.push_back(group_with_texts("solo", {"alpha"}));
  corpus.groups.push_back(group_with_texts("b", {"gamma", "delta"}));

  auto scored = score_corpus(corpus, scorer);
  REQUIRE(scored.size() == 2);
  CHECK(scored[0].group_id == "a");
  CHECK(scored[1].group_id == "b");
}

TEST_CASE("score_corpus is thread-count independent") {
  EmbeddingTable table = table_from_text(kSmallTable);
  EmbeddingScorer scorer(table);
  Corpus corpus;
  std::vector<std::string> vocab = {"alpha", "beta", "gamma", "delta"};
  rng::Stream stream(3, "threads-test");
  for (int i = 0; i < 40; ++i) {
    std::vector<std::string> texts;
    for (int r = 0; r < 3; ++r) {
      texts.push_back(vocab[stream.below(vocab.size())] + " " +
                      vocab[stream.below(vocab.size())]);
    }
    corpus.groups.push_back(group_with_texts("g" + std::to_string(i), texts));
  }
  auto serial = score_corpus(corpus, scorer, {}, 1);
  auto parallel = score_corpus(corpus, scorer, {}, 4);
  CHECK(serial == parallel);
}

TEST_CASE("read_pair_scores requires the exact header and valid rows") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_pair_scores(in);
  };
  auto scores = parse(
      "group_id,ref_id_a,ref_id_b,score\n"
      "g1,r1,r2,0.5\n"
      "g1,r1,r3,0.75\n"
      "g2,r1,r2,-0.25\n");
  CHECK(scores.size() == 2);
  CHECK(scores.at("g1").size() == 2);
  CHECK(scores.at("g2")[0].score == -0.25);

  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("bad,header,row,x\n"), ParseError);
  CHECK_THROWS_AS(
      parse("group_id,ref_id_a,ref_id_b,score\ng1,r1,r2\n"), ParseError);
  CHECK_THROWS_AS(
      parse("group_id,ref_id_a,ref_id_b,score\ng1,r1,r2,nope\n"), ParseError);
  CHECK_THROWS_AS(
      parse("group_id,ref_id_a,ref_id_b,score\ng1,r1,r2,1.5\n"), ParseError);
}

TEST_CASE("import_scores averages imported pairs") {
  Corpus corpus;
  corpus.groups.push_back(group_with_texts("g", {"a", "b", "c"}));
  std::map<std::string, std::vector<PairScore>> imported;
  imported["g"] = {{"g.r0", "g.r1", 0.5},
                   {"g.r2", "g.r0", 0.7},
                   {"g.r1", "g.r2", 0.9}};
  auto scored = import_scores(corpus, imported, nullptr);
  REQUIRE(scored.size() == 1);
  CHECK(scored[0].sim_p == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(scored[0].bin == SimilarityBin::kMedium);
  // Pairs come back normalized to reference order.
  CHECK(scored[0].pairwise[1].ref_id_a == "g.r0");
  CHECK(scored[0].pairwise[1].ref_id_b == "g.r2");
  CHECK(scored[0].pairwise[1].score == 0.7);
}

TEST_CASE("import_scores rejects incomplete pair sets in strict mode") {
  Corpus corpus;
  corpus.groups.push_back(group_with_texts("g", {"a", "b", "c"}));
  std::map<std::string, std::vector<PairScore>> imported;
  imported["g"] = {{"g.r0", "g.r1", 0.5}};
  CHECK_THROWS_AS(import_scores(corpus, imported, nullptr),
                  IncompletePairSetError);
}

TEST_CASE("import_scores rejects unknown groups and refs in strict mode") {
  Corpus corpus;
  corpus.groups.push_back(group_with_texts("g", {"a", "b"}));

  std::map<std::string, std::vector<PairScore>> unknown_group;
  unknown_group["nope"] = {{"x", "y", 0.5}};
  CHECK_THROWS_AS(import_scores(corpus, unknown_group, nullptr), Error);

  std::map<std::string, std::vector<PairScore>> unknown_ref;
  unknown_ref["g"] = {{"g.r0", "g.r9", 0.5}};
  CHECK_THROWS_AS(import_scores(corpus, unknown_ref, nullptr), Error);

  std::map<std::string, std::vector<PairScore>> self_pair;
  self_pair["g"] = {{"g.r0", "g.r0", 0.5}};
  CHECK_THROWS_AS(import_scores(corpus, self_pair, nullptr), Error);
}

TEST_CASE("lenient import falls back to the scorer for bad groups") {
  EmbeddingTable table = table_from_text(kSmallTable);
  EmbeddingScorer scorer(table);
  Corpus corpus;
  corpus.groups.push_back(group_with_texts("g", {"alpha", "beta", "gamma"}));
  std::map<std::string, std::vector<PairScore>> imported;
  imported["g"] = {{"g.r0", "g.r1", 0.5}};  // incomplete

  ImportOptions options;
  options.strict = false;
  std::vector<std::string> warnings;
  auto scored = import_scores(corpus, imported, &scorer, options, &warnings);
  REQUIRE(scored.size() == 1);
  CHECK(scored[0].pairwise.size() == 3);
  CHECK_FALSE(warnings.empty());
}

TEST_CASE("groups without imported pairs use the fallback scorer") {
  EmbeddingTable table = table_from_text(kSmallTable);
  EmbeddingScorer scorer(table);
  Corpus corpus;
  corpus.groups.push_back(group_with_texts("imported", {"a", "b"}));
  corpus.groups.push_back(group_with_texts("computed", {"alpha", "beta"}));
  std::map<std::string, std::vector<PairScore>> imported;
  imported["imported"] = {{"imported.r0", "imported.r1", 0.95}};

  auto scored = import_scores(corpus, imported, &scorer);
  REQUIRE(scored.size() == 2);
  CHECK(scored[0].group_id == "imported");
  CHECK(scored[0].sim_p == 0.95);
  CHECK(scored[1].group_id == "computed");

  // Without a fallback the unimported group is skipped.
  auto partial = import_scores(corpus, imported, nullptr);
  REQUIRE(partial.size() == 1);
  CHECK(partial[0].group_id == "imported");
}

TEST_CASE("histogram uses left-closed bins with a right-closed last bin") {
  std::vector<ScoredGroup> scored(3);
  scored[0].sim_p = 0.5;
  scored[1].sim_p = 0.5;
  scored[2].sim_p = 0.95;
  auto bins = histogram(scored, 0.5);
  REQUIRE(bins.size() == 4);
  CHECK(bins[0].lower_edge == -1.0);
  CHECK(bins[3].lower_edge == 0.5);
  CHECK(bins[3].count == 3);
  CHECK(bins[0].count + bins[1].count + bins[2].count == 0);
}

TEST_CASE("histogram puts boundary scores in the right bins") {
  std::vector<ScoredGroup> scored(4);
  scored[0].sim_p = -1.0;
  scored[1].sim_p = 0.0;
  scored[2].sim_p = 1.0;
  scored[3].sim_p = 0.4999;
  auto bins = histogram(scored, 0.05);
  REQUIRE(bins.size() == 40);
  CHECK(bins.front().count == 1);   // -1.0
  CHECK(bins[20].count == 1);       // 0.0 opens the 21st bin
  CHECK(bins.back().count == 1);    // 1.0 folds into the last bin
  CHECK(bins[29].count == 1);       // 0.4999 in [0.45, 0.5)
  std::size_t total = 0;
  for (const auto& bin : bins) total += bin.count;
  CHECK(total == scored.size());
  CHECK_THROWS_AS(histogram(scored, 0.0), Error);
}

TEST_CASE("scored groups round trip through their serialization") {
  EmbeddingTable table = table_from_text(kSmallTable);
  EmbeddingScorer scorer(table);
  Corpus corpus;
  corpus.groups.push_back(group_with_texts("a", {"alpha", "beta", "delta"}));
  corpus.groups.push_back(group_with_texts("b", {"gamma", "gamma"}));
  auto scored = score_corpus(corpus, scorer);

  std::ostringstream out;
  write_scored(scored, out);
  std::istringstream in(out.str());
  auto reread = load_scored(in);
  CHECK(reread == scored);
}

TEST_CASE("load_scored validates its input") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return load_scored(in);
  };
  CHECK_THROWS_AS(parse("{\"bin\": \"purple\", \"group_id\": \"g\", "
                        "\"pairwise\": [], \"sim_p\": 0.5}\n"),
                  ParseError);
  CHECK_THROWS_AS(parse("{\"bin\": \"low\", \"group_id\": \"g\", "
                        "\"pairwise\": [], \"sim_p\": 7}\n"),
                  ParseError);
}

TEST_CASE("count_bins tallies bins and high subcategories") {
  std::vector<ScoredGroup> scored;
  auto add = [&](double sim) {
    ScoredGroup g;
    g.group_id = "g" + std::to_string(scored.size());
    g.sim_p = sim;
    BinAssignment assignment = assign_bin(sim);
    g.bin = assignment.bin;
    g.high_subcategory = assignment.high_subcategory;
    scored.push_back(g);
  };
  add(0.1);
  add(0.5);
  add(0.6);
  add(0.86);
  add(0.95);
  add(1.0);
  BinCounts counts = count_bins(scored);
  CHECK(counts.low == 1);
  CHECK(counts.medium == 2);
  CHECK(counts.high == 3);
  CHECK(counts.high_exactly_1 == 1);
  CHECK(counts.high_0p9_to_1p0 == 1);
  CHECK(counts.high_0p85_to_0p9 == 1);
}

#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "multiref/corpus.hpp"
#include "multiref/dataset.hpp"
#include "multiref/errors.hpp"
#include "multiref/metrics.hpp"
#include "multiref/report.hpp"
#include "multiref/similarity.hpp"

using namespace multiref;

namespace {

TrainingInstance make_instance(std::string group_id, std::string ref_id,
                               std::string language, std::string source,
                               std::string target) {
  TrainingInstance instance;
  instance.group_id = std::move(group_id);
  instance.ref_id = std::move(ref_id);
  instance.language = std::move(language);
  instance.source_text = std::move(source);
  instance.target_text = std::move(target);
  return instance;
}

Dataset make_dataset(std::vector<TrainingInstance> instances) {
  Dataset dataset;
  dataset.instances = std::move(instances);
  dataset.num_instance = dataset.instances.size();
  return dataset;
}

ParallelGroup make_group(std::string group_id, std::string language,
                         std::string book_id, std::size_t n_refs) {
  ParallelGroup group;
  group.group_id = group_id;
  group.language = std::move(language);
  group.book_id = std::move(book_id);
  group.source_text = "source of " + group_id;
  for (std::size_t i = 0; i < n_refs; ++i) {
    group.references.push_back(
        {"r" + std::to_string(i + 1), "", "ref " + std::to_string(i + 1)});
  }
  return group;
}

}  // namespace

TEST_CASE("pair export and load round trip") {
  Dataset dataset = make_dataset({
      make_instance("g1", "r1", "de", "tab\there", "new\nline"),
      make_instance("g1", "r2", "de", "quote \"x\"", "zwei"),
      make_instance("g2", "r1", "fr", "caf\xc3\xa9", "retour\rchariot"),
  });
  std::ostringstream out;
  CHECK(export_pairs(dataset, out) == 3);
  std::istringstream in(out.str());
  auto loaded = load_pairs(in);
  CHECK(loaded == dataset.instances);
}

TEST_CASE("pair loader tolerates blank lines and CRLF") {
  std::string line =
      R"({"group_id":"g1","language":"de","ref_id":"r1","source":"s","target":"t"})";
  std::istringstream in("\n" + line + "\r\n\n");
  auto loaded = load_pairs(in);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].group_id == "g1");
  CHECK(loaded[0].target_text == "t");
}

TEST_CASE("pair loader rejects malformed records") {
  SUBCASE("invalid json") {
    std::istringstream in("{broken\n");
    CHECK_THROWS_AS(load_pairs(in), ParseError);
  }
  SUBCASE("missing field") {
    std::istringstream in(R"({"group_id":"g1","language":"de"})" "\n");
    CHECK_THROWS_AS(load_pairs(in), ParseError);
  }
  SUBCASE("duplicate (group_id, ref_id) names the line") {
    std::string line =
        R"({"group_id":"g1","language":"de","ref_id":"r1","source":"s","target":"t"})";
    std::istringstream in(line + "\n" + line + "\n");
    try {
      load_pairs(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(std::string(e.what()).find("duplicate (group_id, ref_id)") !=
            std::string::npos);
    }
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_pairs_file("/nonexistent/pairs.jsonl"), Error);
  }
}

TEST_CASE("prompt lines join source and target with the delimiter") {
  Dataset dataset = make_dataset({
      make_instance("g1", "r1", "de", "Der Satz.", "The sentence."),
      make_instance("g2", "r1", "de", "a\nb", "c\rd"),
  });
  std::ostringstream out;
  export_prompt_lines(dataset, out);
  CHECK(out.str() ==
        "Der Satz. ###> The sentence.\n"
        "a\\nb ###> c\\rd\n");
}

TEST_CASE("prompt export refuses texts containing the delimiter") {
  Dataset dataset = make_dataset({
      make_instance("g1", "r1", "de", "bad ###> text", "t"),
  });
  std::ostringstream out;
  CHECK_THROWS_AS(export_prompt_lines(dataset, out),
                  DelimiterCollisionError);
  Dataset target_side = make_dataset({
      make_instance("g1", "r1", "de", "s", "bad ###> text"),
  });
  CHECK_THROWS_AS(export_prompt_lines(target_side, out),
                  DelimiterCollisionError);
}

TEST_CASE("composition report counts per-language usage") {
  Corpus corpus;
  corpus.groups = {
      make_group("g1", "fr", "A", 2),
      make_group("g2", "fr", "A", 2),
      make_group("g3", "fr", "B", 2),
      make_group("g4", "de", "C", 2),
      make_group("g5", "de", "C", 2),
  };
  Dataset dataset = make_dataset({
      make_instance("g1", "r1", "fr", "s", "t"),
      make_instance("g4", "r1", "de", "s", "t"),
      make_instance("g4", "r2", "de", "s", "t"),
      make_instance("g5", "r1", "de", "s", "t"),
  });
  auto rows = composition_report(dataset, corpus);
  REQUIRE(rows.size() == 2);
  // Sorted by src ascending: fr uses 1 of 3, de uses 2 of 2.
  CHECK(rows[0] == CompositionRow{"fr", 1, 1, 3, 0.33});
  CHECK(rows[1] == CompositionRow{"de", 1, 2, 2, 1.0});
}

TEST_CASE("composition report resolves #rep ids to their original group") {
  Corpus corpus;
  corpus.groups = {make_group("g1", "fr", "A", 2),
                   make_group("g2", "fr", "A", 2)};
  Dataset dataset = make_dataset({
      make_instance("g1", "r1", "fr", "s", "t"),
      make_instance("g1#rep", "r1#rep", "fr", "s", "t"),
  });
  auto rows = composition_report(dataset, corpus);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].src == 1);
  CHECK(rows[0].total == 2);
  CHECK(rows[0].pct_used == 0.5);
}

TEST_CASE("composition report keeps languages the dataset never touches") {
  Corpus corpus;
  corpus.groups = {make_group("g1", "fr", "A", 2),
                   make_group("g2", "ru", "B", 2)};
  Dataset dataset = make_dataset({
      make_instance("g1", "r1", "fr", "s", "t"),
  });
  auto rows = composition_report(dataset, corpus);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == CompositionRow{"ru", 0, 0, 1, 0.0});
  CHECK(rows[1].language == "fr");
}

TEST_CASE("composition report rejects instances from unknown groups") {
  Corpus corpus;
  corpus.groups = {make_group("g1", "fr", "A", 2)};
  Dataset dataset = make_dataset({
      make_instance("zz", "r1", "fr", "s", "t"),
  });
  CHECK_THROWS_WITH_AS(composition_report(dataset, corpus),
                       doctest::Contains("unknown group 'zz'"), Error);
}

TEST_CASE("composition csv formats the used fraction with two decimals") {
  std::vector<CompositionRow> rows = {
      {"fr", 4, 1021, 3261, 0.31},
      {"de", 2, 50, 50, 1.0},
  };
  CHECK(composition_csv(rows) ==
        "language,books,src,total,pct_used\n"
        "fr,4,1021,3261,0.31\n"
        "de,2,50,50,1.00\n");
}

TEST_CASE("histogram csv prints shortest-round-trip edges") {
  std::vector<HistogramBin> bins = {
      {-1.0, 0}, {-0.5, 2}, {0.0, 0}, {0.5, 3}};
  CHECK(histogram_csv(bins) ==
        "lower_edge,count\n"
        "-1.0,0\n"
        "-0.5,2\n"
        "0.0,0\n"
        "0.5,3\n");
}

TEST_CASE("histogram svg draws bars and both threshold rules") {
  std::vector<ScoredGroup> scored(5);
  scored[0].sim_p = -0.9;
  scored[1].sim_p = 0.5;
  scored[2].sim_p = 0.5;
  scored[3].sim_p = 0.95;
  scored[4].sim_p = 1.0;
  auto bins = histogram(scored, 0.5);
  std::string svg = histogram_svg(bins);
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("stroke=\"red\"") != std::string::npos);
  CHECK(svg.find("stroke=\"blue\"") != std::string::npos);
  CHECK(svg.find("steelblue") != std::string::npos);
  CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
  // One background rect plus one per bin.
  std::size_t rects = 0;
  for (std::size_t pos = svg.find("<rect"); pos != std::string::npos;
       pos = svg.find("<rect", pos + 1)) {
    ++rects;
  }
  CHECK(rects == bins.size() + 1);
}

TEST_CASE("corpus stats csv lists languages then a total row") {
  CorpusStats stats;
  stats.per_language = {
      {"de", 2, 10, 30},
      {"fr", 4, 20, 41},
  };
  stats.totals = {"total", 6, 30, 71};
  CHECK(corpus_stats_csv(stats) ==
        "language,books,sources,references\n"
        "de,2,10,30\n"
        "fr,4,20,41\n"
        "total,6,30,71\n");
}

TEST_CASE("gain report json carries overall and per-language deltas") {
  GainReport gain;
  gain.overall = 1.5;
  gain.per_language = {{"de", 2.0}, {"fr", 1.0}};
  auto obj = nlohmann::json::parse(gain_report_json(gain));
  CHECK(obj.at("overall").get<double>() == 1.5);
  CHECK(obj.at("per_language").at("de").get<double>() == 2.0);
  CHECK(obj.at("per_language").at("fr").get<double>() == 1.0);
}

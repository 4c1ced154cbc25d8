#include <doctest.h>

#include <sstream>

#include "storynet/corpus.hpp"
#include "storynet/csv.hpp"
#include "support.hpp"

using namespace storynet;

namespace {

const char* kHeader = "story_id,author,prompt1,prompt2,prompt3,text,rater1,rater2,rater3,rater4\n";

Corpus parse(const std::string& body) {
  std::istringstream in(std::string(kHeader) + body);
  return parse_corpus_csv(in);
}

}  // namespace

TEST_CASE("csv reader handles quoting, embedded newlines and CRLF") {
  std::istringstream in("a,\"b,c\",\"say \"\"hi\"\"\"\r\n\"multi\nline\",x,\r\n");
  const auto rows = csv::read_all(in);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == csv::Row{"a", "b,c", "say \"hi\""});
  CHECK(rows[1] == csv::Row{"multi\nline", "x", ""});
}

TEST_CASE("csv writer round-trips awkward fields") {
  const csv::Row row = {"plain", "comma,inside", "quote\"inside", "line\nbreak", ""};
  std::ostringstream out;
  csv::write_row(out, row);
  std::istringstream in(out.str());
  const auto back = csv::read_all(in);
  REQUIRE(back.size() == 1);
  CHECK(back[0] == row);
}

TEST_CASE("format_double is shortest round-trip") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-12, 1e300, 0.0, 42.0}) CHECK(std::stod(csv::format_double(v)) == v);
  CHECK(csv::format_double(0.5) == "0.5");
}

TEST_CASE("three-row corpus with four raters") {
  const auto c = parse(
      "s1,human,a,b,c,Once upon a time.,1,2,3,4\n"
      "s2,llm,a,b,c,\"A story, with a comma.\",5,5,4,3\n"
      "s3,human,d,e,f,Short.,3,3,3,3\n");
  REQUIRE(c.size() == 3);
  for (const auto& s : c) CHECK(s.ratings.size() == 4);
  CHECK(c[1].author == AuthorKind::Llm);
  CHECK(c[1].text == "A story, with a comma.");
  CHECK(c[0].ratings[2] == RaterScore{"rater3", 3});
}

TEST_CASE("invalid corpora are rejected with a location") {
  auto message = [](const std::string& body) {
    try {
      parse(body);
    } catch (const CorpusError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  const auto bad_score = message("s1,human,a,b,c,Text.,1,6,3,4\n");
  CHECK(bad_score.find("rater2") != std::string::npos);
  CHECK(bad_score.find("row 1") != std::string::npos);
  CHECK_FALSE(message("s1,human,a,b,c,Text.,1,2,3,4\ns1,human,a,b,c,Text.,1,2,3,4\n").empty());
  CHECK_FALSE(message("s1,robot,a,b,c,Text.,1,2,3,4\n").empty());
  CHECK_FALSE(message("s1,human,a,b,c,,1,2,3,4\n").empty());
  CHECK_FALSE(message("s1,human,,b,c,Text.,1,2,3,4\n").empty());
  CHECK_FALSE(message("s1,human,a,b,c,Text.,x,2,3,4\n").empty());
  CHECK_FALSE(message("s1,human,a,b,c,Text.,1,2,3\n").empty());
}

TEST_CASE("missing rating cells are empty strings") {
  const auto c = parse("s1,human,a,b,c,Text.,1,,3,\n");
  REQUIRE(c[0].ratings.size() == 2);
  CHECK(c[0].ratings[1].rater_id == "rater3");
}

TEST_CASE("filter_complete keeps fully rated stories in order") {
  const auto c = parse(
      "s1,human,a,b,c,Text.,1,2,3,\n"
      "s2,human,a,b,c,Text.,1,2,3,4\n"
      "s3,human,a,b,c,Text.,4,4,4,4\n");
  const auto kept = filter_complete(c, 4);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].id == "s2");
  CHECK(kept[1].id == "s3");
  CHECK(filter_complete(kept, 4) == kept);
  for (int k = 0; k <= 5; ++k) CHECK(filter_complete(c, k).size() <= c.size());
  CHECK(filter_complete(kept, 4).size() == kept.size());
}

TEST_CASE("rating schemes") {
  CHECK(bin_rating(3, RatingScheme::HumanScale) == 1);
  CHECK(bin_rating(5, RatingScheme::CompressedTop) == 2);
  CHECK(bin_rating(1, RatingScheme::HumanScale) == 0);
  CHECK(bin_rating(2, RatingScheme::HumanScale) == 0);
  CHECK(bin_rating(4, RatingScheme::HumanScale) == 2);
  CHECK(bin_rating(3, RatingScheme::CompressedTop) == 0);
  CHECK(bin_rating(4, RatingScheme::CompressedTop) == 1);
  CHECK_THROWS_AS(bin_rating(2, RatingScheme::CompressedTop), SchemeError);
  CHECK_THROWS_AS(bin_rating(1, RatingScheme::CompressedTop), SchemeError);
  int prev = -1;
  for (int s = 1; s <= 5; ++s) {
    const int c = bin_rating(s, RatingScheme::HumanScale);
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("word counts use whitespace tokens") {
  CHECK(story_word_count("") == 0);
  CHECK(story_word_count("the cow gave a flower") == 5);
  CHECK(story_word_count("  spaced\tout \n words  ") == 3);
}

TEST_CASE("CSV and JSON writers round-trip the fixture corpus") {
  const auto c = load_corpus(testing::fixture("corpus/stories.csv"));
  REQUIRE(c.size() == 40);
  std::ostringstream csv_out, json_out;
  write_corpus_csv(csv_out, c);
  write_corpus_json(json_out, c);
  std::istringstream csv_in(csv_out.str()), json_in(json_out.str());
  CHECK(parse_corpus_csv(csv_in) == c);
  CHECK(parse_corpus_json(json_in) == c);
  CHECK(csv_out.str() == testing::slurp(testing::fixture("corpus/stories.csv")));
}

TEST_CASE("CSV output refuses more than four ratings") {
  Corpus c = parse("s1,human,a,b,c,Text.,1,2,3,4\n");
  c[0].ratings.push_back({"llm-judge-1", 3});
  std::ostringstream out;
  CHECK_THROWS_AS(write_corpus_csv(out, c), CorpusError);
  std::ostringstream json;
  write_corpus_json(json, c);
  std::istringstream in(json.str());
  CHECK(parse_corpus_json(in) == c);
}

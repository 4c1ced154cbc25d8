#include "storynet/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "storynet/csv.hpp"

namespace storynet {

namespace {

std::string row_col(std::size_t row, std::string_view column) {
  return "row " + std::to_string(row) + ", column '" + std::string(column) + "'";
}

int parse_score(std::string_view cell, std::size_t row, std::string_view column) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size())
    throw CorpusError(row_col(row, column) + ": rating '" + std::string(cell) + "' is not an integer");
  if (value < 1 || value > 5)
    throw CorpusError(row_col(row, column) + ": rating '" + std::string(cell) + "' outside 1..5");
  return value;
}

void validate_story(const Story& s, std::size_t row) {
  if (s.id.empty()) throw CorpusError(row_col(row, "story_id") + ": empty story id");
  if (s.text.empty()) throw CorpusError(row_col(row, "text") + ": empty text");
  for (std::size_t k = 0; k < 3; ++k)
    if (s.prompt[k].empty())
      throw CorpusError(row_col(row, "prompt" + std::to_string(k + 1)) + ": empty prompt word");
}

void check_unique(const Corpus& corpus) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (!seen.insert(corpus[i].id).second)
      throw CorpusError("row " + std::to_string(i + 1) + ": duplicate story id '" + corpus[i].id + "'");
}

}  // namespace

std::string_view to_string(AuthorKind kind) { return kind == AuthorKind::Human ? "human" : "llm"; }

AuthorKind parse_author_kind(std::string_view s) {
  if (s == "human") return AuthorKind::Human;
  if (s == "llm") return AuthorKind::Llm;
  throw CorpusError("author must be 'human' or 'llm', got '" + std::string(s) + "'");
}

std::string_view to_string(RatingScheme scheme) {
  return scheme == RatingScheme::HumanScale ? "human-scale" : "compressed-top";
}

RatingScheme parse_rating_scheme(std::string_view s) {
  if (s == "human-scale" || s == "HumanScale") return RatingScheme::HumanScale;
  if (s == "compressed-top" || s == "CompressedTop") return RatingScheme::CompressedTop;
  throw CorpusError("unknown rating scheme '" + std::string(s) + "'");
}

Corpus parse_corpus_csv(std::istream& in) {
  csv::Reader reader(in);
  csv::Row header;
  if (!reader.next(header)) throw CorpusError("empty corpus file");
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  if (header.size() != kCorpusColumns.size() ||
      !std::equal(header.begin(), header.end(), kCorpusColumns.begin()))
    throw CorpusError("header must be: story_id,author,prompt1,prompt2,prompt3,text,rater1,rater2,rater3,rater4");

  Corpus corpus;
  csv::Row row;
  std::size_t index = 0;
  while (reader.next(row)) {
    ++index;
    if (row.size() == 1 && row[0].empty()) continue;  // trailing blank line
    if (row.size() != kCorpusColumns.size())
      throw CorpusError("row " + std::to_string(index) + ": expected 10 columns, found " +
                        std::to_string(row.size()));
    Story s;
    s.id = row[0];
    try {
      s.author = parse_author_kind(row[1]);
    } catch (const CorpusError& e) {
      throw CorpusError(row_col(index, "author") + ": " + e.what());
    }
    s.prompt = {row[2], row[3], row[4]};
    s.text = row[5];
    for (std::size_t k = 0; k < 4; ++k) {
      const std::string& cell = row[6 + k];
      if (cell.empty()) continue;
      s.ratings.push_back({std::string(kCorpusColumns[6 + k]), parse_score(cell, index, kCorpusColumns[6 + k])});
    }
    validate_story(s, index);
    corpus.push_back(std::move(s));
  }
  check_unique(corpus);
  return corpus;
}

Corpus parse_corpus_json(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw CorpusError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw CorpusError("JSON corpus must be an array of story objects");

  Corpus corpus;
  std::size_t index = 0;
  for (const auto& obj : doc) {
    ++index;
    auto field = [&](const char* name) -> std::string {
      if (!obj.contains(name) || !obj[name].is_string())
        throw CorpusError(row_col(index, name) + ": missing or not a string");
      return obj[name].get<std::string>();
    };
    Story s;
    s.id = field("story_id");
    try {
      s.author = parse_author_kind(field("author"));
    } catch (const CorpusError& e) {
      throw CorpusError(row_col(index, "author") + ": " + e.what());
    }
    s.prompt = {field("prompt1"), field("prompt2"), field("prompt3")};
    s.text = field("text");
    if (obj.contains("ratings")) {
      if (!obj["ratings"].is_array()) throw CorpusError(row_col(index, "ratings") + ": not an array");
      for (const auto& r : obj["ratings"]) {
        if (!r.contains("rater_id") || !r.contains("score") || !r["score"].is_number_integer())
          throw CorpusError(row_col(index, "ratings") + ": entries need rater_id and integer score");
        int score = r["score"].get<int>();
        if (score < 1 || score > 5)
          throw CorpusError(row_col(index, "ratings") + ": rating '" + std::to_string(score) + "' outside 1..5");
        s.ratings.push_back({r["rater_id"].get<std::string>(), score});
      }
    }
    validate_story(s, index);
    corpus.push_back(std::move(s));
  }
  check_unique(corpus);
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open corpus file " + path.string());
  return format == CorpusFormat::Csv ? parse_corpus_csv(in) : parse_corpus_json(in);
}

Corpus load_corpus(const std::filesystem::path& path) {
  return load_corpus(path, path.extension() == ".json" ? CorpusFormat::Json : CorpusFormat::Csv);
}

void write_corpus_csv(std::ostream& out, const Corpus& corpus) {
  csv::write_row(out, csv::Row(kCorpusColumns.begin(), kCorpusColumns.end()));
  for (const Story& s : corpus) {
    if (s.ratings.size() > 4)
      throw CorpusError("story '" + s.id + "' has more than 4 ratings; use JSON output");
    csv::Row row = {s.id, std::string(to_string(s.author)), s.prompt[0], s.prompt[1], s.prompt[2], s.text};
    for (std::size_t k = 0; k < 4; ++k)
      row.push_back(k < s.ratings.size() ? std::to_string(s.ratings[k].score) : "");
    csv::write_row(out, row);
  }
}

void write_corpus_json(std::ostream& out, const Corpus& corpus) {
  nlohmann::json doc = nlohmann::json::array();
  for (const Story& s : corpus) {
    nlohmann::json ratings = nlohmann::json::array();
    for (const auto& r : s.ratings) ratings.push_back({{"rater_id", r.rater_id}, {"score", r.score}});
    doc.push_back({{"story_id", s.id},
                   {"author", to_string(s.author)},
                   {"prompt1", s.prompt[0]},
                   {"prompt2", s.prompt[1]},
                   {"prompt3", s.prompt[2]},
                   {"text", s.text},
                   {"ratings", ratings}});
  }
  out << doc.dump(2) << '\n';
}

Corpus filter_complete(const Corpus& corpus, int required_raters) {
  Corpus out;
  for (const Story& s : corpus) {
    std::set<std::string_view> raters;
    for (const auto& r : s.ratings) raters.insert(r.rater_id);
    if (static_cast<int>(raters.size()) >= required_raters) out.push_back(s);
  }
  return out;
}

CreativityClass bin_rating(int score, RatingScheme scheme) {
  if (score < 1 || score > 5) throw SchemeError("rating " + std::to_string(score) + " outside 1..5");
  if (scheme == RatingScheme::HumanScale) return score <= 2 ? 0 : (score == 3 ? 1 : 2);
  if (score <= 2)
    throw SchemeError("rating " + std::to_string(score) + " has no class under the compressed-top scheme");
  return score - 3;
}

std::size_t story_word_count(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (unsigned char ch : text) {
    bool space = ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v';
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

std::size_t story_word_count(const Story& story) { return story_word_count(story.text); }

}  // namespace storynet

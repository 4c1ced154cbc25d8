#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace storynet {

enum class AuthorKind { Human, Llm };

std::string_view to_string(AuthorKind kind);
AuthorKind parse_author_kind(std::string_view s);

struct RaterScore {
  std::string rater_id;
  int score = 0;  // 1..5

  bool operator==(const RaterScore&) const = default;
};

struct Story {
  std::string id;
  AuthorKind author = AuthorKind::Human;
  std::array<std::string, 3> prompt;
  std::string text;
  std::vector<RaterScore> ratings;

  bool operator==(const Story&) const = default;
};

using Corpus = std::vector<Story>;

enum class CorpusFormat { Csv, Json };

// HumanScale: {1,2}->0, {3}->1, {4,5}->2.
// CompressedTop: {3}->0, {4}->1, {5}->2 (for corpora without low scores).
enum class RatingScheme { HumanScale, CompressedTop };

std::string_view to_string(RatingScheme scheme);
RatingScheme parse_rating_scheme(std::string_view s);

// 0 = low, 1 = mid, 2 = high.
using CreativityClass = int;
inline constexpr int kClassCount = 3;

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown by bin_rating when a score has no class under the chosen scheme.
class SchemeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr std::array<std::string_view, 10> kCorpusColumns = {
    "story_id", "author", "prompt1", "prompt2", "prompt3",
    "text",     "rater1", "rater2",  "rater3",  "rater4"};

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
Corpus load_corpus(const std::filesystem::path& path);  // format from extension
Corpus parse_corpus_csv(std::istream& in);
Corpus parse_corpus_json(std::istream& in);

// CSV output is positional: the k-th rating lands in column rater<k>. Corpora
// with more than four ratings per story must be written as JSON.
void write_corpus_csv(std::ostream& out, const Corpus& corpus);
void write_corpus_json(std::ostream& out, const Corpus& corpus);

// Keeps stories with at least `required_raters` distinct rater ids, in order.
Corpus filter_complete(const Corpus& corpus, int required_raters);

CreativityClass bin_rating(int score, RatingScheme scheme);

std::size_t story_word_count(const Story& story);
std::size_t story_word_count(std::string_view text);

}  // namespace storynet

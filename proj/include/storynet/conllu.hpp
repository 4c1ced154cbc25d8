#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace storynet {

// One word line of a CoNLL-U block. Multiword ranges and empty nodes are
// dropped at parse time, so `index` runs 1..n without gaps.
struct Token {
  int index = 0;
  std::string form;
  std::string lemma;
  std::string upos;
  int head = 0;  // 0 = root
  std::string deprel;
};

class ConlluError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A dependency tree: exactly one root, no cycles, every token reachable.
// The constructor validates; an invalid token list throws ConlluError.
class Sentence {
 public:
  Sentence() = default;
  explicit Sentence(std::vector<Token> tokens, std::string name = {});

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::vector<Token>& tokens() const { return tokens_; }
  // 1-based, matching Token::index.
  const Token& token(int index) const;
  int root() const { return root_; }
  const std::string& name() const { return name_; }

  // Tree-adjacency lists (parent and children), 1-based; entry 0 unused.
  const std::vector<std::vector<int>>& neighbors() const { return neighbors_; }

 private:
  std::vector<Token> tokens_;
  std::vector<std::vector<int>> neighbors_;
  std::string name_;
  int root_ = 0;
};

struct ParsedStory {
  std::string story_id;
  std::vector<Sentence> sentences;
};

// `source` labels error messages (typically the file name).
std::vector<Sentence> parse_conllu(std::istream& in, std::string_view source = "<input>");

// Reads `<dir>/<story_id>.conllu`.
ParsedStory load_parsed_story(const std::filesystem::path& dir, const std::string& story_id);

void write_conllu(std::ostream& out, const std::vector<Sentence>& sentences);

// Number of edges on the undirected tree path between tokens i and j.
int tree_distance(const Sentence& sentence, int i, int j);

// Hop counts from `source` to every token (1-based; entry 0 unused).
std::vector<int> tree_distances_from(const Sentence& sentence, int source);

}  // namespace storynet

#include "storynet/conllu.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>

namespace storynet {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return cols;
}

bool parse_int(std::string_view s, int& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

Sentence::Sentence(std::vector<Token> tokens, std::string name)
    : tokens_(std::move(tokens)), name_(std::move(name)) {
  const int n = static_cast<int>(tokens_.size());
  auto fail = [&](const std::string& what) {
    throw ConlluError("sentence " + (name_.empty() ? std::string("<unnamed>") : name_) + ": " + what);
  };
  if (n == 0) fail("no tokens");

  neighbors_.assign(n + 1, {});
  for (int k = 0; k < n; ++k) {
    const Token& t = tokens_[k];
    if (t.index != k + 1) fail("token ids must run 1.." + std::to_string(n) + " without gaps");
    if (t.head < 0 || t.head > n) fail("token " + std::to_string(t.index) + " has head out of range");
    if (t.head == t.index) fail("token " + std::to_string(t.index) + " is its own head");
    if (t.head == 0) {
      if (root_ != 0) fail("more than one root (tokens " + std::to_string(root_) + " and " + std::to_string(t.index) + ")");
      root_ = t.index;
    } else {
      neighbors_[t.index].push_back(t.head);
      neighbors_[t.head].push_back(t.index);
    }
  }
  if (root_ == 0) fail("no root token");

  // n-1 edges plus full reachability from the root rules out cycles.
  std::vector<char> seen(n + 1, 0);
  std::vector<int> stack = {root_};
  seen[root_] = 1;
  int reached = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : neighbors_[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        stack.push_back(w);
      }
  }
  if (reached != n) fail("head pointers contain a cycle");
}

const Token& Sentence::token(int index) const {
  if (index < 1 || index > static_cast<int>(tokens_.size()))
    throw ConlluError("token index " + std::to_string(index) + " out of range");
  return tokens_[index - 1];
}

std::vector<Sentence> parse_conllu(std::istream& in, std::string_view source) {
  std::vector<Sentence> sentences;
  std::vector<Token> block;
  std::string sent_id;
  std::size_t line_no = 0;
  std::size_t block_start = 0;

  auto flush = [&] {
    if (block.empty()) return;
    std::string name = std::string(source) + ":" + std::to_string(block_start);
    if (!sent_id.empty()) name += " (" + sent_id + ")";
    sentences.emplace_back(std::move(block), std::move(name));
    block.clear();
    sent_id.clear();
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      if (line.rfind("# sent_id", 0) == 0) {
        auto eq = line.find('=');
        if (eq != std::string::npos) {
          sent_id = line.substr(eq + 1);
          sent_id.erase(0, sent_id.find_first_not_of(' '));
        }
      }
      continue;
    }
    auto cols = split_tabs(line);
    auto where = [&] { return std::string(source) + ":" + std::to_string(line_no) + ": "; };
    if (cols.size() != 10)
      throw ConlluError(where() + "expected 10 tab-separated columns, found " + std::to_string(cols.size()));
    std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos) continue;
    Token t;
    if (!parse_int(id, t.index) || t.index < 1) throw ConlluError(where() + "invalid ID '" + std::string(id) + "'");
    if (!parse_int(cols[6], t.head)) throw ConlluError(where() + "non-integer HEAD '" + std::string(cols[6]) + "'");
    t.form = cols[1];
    t.lemma = cols[2];
    t.upos = cols[3];
    t.deprel = cols[7];
    if (block.empty()) block_start = line_no;
    block.push_back(std::move(t));
  }
  flush();
  return sentences;
}

ParsedStory load_parsed_story(const std::filesystem::path& dir, const std::string& story_id) {
  auto path = dir / (story_id + ".conllu");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConlluError("cannot open " + path.string());
  return {story_id, parse_conllu(in, path.filename().string())};
}

void write_conllu(std::ostream& out, const std::vector<Sentence>& sentences) {
  for (const Sentence& s : sentences) {
    for (const Token& t : s.tokens())
      out << t.index << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos << "\t_\t_\t" << t.head << '\t'
          << t.deprel << "\t_\t_\n";
    out << '\n';
  }
}

std::vector<int> tree_distances_from(const Sentence& sentence, int source) {
  const int n = static_cast<int>(sentence.size());
  if (source < 1 || source > n) throw ConlluError("token index " + std::to_string(source) + " out of range");
  std::vector<int> dist(n + 1, -1);
  std::queue<int> frontier;
  dist[source] = 0;
  frontier.push(source);
  const auto& adj = sentence.neighbors();
  while (!frontier.empty()) {
    int v = frontier.front();
    frontier.pop();
    for (int w : adj[v])
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        frontier.push(w);
      }
  }
  return dist;
}

int tree_distance(const Sentence& sentence, int i, int j) {
  const int n = static_cast<int>(sentence.size());
  if (j < 1 || j > n) throw ConlluError("token index " + std::to_string(j) + " out of range");
  return tree_distances_from(sentence, i)[j];
}

}  // namespace storynet

#include "storynet/tfmn.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <ostream>

namespace storynet {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

LemmaPair ordered(const std::string& a, const std::string& b) { return a < b ? LemmaPair{a, b} : LemmaPair{b, a}; }

}  // namespace

std::string_view to_string(Valence v) {
  switch (v) {
    case Valence::Positive: return "positive";
    case Valence::Negative: return "negative";
    case Valence::Neutral: break;
  }
  return "neutral";
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

void Tfmn::add_node(const std::string& lemma) { nodes_.emplace(lemma, Valence::Neutral); }

bool Tfmn::add_edge(const std::string& a, const std::string& b) {
  if (a == b) return false;
  add_node(a);
  add_node(b);
  return edges_.insert(ordered(a, b)).second;
}

bool Tfmn::has_edge(const std::string& a, const std::string& b) const { return edges_.count(ordered(a, b)) != 0; }

Valence Tfmn::valence(const std::string& lemma) const {
  auto it = nodes_.find(lemma);
  return it == nodes_.end() ? Valence::Neutral : it->second;
}

void Tfmn::set_valence(const std::string& lemma, Valence v) {
  auto it = nodes_.find(lemma);
  if (it != nodes_.end()) it->second = v;
}

StopList StopList::parse(std::istream& in) {
  StopList list;
  std::string line;
  while (std::getline(in, line)) {
    std::string w = trim(line);
    if (w.empty() || w[0] == '#') continue;
    list.words.insert(lowercase(w));
  }
  if (list.words.empty()) throw std::runtime_error("stoplist is empty");
  return list;
}

StopList StopList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stoplist " + path.string());
  return parse(in);
}

const std::string* AntonymLexicon::find(const std::string& lemma) const {
  auto it = antonyms.find(lemma);
  return it == antonyms.end() ? nullptr : &it->second;
}

AntonymLexicon AntonymLexicon::parse(std::istream& in) {
  AntonymLexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("antonym lexicon line " + std::to_string(line_no) + ": expected lemma<TAB>antonym");
    lex.antonyms.emplace(lowercase(trim(line.substr(0, tab))), lowercase(trim(line.substr(tab + 1))));
  }
  return lex;
}

AntonymLexicon AntonymLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open antonym lexicon " + path.string());
  return parse(in);
}

bool is_content_upos(std::string_view upos) {
  static constexpr std::array<std::string_view, 5> kContent = {"NOUN", "PROPN", "VERB", "ADJ", "ADV"};
  return std::find(kContent.begin(), kContent.end(), upos) != kContent.end();
}

std::vector<int> content_tokens(const Sentence& sentence, const StopList& stoplist) {
  std::vector<int> out;
  for (const Token& t : sentence.tokens())
    if (is_content_upos(t.upos) && !stoplist.contains(lowercase(t.lemma))) out.push_back(t.index);
  return out;
}

SentenceNetwork sentence_network(const Sentence& sentence, const StopList& stoplist, int max_dist) {
  SentenceNetwork net;
  if (sentence.empty()) return net;
  const std::vector<int> content = content_tokens(sentence, stoplist);
  std::vector<char> is_content(sentence.size() + 1, 0);
  for (int i : content) {
    is_content[i] = 1;
    net.lemmas.push_back(lowercase(sentence.token(i).lemma));
  }

  std::set<LemmaPair> pairs;
  for (int i : content) {
    const std::vector<int> dist = tree_distances_from(sentence, i);
    const std::string a = lowercase(sentence.token(i).lemma);
    for (int j : content) {
      if (j <= i || dist[j] > max_dist) continue;
      const std::string b = lowercase(sentence.token(j).lemma);
      if (a != b) pairs.insert(ordered(a, b));
    }
  }
  net.edges.assign(pairs.begin(), pairs.end());
  return net;
}

std::vector<LemmaPair> build_sentence_edges(const Sentence& sentence, const StopList& stoplist, int max_dist) {
  return sentence_network(sentence, stoplist, max_dist).edges;
}

Tfmn merge_story_network(std::span<const SentenceNetwork> sentences) {
  Tfmn g;
  for (const auto& s : sentences) {
    for (const auto& lemma : s.lemmas) g.add_node(lemma);
    for (const auto& [a, b] : s.edges) g.add_edge(a, b);
  }
  return g;
}

bool is_negator(const Token& token) {
  if (token.deprel.find("neg") != std::string::npos) return true;
  const std::string lemma = lowercase(token.lemma);
  return lemma == "not" || lemma == "never" || lemma == "no" || lemma == "n't";
}

std::vector<EffectiveLemma> apply_negations(const Sentence& sentence, const AntonymLexicon& antonyms,
                                            const StopList& stoplist) {
  std::vector<char> negated(sentence.size() + 1, 0);
  for (const Token& t : sentence.tokens())
    if (t.head != 0 && is_negator(t)) negated[t.head] = 1;

  std::vector<EffectiveLemma> out;
  for (int i : content_tokens(sentence, stoplist)) {
    EffectiveLemma e{i, lowercase(sentence.token(i).lemma), negated[i] != 0, false};
    if (e.negated) {
      if (const std::string* opposite = antonyms.find(e.lemma))
        e.lemma = *opposite;
      else
        e.unresolved = true;
    }
    out.push_back(std::move(e));
  }
  return out;
}

Sentence with_effective_lemmas(const Sentence& sentence, std::span<const EffectiveLemma> lemmas) {
  std::vector<Token> tokens = sentence.tokens();
  for (const auto& e : lemmas) tokens.at(e.token_index - 1).lemma = e.lemma;
  return Sentence(std::move(tokens), sentence.name());
}

Tfmn label_valence(Tfmn tfmn, const ValenceLexicon& lexicon) {
  for (const auto& [lemma, _] : tfmn.nodes()) {
    auto it = lexicon.find(lemma);
    tfmn.set_valence(lemma, it == lexicon.end() ? Valence::Neutral : it->second);
  }
  return tfmn;
}

void write_edge_list(std::ostream& out, const Tfmn& tfmn) {
  for (const auto& [a, b] : tfmn.edges()) out << a << '\t' << b << '\n';
}

void write_node_table(std::ostream& out, const Tfmn& tfmn) {
  for (const auto& [lemma, v] : tfmn.nodes()) out << lemma << '\t' << to_string(v) << '\n';
}

}  // namespace storynet

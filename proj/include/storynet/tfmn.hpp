#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "storynet/conllu.hpp"

namespace storynet {

enum class Valence { Positive, Negative, Neutral };

std::string_view to_string(Valence v);

using LemmaPair = std::pair<std::string, std::string>;

// Textual forma mentis network: undirected simple graph over lowercase lemmas.
class Tfmn {
 public:
  // Adds an isolated node (neutral) if absent.
  void add_node(const std::string& lemma);
  // Self-loops are ignored; returns whether a new edge was inserted.
  bool add_edge(const std::string& a, const std::string& b);

  bool has_node(const std::string& lemma) const { return nodes_.count(lemma) != 0; }
  bool has_edge(const std::string& a, const std::string& b) const;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  // Sorted by lemma; the position of a node here is its graph index.
  const std::map<std::string, Valence>& nodes() const { return nodes_; }
  // Each edge stored once with first < second.
  const std::set<LemmaPair>& edges() const { return edges_; }

  Valence valence(const std::string& lemma) const;
  void set_valence(const std::string& lemma, Valence v);

  bool operator==(const Tfmn&) const = default;

 private:
  std::map<std::string, Valence> nodes_;
  std::set<LemmaPair> edges_;
};

struct StopList {
  std::unordered_set<std::string> words;

  bool contains(std::string_view lowercase_word) const { return words.count(std::string(lowercase_word)) != 0; }

  static StopList load(const std::filesystem::path& path);
  static StopList parse(std::istream& in);
};

struct AntonymLexicon {
  std::unordered_map<std::string, std::string> antonyms;

  const std::string* find(const std::string& lemma) const;

  static AntonymLexicon load(const std::filesystem::path& path);
  static AntonymLexicon parse(std::istream& in);
};

using ValenceLexicon = std::unordered_map<std::string, Valence>;

std::string lowercase(std::string_view s);

inline constexpr int kDefaultMaxTreeDistance = 3;

// Universal POS tags treated as meaning-bearing.
bool is_content_upos(std::string_view upos);

// Token indices (1-based) that are content words: UPOS in {NOUN, PROPN, VERB,
// ADJ, ADV} and lowercase lemma not in the stoplist.
std::vector<int> content_tokens(const Sentence& sentence, const StopList& stoplist);

// Lemma pairs of content tokens at tree distance <= max_dist, lowercased,
// each unordered pair once, lemma-identical pairs dropped.
std::vector<LemmaPair> build_sentence_edges(const Sentence& sentence, const StopList& stoplist, int max_dist);

struct SentenceNetwork {
  std::vector<std::string> lemmas;  // all content lemmas, including isolated ones
  std::vector<LemmaPair> edges;
};

SentenceNetwork sentence_network(const Sentence& sentence, const StopList& stoplist, int max_dist);

// Union of the per-sentence networks as one simple graph.
Tfmn merge_story_network(std::span<const SentenceNetwork> sentences);

struct EffectiveLemma {
  int token_index = 0;
  std::string lemma;        // lowercase; antonym when a negation was resolved
  bool negated = false;
  bool unresolved = false;  // negated but no antonym known
};

// True for tokens acting as negators: deprel containing "neg", or lemma in
// {not, never, no, n't}.
bool is_negator(const Token& token);

// Lemma stream over content tokens, in token order. A content token with a
// negator among its direct dependents is replaced by its antonym.
std::vector<EffectiveLemma> apply_negations(const Sentence& sentence, const AntonymLexicon& antonyms,
                                            const StopList& stoplist);

// Copy of `sentence` whose content-token lemmas are the effective lemmas.
Sentence with_effective_lemmas(const Sentence& sentence, std::span<const EffectiveLemma> lemmas);

Tfmn label_valence(Tfmn tfmn, const ValenceLexicon& lexicon);

void write_edge_list(std::ostream& out, const Tfmn& tfmn);
void write_node_table(std::ostream& out, const Tfmn& tfmn);

}  // namespace storynet

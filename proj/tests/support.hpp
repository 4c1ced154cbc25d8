#pragma once

// Shared helpers for the test executables: fixture paths and random
// structure generators.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "storynet/conllu.hpp"

namespace testing {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(STORYNET_FIXTURE_DIR) / rel; }
inline std::filesystem::path data_file(const std::string& rel) { return std::filesystem::path(STORYNET_DATA_DIR) / rel; }

// Random labelled graph: n vertices, each pair linked with probability p.
inline std::vector<std::pair<int, int>> random_edges(std::mt19937_64& rng, int n, double p) {
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<int, int>> e;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (coin(rng)) e.emplace_back(a, b);
  return e;
}

// Random head array for an n-token tree: a random permutation fixes the
// attachment order so any token may be the root.
inline std::vector<int> random_heads(std::mt19937_64& rng, int n) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i + 1;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> heads(n, 0);
  for (int k = 1; k < n; ++k) {
    std::uniform_int_distribution<int> pick(0, k - 1);
    heads[order[k] - 1] = order[pick(rng)];
  }
  return heads;
}

inline const std::vector<std::string>& upos_pool() {
  static const std::vector<std::string> pool = {"NOUN", "PROPN", "VERB", "ADJ", "ADV", "DET", "ADP", "PUNCT", "PRON"};
  return pool;
}

// Random sentence over a small lemma vocabulary, so duplicate lemmas occur.
inline storynet::Sentence random_sentence(std::mt19937_64& rng, int n) {
  static const std::vector<std::string> lemmas = {"cat", "dog", "run", "happy", "the", "and", "tree",
                                                  "sky", "blue", "fast", "of", "sing"};
  const auto heads = random_heads(rng, n);
  std::uniform_int_distribution<std::size_t> lemma(0, lemmas.size() - 1), pos(0, upos_pool().size() - 1);
  std::vector<storynet::Token> tokens;
  for (int i = 0; i < n; ++i) {
    storynet::Token t;
    t.index = i + 1;
    t.lemma = lemmas[lemma(rng)];
    t.form = t.lemma;
    t.upos = upos_pool()[pos(rng)];
    t.head = heads[i];
    t.deprel = heads[i] == 0 ? "root" : "dep";
    tokens.push_back(t);
  }
  return storynet::Sentence(tokens);
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace testing

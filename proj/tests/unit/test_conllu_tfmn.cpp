#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "oracles/oracles.hpp"
#include "storynet/conllu.hpp"
#include "storynet/tfmn.hpp"
#include "support.hpp"

using namespace storynet;

namespace {

std::vector<Sentence> parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_conllu(in, "test");
}

Sentence peter() {
  std::ifstream in(testing::fixture("conllu/peter.conllu"));
  auto s = parse_conllu(in, "peter.conllu");
  REQUIRE(s.size() == 1);
  return s[0];
}

StopList shipped_stoplist() { return StopList::load(testing::data_file("stoplist_en.txt")); }

Sentence build(const std::vector<std::tuple<std::string, std::string, int>>& rows) {
  std::vector<Token> toks;
  int i = 0;
  for (const auto& [lemma, upos, head] : rows) {
    Token t;
    t.index = ++i;
    t.form = t.lemma = lemma;
    t.upos = upos;
    t.head = head;
    t.deprel = head == 0 ? "root" : "dep";
    toks.push_back(t);
  }
  return Sentence(toks);
}

std::set<LemmaPair> edge_set(const std::vector<LemmaPair>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("minimal block") {
  const auto s = parse_text("1\tPeter\tPeter\tPROPN\t_\t_\t2\tnsubj\t_\t_\n2\tsleeps\tsleep\tVERB\t_\t_\t0\troot\t_\t_\n\n");
  REQUIRE(s.size() == 1);
  CHECK(s[0].size() == 2);
  CHECK(s[0].root() == 2);
}

TEST_CASE("multiword ranges and empty nodes are skipped") {
  const auto s = parse_text(
      "# text = don't go\n"
      "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "1\tdo\tdo\tAUX\t_\t_\t3\taux\t_\t_\n"
      "2\tn't\tnot\tPART\t_\t_\t3\tadvmod\t_\t_\n"
      "3\tgo\tgo\tVERB\t_\t_\t0\troot\t_\t_\n"
      "3.1\tgone\tgo\tVERB\t_\t_\t_\t_\t_\t_\n");
  REQUIRE(s.size() == 1);
  CHECK(s[0].size() == 3);
}

TEST_CASE("structural errors") {
  CHECK_THROWS_AS(parse_text("1\ta\ta\tNOUN\t_\t_\t2\tdep\t_\t_\n2\tb\tb\tNOUN\t_\t_\t1\tdep\t_\t_\n\n"), ConlluError);
  CHECK_THROWS_AS(parse_text("1\ta\ta\tNOUN\t_\t_\tx\tdep\t_\t_\n\n"), ConlluError);
  CHECK_THROWS_AS(parse_text("1\ta\ta\tNOUN\t_\t_\t0\troot\t_\t_\n2\tb\tb\tNOUN\t_\t_\t0\troot\t_\t_\n\n"), ConlluError);
  CHECK_THROWS_AS(parse_text("1\ta\ta\tNOUN\t_\t_\t1\tdep\t_\t_\n\n"), ConlluError);
  CHECK_THROWS_AS(parse_text("1\ta\ta\tNOUN\t_\t_\t5\tdep\t_\t_\n\n"), ConlluError);
  CHECK_THROWS_AS(parse_text("1\ta\ta\tNOUN\t_\n\n"), ConlluError);
  try {
    parse_text("1\ta\ta\tNOUN\t_\t_\t0\troot\t_\t_\n\n1\ta\ta\tNOUN\t_\t_\tzz\tdep\t_\t_\n");
    FAIL("expected an error");
  } catch (const ConlluError& e) {
    CHECK(std::string(e.what()).find(":3: non-integer HEAD") != std::string::npos);
  }
}

TEST_CASE("Peter fixture: root and distances") {
  const Sentence s = peter();
  CHECK(s.token(s.root()).form == "loves");
  CHECK(tree_distance(s, 1, 15) == 2);
  CHECK(tree_distance(s, 15, 1) == 2);
  CHECK(tree_distance(s, 7, 7) == 0);
  CHECK_THROWS(tree_distance(s, 0, 3));
  CHECK_THROWS(tree_distance(s, 1, 18));
}

TEST_CASE("chain tree distance") {
  const Sentence s = build({{"a", "NOUN", 2}, {"b", "NOUN", 3}, {"c", "NOUN", 4}, {"d", "NOUN", 5}, {"e", "NOUN", 0}});
  CHECK(tree_distance(s, 1, 5) == 4);
}

TEST_CASE("tree distance is a metric matching BFS on random trees") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const auto heads = testing::random_heads(rng, n);
    std::vector<Token> toks;
    for (int i = 0; i < n; ++i) toks.push_back({i + 1, "w", "w", "NOUN", heads[i], heads[i] ? "dep" : "root"});
    const Sentence s(toks);
    const auto oracle_d = oracle::tree_distances(heads);
    int tree_edges = 0;
    for (int i = 1; i <= n; ++i) {
      tree_edges += heads[i - 1] != 0;
      for (int j = 1; j <= n; ++j) {
        const int d = tree_distance(s, i, j);
        CHECK(d == oracle_d[i - 1][j - 1]);
        CHECK(d == tree_distance(s, j, i));
        CHECK((d == 0) == (i == j));
        for (int k = 1; k <= n; ++k) CHECK(d <= tree_distance(s, i, k) + tree_distance(s, k, j));
      }
    }
    CHECK(tree_edges == n - 1);
  }
}

TEST_CASE("content tokens") {
  StopList stop;
  stop.words = {"the", "of", "and"};
  const Sentence all_stop = build({{"the", "DET", 0}, {"of", "ADP", 1}, {"and", "CCONJ", 1}});
  CHECK(content_tokens(all_stop, stop).empty());
  const Sentence plc = build({{"Peter", "PROPN", 2}, {"love", "VERB", 0}, {"cheese", "NOUN", 2}});
  CHECK(content_tokens(plc, stop) == std::vector<int>{1, 2, 3});
  CHECK(content_tokens(peter(), shipped_stoplist()) == std::vector<int>{1, 5, 6, 9, 10, 12, 13, 15, 16});
}

TEST_CASE("sentence edges") {
  StopList stop;
  stop.words = {"the"};
  CHECK(build_sentence_edges(build({{"cat", "NOUN", 0}}), stop, 3).empty());
  const Sentence chain =
      build({{"a", "NOUN", 2}, {"b", "NOUN", 3}, {"c", "NOUN", 4}, {"d", "NOUN", 5}, {"e", "NOUN", 0}});
  const auto e = build_sentence_edges(chain, stop, 3);
  CHECK(e.size() == 9);
  CHECK(edge_set(e).count({"a", "e"}) == 0);
  const auto p = edge_set(build_sentence_edges(peter(), shipped_stoplist(), 3));
  CHECK(p.count({"love", "peter"}) == 1);
  const Sentence dup = build({{"cat", "NOUN", 2}, {"Cat", "NOUN", 0}});
  CHECK(build_sentence_edges(dup, stop, 3).empty());
}

TEST_CASE("sentence edges match the all-pairs oracle on random trees") {
  std::mt19937_64 rng(5);
  StopList stop;
  stop.words = {"the", "and", "of"};
  for (int trial = 0; trial < 100; ++trial) {
    const Sentence s = testing::random_sentence(rng, 1 + static_cast<int>(rng() % 15));
    std::vector<int> heads;
    for (const auto& t : s.tokens()) heads.push_back(t.head);
    const auto d = oracle::tree_distances(heads);
    std::set<LemmaPair> expect;
    auto content = [&](const Token& t) {
      return (t.upos == "NOUN" || t.upos == "PROPN" || t.upos == "VERB" || t.upos == "ADJ" || t.upos == "ADV") &&
             !stop.words.count(t.lemma);
    };
    const auto& toks = s.tokens();
    for (std::size_t i = 0; i < toks.size(); ++i)
      for (std::size_t j = i + 1; j < toks.size(); ++j)
        if (content(toks[i]) && content(toks[j]) && d[i][j] <= 3 && toks[i].lemma != toks[j].lemma)
          expect.insert(std::minmax(toks[i].lemma, toks[j].lemma));
    const auto got = build_sentence_edges(s, stop, 3);
    CHECK(edge_set(got) == expect);
    CHECK(got.size() == expect.size());
    for (const auto& [a, b] : got) CHECK(a < b);
    std::set<LemmaPair> prev;
    for (int k = 1; k <= 6; ++k) {
      const auto cur = edge_set(build_sentence_edges(s, stop, k));
      CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
      prev = cur;
    }
  }
}

TEST_CASE("merging sentence networks") {
  SentenceNetwork s1{{"a", "b"}, {{"a", "b"}}}, s2{{"a", "b"}, {{"a", "b"}}}, s3{{"b", "c", "z"}, {{"b", "c"}}};
  CHECK(merge_story_network(std::vector{s1, s2}).edge_count() == 1);
  const Tfmn g = merge_story_network(std::vector{s1, s3});
  CHECK(g.node_count() == 4);
  CHECK(g.edge_count() == 2);
  CHECK(g.has_node("z"));
  CHECK(merge_story_network(std::vector<SentenceNetwork>{}).node_count() == 0);
  CHECK(merge_story_network(std::vector{s3, s1}) == g);
}

TEST_CASE("merge is order independent on random stories") {
  std::mt19937_64 rng(17);
  StopList stop;
  stop.words = {"the"};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<SentenceNetwork> nets;
    for (int k = 0; k < 5; ++k) nets.push_back(sentence_network(testing::random_sentence(rng, 8), stop, 3));
    const Tfmn base = merge_story_network(nets);
    std::shuffle(nets.begin(), nets.end(), rng);
    CHECK(merge_story_network(nets) == base);
  }
}

TEST_CASE("negation handling") {
  AntonymLexicon ant;
  ant.antonyms = {{"happy", "sad"}};
  StopList stop;
  stop.words = {"not", "be"};
  // "not happy": negator attached to the adjective.
  const Sentence not_happy = build({{"not", "PART", 2}, {"happy", "ADJ", 0}});
  auto eff = apply_negations(not_happy, ant, stop);
  REQUIRE(eff.size() == 1);
  CHECK(eff[0].lemma == "sad");
  CHECK(eff[0].negated);
  const Sentence happy = build({{"happy", "ADJ", 0}});
  eff = apply_negations(happy, ant, stop);
  REQUIRE(eff.size() == 1);
  CHECK(eff[0].lemma == "happy");
  CHECK_FALSE(eff[0].negated);
  const Sentence flab = build({{"not", "PART", 2}, {"flabbergasted", "ADJ", 0}});
  eff = apply_negations(flab, ant, stop);
  REQUIRE(eff.size() == 1);
  CHECK(eff[0].lemma == "flabbergasted");
  CHECK(eff[0].unresolved);
}

TEST_CASE("negation changes only negated positions") {
  std::mt19937_64 rng(23);
  AntonymLexicon ant;
  ant.antonyms = {{"happy", "sad"}, {"run", "walk"}, {"cat", "dog"}};
  StopList stop;
  stop.words = {"the", "not"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Token> toks = testing::random_sentence(rng, 10).tokens();
    for (auto& t : toks)
      if (t.lemma == "and" || t.lemma == "of") t.lemma = "not";
    const Sentence s(toks);
    const auto plain = content_tokens(s, stop);
    const auto eff = apply_negations(s, ant, stop);
    REQUIRE(eff.size() == plain.size());
    for (std::size_t i = 0; i < eff.size(); ++i) {
      CHECK(eff[i].token_index == plain[i]);
      if (!eff[i].negated) CHECK(eff[i].lemma == lowercase(s.token(plain[i]).lemma));
      bool has_negator_child = false;
      for (const auto& t : toks) has_negator_child = has_negator_child || (t.head == plain[i] && t.lemma == "not");
      CHECK(eff[i].negated == has_negator_child);
    }
  }
}

TEST_CASE("valence labels") {
  Tfmn g;
  g.add_edge("joy", "fear");
  g.add_node("table");
  g.add_node("happy");
  const ValenceLexicon lex = {{"joy", Valence::Positive}, {"fear", Valence::Negative}, {"happy", Valence::Positive}};
  const Tfmn labelled = label_valence(g, lex);
  CHECK(labelled.valence("joy") == Valence::Positive);
  CHECK(labelled.valence("fear") == Valence::Negative);
  CHECK(labelled.valence("table") == Valence::Neutral);
  CHECK(labelled.valence("happy") == Valence::Positive);
}

TEST_CASE("tfmn invariants") {
  Tfmn g;
  CHECK_FALSE(g.add_edge("a", "a"));
  CHECK(g.add_edge("b", "a"));
  CHECK_FALSE(g.add_edge("a", "b"));
  CHECK(g.edge_count() == 1);
  CHECK(g.has_edge("a", "b"));
  CHECK(g.has_edge("b", "a"));
  CHECK(g.node_count() == 2);
  std::ostringstream edges, nodes;
  write_edge_list(edges, g);
  write_node_table(nodes, g);
  CHECK(edges.str().find("a\tb") != std::string::npos);
  CHECK(nodes.str().find("neutral") != std::string::npos);
}

TEST_CASE("resource files load") {
  const auto stop = shipped_stoplist();
  CHECK(stop.contains("the"));
  CHECK_FALSE(stop.contains("cheese"));
  const auto ant = AntonymLexicon::load(testing::data_file("antonyms_en.tsv"));
  REQUIRE(ant.find("love"));
  CHECK(*ant.find("love") == "hate");
  const auto toy = AntonymLexicon::load(testing::fixture("lexicon/toy_antonyms.tsv"));
  CHECK(*toy.find("win") == "lose");
}

#include "storynet/emotions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <random>

namespace storynet {

std::string_view to_string(Emotion e) { return kEmotionNames[static_cast<std::size_t>(e)]; }

std::optional<Emotion> parse_emotion(std::string_view name) {
  for (std::size_t k = 0; k < kEmotionCount; ++k)
    if (kEmotionNames[k] == name) return static_cast<Emotion>(k);
  return std::nullopt;
}

std::string_view to_string(NullModel m) { return m == NullModel::Analytic ? "analytic" : "monte-carlo"; }

NullModel parse_null_model(std::string_view s) {
  if (s == "analytic") return NullModel::Analytic;
  if (s == "monte-carlo" || s == "monte_carlo") return NullModel::MonteCarlo;
  throw std::invalid_argument("unknown null model '" + std::string(s) + "'");
}

std::string_view to_string(NullSize s) { return s == NullSize::LexiconTokens ? "lexicon-tokens" : "content-tokens"; }

NullSize parse_null_size(std::string_view s) {
  if (s == "lexicon-tokens") return NullSize::LexiconTokens;
  if (s == "content-tokens") return NullSize::ContentTokens;
  throw std::invalid_argument("unknown null size '" + std::string(s) + "'");
}

EmotionLexicon EmotionLexicon::parse(std::istream& in) {
  std::map<std::string, LexiconEntry> words;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos)
      throw LexiconError("lexicon line " + std::to_string(line_no) + ": expected word<TAB>category<TAB>flag");
    std::string word = lowercase(line.substr(0, t1));
    std::string category = line.substr(t1 + 1, t2 - t1 - 1);
    std::string flag = line.substr(t2 + 1);
    if (flag != "0" && flag != "1")
      throw LexiconError("lexicon line " + std::to_string(line_no) + ": flag must be 0 or 1, got '" + flag + "'");
    LexiconEntry& entry = words[word];
    const bool on = flag == "1";
    if (category == "positive") {
      entry.positive = entry.positive || on;
    } else if (category == "negative") {
      entry.negative = entry.negative || on;
    } else if (auto e = parse_emotion(category)) {
      if (on) entry.emotions.set(static_cast<std::size_t>(*e));
    } else {
      throw LexiconError("lexicon line " + std::to_string(line_no) + ": unknown category '" + category + "'");
    }
  }
  if (words.empty()) throw LexiconError("emotion lexicon is empty");

  EmotionLexicon lex;
  std::array<std::size_t, kEmotionCount> tagged{};
  for (auto& [word, entry] : words) {
    if (entry.positive != entry.negative)
      lex.valence_.emplace(word, entry.positive ? Valence::Positive : Valence::Negative);
    if (entry.emotions.none()) continue;
    for (std::size_t k = 0; k < kEmotionCount; ++k) tagged[k] += entry.emotions[k];
    lex.index_.emplace(word, lex.words_.size());
    lex.words_.emplace_back(word, entry);
  }
  if (lex.words_.empty()) throw LexiconError("emotion lexicon has no emotion associations");
  for (std::size_t k = 0; k < kEmotionCount; ++k) {
    lex.priors_[k] = static_cast<double>(tagged[k]) / static_cast<double>(lex.words_.size());
    if (tagged[k] == 0 || tagged[k] == lex.words_.size())
      throw LexiconError("emotion '" + std::string(kEmotionNames[k]) +
                         "' must tag some but not all lexicon entries");
  }
  return lex;
}

EmotionLexicon EmotionLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LexiconError("cannot open emotion lexicon " + path.string());
  return parse(in);
}

const LexiconEntry* EmotionLexicon::find(const std::string& lemma) const {
  auto it = index_.find(lemma);
  return it == index_.end() ? nullptr : &words_[it->second].second;
}

ValenceLexicon EmotionLexicon::valence_lexicon() const {
  return ValenceLexicon(valence_.begin(), valence_.end());
}

EmotionCounts count_emotions(std::span<const std::string> lemmas, const EmotionLexicon& lexicon) {
  EmotionCounts out;
  for (const std::string& lemma : lemmas) {
    const LexiconEntry* entry = lexicon.find(lemma);
    if (!entry) continue;
    ++out.n_lexicon_tokens;
    for (std::size_t k = 0; k < kEmotionCount; ++k) out.counts[k] += entry->emotions[k];
  }
  return out;
}

EmotionProfile zscore_profile(const EmotionCounts& counts, const EmotionLexicon& lexicon,
                              const NullModelConfig& cfg) {
  return zscore_profile(counts, counts.n_lexicon_tokens, lexicon, cfg);
}

EmotionProfile zscore_profile(const EmotionCounts& counts, int draws, const EmotionLexicon& lexicon,
                              const NullModelConfig& cfg) {
  EmotionProfile p;
  p.counts = counts.counts;
  p.n_lexicon_tokens = counts.n_lexicon_tokens;
  p.low_coverage = counts.n_lexicon_tokens < kLowCoverageTokens;
  const double n = static_cast<double>(draws);
  if (draws <= 0) {
    p.low_coverage = true;
    return p;
  }

  std::array<double, kEmotionCount> mean{}, sd{};
  if (cfg.mode == NullModel::Analytic) {
    for (std::size_t k = 0; k < kEmotionCount; ++k) {
      const double prior = lexicon.priors()[k];
      mean[k] = n * prior;
      sd[k] = std::sqrt(n * prior * (1.0 - prior));
    }
  } else {
    if (cfg.samples < 100) throw std::invalid_argument("monte carlo null model needs at least 100 samples");
    const auto& entries = lexicon.entries();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<std::size_t> pick(0, entries.size() - 1);
    std::array<double, kEmotionCount> sum{}, sum_sq{};
    std::array<int, kEmotionCount> c{};
    for (int s = 0; s < cfg.samples; ++s) {
      c.fill(0);
      for (int d = 0; d < draws; ++d) {
        const auto& bits = entries[pick(rng)].second.emotions;
        for (std::size_t k = 0; k < kEmotionCount; ++k) c[k] += bits[k];
      }
      for (std::size_t k = 0; k < kEmotionCount; ++k) {
        sum[k] += c[k];
        sum_sq[k] += static_cast<double>(c[k]) * c[k];
      }
    }
    const double m = cfg.samples;
    for (std::size_t k = 0; k < kEmotionCount; ++k) {
      mean[k] = sum[k] / m;
      sd[k] = std::sqrt(std::max(0.0, (sum_sq[k] - m * mean[k] * mean[k]) / (m - 1.0)));
    }
  }

  for (std::size_t k = 0; k < kEmotionCount; ++k) {
    if (sd[k] == 0.0) {
      p.z[k] = 0.0;
      p.low_coverage = true;
    } else {
      p.z[k] = (counts.counts[k] - mean[k]) / sd[k];
    }
  }
  return p;
}

std::vector<std::pair<Emotion, Direction>> significant_emotions(const EmotionProfile& profile) {
  std::vector<std::pair<Emotion, Direction>> out;
  for (std::size_t k = 0; k < kEmotionCount; ++k) {
    if (profile.z[k] > kSignificanceZ)
      out.emplace_back(static_cast<Emotion>(k), Direction::Over);
    else if (profile.z[k] < -kSignificanceZ)
      out.emplace_back(static_cast<Emotion>(k), Direction::Under);
  }
  return out;
}

std::uint64_t story_seed(std::uint64_t run_seed, std::string_view story_id) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : story_id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::uint64_t z = run_seed + 0x9E3779B97F4A7C15ULL + h;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace storynet

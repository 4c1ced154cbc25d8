#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "storynet/tfmn.hpp"

namespace storynet {

// Plutchik's eight basic emotions, in feature-vector order.
enum class Emotion { Anger, Anticipation, Disgust, Fear, Joy, Sadness, Surprise, Trust };

inline constexpr std::size_t kEmotionCount = 8;
inline constexpr std::array<std::string_view, kEmotionCount> kEmotionNames = {
    "anger", "anticipation", "disgust", "fear", "joy", "sadness", "surprise", "trust"};

std::string_view to_string(Emotion e);
std::optional<Emotion> parse_emotion(std::string_view name);

// |z| must exceed this to count as significant (two-sided 5% level).
inline constexpr double kSignificanceZ = 1.96;

// Below this many lexicon tokens a profile is flagged as low coverage.
inline constexpr int kLowCoverageTokens = 5;

class LexiconError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LexiconEntry {
  std::bitset<kEmotionCount> emotions;
  bool positive = false;
  bool negative = false;
};

// Word-emotion association lexicon. Entries are the words associated with at
// least one of the eight emotions; valence flags are kept for every word.
class EmotionLexicon {
 public:
  static EmotionLexicon load(const std::filesystem::path& path);
  static EmotionLexicon parse(std::istream& in);

  const LexiconEntry* find(const std::string& lemma) const;
  std::size_t size() const { return words_.size(); }

  // Fraction of entries tagged with each emotion.
  const std::array<double, kEmotionCount>& priors() const { return priors_; }

  // Entries in sorted word order; the Monte Carlo null samples from this list.
  const std::vector<std::pair<std::string, LexiconEntry>>& entries() const { return words_; }

  // positive-only -> Positive, negative-only -> Negative, else Neutral.
  ValenceLexicon valence_lexicon() const;

 private:
  std::vector<std::pair<std::string, LexiconEntry>> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, Valence> valence_;
  std::array<double, kEmotionCount> priors_{};
};

struct EmotionCounts {
  std::array<int, kEmotionCount> counts{};
  int n_lexicon_tokens = 0;
};

// Token occurrences (with repetition) of lexicon entries and, per emotion,
// how many of those occurrences carry it.
EmotionCounts count_emotions(std::span<const std::string> lemmas, const EmotionLexicon& lexicon);

enum class NullModel { Analytic, MonteCarlo };

// How many draws the null model makes: matched lexicon tokens, or every
// content token of the story.
enum class NullSize { LexiconTokens, ContentTokens };

std::string_view to_string(NullModel m);
NullModel parse_null_model(std::string_view s);
std::string_view to_string(NullSize s);
NullSize parse_null_size(std::string_view s);

struct NullModelConfig {
  NullModel mode = NullModel::Analytic;
  int samples = 10000;  // monte carlo only, >= 100
  std::uint64_t seed = 0;
};

struct EmotionProfile {
  std::array<double, kEmotionCount> z{};
  std::array<int, kEmotionCount> counts{};
  int n_lexicon_tokens = 0;
  bool low_coverage = false;
};

// z-scores of the observed counts against N draws from the lexicon with
// replacement (N = `draws`, normally counts.n_lexicon_tokens).
EmotionProfile zscore_profile(const EmotionCounts& counts, const EmotionLexicon& lexicon,
                              const NullModelConfig& cfg);
EmotionProfile zscore_profile(const EmotionCounts& counts, int draws, const EmotionLexicon& lexicon,
                              const NullModelConfig& cfg);

enum class Direction { Over, Under };

std::vector<std::pair<Emotion, Direction>> significant_emotions(const EmotionProfile& profile);

// Stable per-story seed derived from a run seed and the story id.
std::uint64_t story_seed(std::uint64_t run_seed, std::string_view story_id);

}  // namespace storynet

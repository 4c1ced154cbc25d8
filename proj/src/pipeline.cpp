#include "storynet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "storynet/csv.hpp"
#include "storynet/stats.hpp"

namespace storynet {

namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index j) {
  return std::vector<double>(m.col(j).data(), m.col(j).data() + m.rows());
}

}  // namespace

Resources Resources::load(const std::filesystem::path& emotion_lexicon, const std::filesystem::path& antonyms,
                          const std::filesystem::path& stoplist) {
  for (const auto& p : {emotion_lexicon, antonyms, stoplist})
    if (!std::filesystem::is_regular_file(p)) throw InputError("resource file not found: " + p.string());
  Resources r;
  r.emotions = EmotionLexicon::load(emotion_lexicon);
  r.antonyms = AntonymLexicon::load(antonyms);
  r.stoplist = StopList::load(stoplist);
  r.valence = r.emotions.valence_lexicon();
  return r;
}

nlohmann::json FeaturizeOptions::to_json() const {
  return {{"max_tree_distance", max_tree_distance},
          {"null_model", to_string(null_model.mode)},
          {"mc_samples", null_model.samples},
          {"null_size", to_string(null_size)},
          {"component_mode", to_string(network.component_mode)},
          {"degree_mode", to_string(network.degree_mode)},
          {"pagerank_mode", to_string(network.pagerank_mode)},
          {"pagerank_damping", network.pagerank.damping},
          {"pagerank_tol", network.pagerank.tol},
          {"pagerank_max_iter", network.pagerank.max_iter},
          {"seed", seed}};
}

StoryAnalysis analyze_story(const Story& story, const ParsedStory& parsed, const Resources& resources,
                            const FeaturizeOptions& options) {
  StoryAnalysis a;
  a.diagnostics.sentences = static_cast<int>(parsed.sentences.size());
  std::vector<SentenceNetwork> networks;
  std::vector<std::string> lemmas;
  for (const Sentence& sentence : parsed.sentences) {
    const auto effective = apply_negations(sentence, resources.antonyms, resources.stoplist);
    for (const auto& e : effective) {
      lemmas.push_back(e.lemma);
      if (e.negated) ++a.diagnostics.negated;
      if (e.unresolved) {
        ++a.diagnostics.unresolved_negations;
        a.diagnostics.unresolved_lemmas.push_back(e.lemma);
      }
    }
    networks.push_back(
        sentence_network(with_effective_lemmas(sentence, effective), resources.stoplist, options.max_tree_distance));
  }
  a.diagnostics.content_tokens = static_cast<int>(lemmas.size());
  a.network = label_valence(merge_story_network(networks), resources.valence);

  const EmotionCounts counts = count_emotions(lemmas, resources.emotions);
  NullModelConfig cfg = options.null_model;
  cfg.seed = story_seed(options.seed, story.id);
  const int draws = options.null_size == NullSize::LexiconTokens ? counts.n_lexicon_tokens
                                                                 : static_cast<int>(lemmas.size());
  a.profile = zscore_profile(counts, draws, resources.emotions, cfg);
  a.features = featurize(story, a.network, a.profile, options.network);
  return a;
}

std::vector<std::string> missing_parses(const Corpus& corpus, const std::filesystem::path& dir) {
  std::vector<std::string> missing;
  for (const Story& s : corpus)
    if (!std::filesystem::is_regular_file(dir / (s.id + ".conllu"))) missing.push_back(s.id);
  return missing;
}

void write_feature_matrix(std::ostream& out, const FeatureMatrix& m) {
  csv::Row header = {"story_id"};
  header.insert(header.end(), m.feature_names.begin(), m.feature_names.end());
  csv::write_row(out, header);
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    csv::Row row = {m.story_ids[static_cast<std::size_t>(i)]};
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) row.push_back(csv::format_double(m.values(i, j)));
    csv::write_row(out, row);
  }
}

FeatureMatrix read_feature_matrix(std::istream& in, const std::string& source) {
  csv::Reader reader(in);
  csv::Row header;
  if (!reader.next(header) || header.empty() || header[0] != "story_id")
    throw InputError(source + ": feature matrix must start with a 'story_id' header column");
  FeatureMatrix m;
  m.feature_names.assign(header.begin() + 1, header.end());
  std::vector<std::vector<double>> rows;
  csv::Row row;
  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != header.size())
      throw InputError(source + ": line " + std::to_string(reader.record_line()) + " has " +
                       std::to_string(row.size()) + " fields, expected " + std::to_string(header.size()));
    m.story_ids.push_back(row[0]);
    std::vector<double> values;
    for (std::size_t j = 1; j < row.size(); ++j) {
      double v = 0;
      std::size_t used = 0;
      try {
        v = std::stod(row[j], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != row[j].size())
        throw InputError(source + ": line " + std::to_string(reader.record_line()) + ", column '" + header[j] +
                         "': not a number: '" + row[j] + "'");
      values.push_back(v);
    }
    rows.push_back(std::move(values));
  }
  m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.feature_names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

FeatureMatrix read_feature_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open feature matrix " + path.string());
  return read_feature_matrix(in, path.string());
}

void require_standard_features(const std::vector<std::string>& names, const std::string& source) {
  bool ok = names.size() == kFeatureCount;
  for (std::size_t j = 0; ok && j < names.size(); ++j) ok = names[j] == kFeatureNames[j];
  if (!ok) {
    std::string expected;
    for (auto n : kFeatureNames) expected += (expected.empty() ? "" : ",") + std::string(n);
    throw InputError(source + ": feature header does not match the standard 13 features (" + expected + ")");
  }
}

nlohmann::json scaling_to_json(const ScalingParams& p, const std::vector<std::string>& names) {
  nlohmann::json j = nlohmann::json::object();
  for (Eigen::Index k = 0; k < p.min.size(); ++k)
    j[names[static_cast<std::size_t>(k)]] = {{"min", p.min(k)}, {"max", p.max(k)}};
  return {{"features", names}, {"params", j}};
}

ScalingParams scaling_from_json(const nlohmann::json& j) {
  const auto names = j.at("features").get<std::vector<std::string>>();
  ScalingParams p{Eigen::RowVectorXd(static_cast<Eigen::Index>(names.size())),
                  Eigen::RowVectorXd(static_cast<Eigen::Index>(names.size()))};
  for (std::size_t k = 0; k < names.size(); ++k) {
    p.min(static_cast<Eigen::Index>(k)) = j.at("params").at(names[k]).at("min").get<double>();
    p.max(static_cast<Eigen::Index>(k)) = j.at("params").at(names[k]).at("max").get<double>();
  }
  return p;
}

std::string_view to_string(LabelMode m) { return m == LabelMode::Stacked ? "stacked" : "mean"; }

LabelMode parse_label_mode(std::string_view s) {
  if (s == "stacked") return LabelMode::Stacked;
  if (s == "mean") return LabelMode::MeanRating;
  throw std::invalid_argument("unknown label mode '" + std::string(s) + "' (expected stacked or mean)");
}

Dataset build_dataset(const FeatureMatrix& features, const Corpus& corpus, RatingScheme scheme, LabelMode mode) {
  std::map<std::string, Eigen::Index> row_of;
  for (std::size_t i = 0; i < features.story_ids.size(); ++i)
    if (!row_of.emplace(features.story_ids[i], static_cast<Eigen::Index>(i)).second)
      throw InputError("duplicate story_id '" + features.story_ids[i] + "' in feature matrix");

  Dataset d;
  d.feature_names = features.feature_names;
  std::vector<Eigen::Index> source_rows;
  for (const Story& s : corpus) {
    if (s.ratings.empty()) continue;
    auto it = row_of.find(s.id);
    if (it == row_of.end()) throw InputError("story '" + s.id + "' has ratings but no feature row");
    auto label = [&](int score) {
      try {
        return bin_rating(score, scheme);
      } catch (const SchemeError& e) {
        throw SchemeError("story '" + s.id + "': " + e.what());
      }
    };
    if (mode == LabelMode::Stacked) {
      for (const RaterScore& r : s.ratings) {
        d.row_ids.push_back(s.id + "/" + r.rater_id);
        d.story_ids.push_back(s.id);
        d.y.push_back(label(r.score));
        source_rows.push_back(it->second);
      }
    } else {
      double sum = 0;
      for (const RaterScore& r : s.ratings) sum += r.score;
      const int rounded = static_cast<int>(std::floor(sum / static_cast<double>(s.ratings.size()) + 0.5));
      d.row_ids.push_back(s.id);
      d.story_ids.push_back(s.id);
      d.y.push_back(label(rounded));
      source_rows.push_back(it->second);
    }
  }
  d.X = features.values(source_rows, Eigen::all);
  return d;
}

std::vector<ColumnSummary> summarize_columns(const Eigen::MatrixXd& values, const std::vector<std::string>& names) {
  std::vector<ColumnSummary> out;
  if (values.rows() == 0) return out;
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    const auto v = column(values, j);
    ColumnSummary s;
    s.name = names[static_cast<std::size_t>(j)];
    s.count = static_cast<double>(v.size());
    s.mean = stats::mean(v);
    s.std = stats::sample_std(v);
    s.min = *std::min_element(v.begin(), v.end());
    s.q25 = quantile(v, 0.25);
    s.q50 = quantile(v, 0.5);
    s.q75 = quantile(v, 0.75);
    s.max = *std::max_element(v.begin(), v.end());
    out.push_back(s);
  }
  return out;
}

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << (v == 0 ? 0.0 : v);
  return os.str();
}

std::string render_summary_markdown(const std::vector<ColumnSummary>& rows, const std::string& title) {
  std::ostringstream out;
  out << "### " << title << "\n\n";
  out << "| feature | count | mean | std | min | 25% | 50% | 75% | max |\n";
  out << "|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows)
    out << "| " << r.name << " | " << fixed(r.count, 0) << " | " << fixed(r.mean, 3) << " | " << fixed(r.std, 3)
        << " | " << fixed(r.min, 3) << " | " << fixed(r.q25, 3) << " | " << fixed(r.q50, 3) << " | "
        << fixed(r.q75, 3) << " | " << fixed(r.max, 3) << " |\n";
  return out.str();
}

std::vector<ComparisonRow> compare_columns(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                           const std::vector<std::string>& names) {
  if (a.cols() != b.cols() || static_cast<Eigen::Index>(names.size()) != a.cols())
    throw InputError("compared matrices have different columns");
  std::vector<ComparisonRow> out;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const auto va = column(a, j), vb = column(b, j);
    ComparisonRow r;
    r.feature = names[static_cast<std::size_t>(j)];
    r.mean_a = stats::mean(va);
    r.mean_b = stats::mean(vb);
    r.sem_a = va.empty() ? 0 : stats::sample_std(va) / std::sqrt(static_cast<double>(va.size()));
    r.sem_b = vb.empty() ? 0 : stats::sample_std(vb) / std::sqrt(static_cast<double>(vb.size()));
    const auto t = stats::mann_whitney_u(va, vb);
    r.u = t.statistic;
    r.p = t.p_value;
    r.degenerate = t.degenerate;
    out.push_back(r);
  }
  return out;
}

std::string render_comparison_markdown(const std::vector<ComparisonRow>& rows, const std::string& label_a,
                                       const std::string& label_b) {
  std::ostringstream out;
  out << "| feature | mean " << label_a << " | mean " << label_b << " | U | p-value | |\n";
  out << "|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    char p[32];
    std::snprintf(p, sizeof p, "%.3g", r.p);
    out << "| " << r.feature << " | " << fixed(r.mean_a, 3) << " | " << fixed(r.mean_b, 3) << " | " << fixed(r.u, 1)
        << " | " << p << (r.degenerate ? " (degenerate)" : "") << " | " << stats::significance_stars(r.p) << " |\n";
  }
  out << "\nTwo-sided Mann-Whitney U; U refers to the " << label_a
      << " sample. * p < 0.05, ** p < 0.01, *** p < 0.001.\n";
  return out.str();
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  csv::write_row(out, {"feature", "mean_a", "mean_b", "sem_a", "sem_b", "U", "p_value", "stars", "degenerate"});
  for (const auto& r : rows)
    csv::write_row(out, {r.feature, csv::format_double(r.mean_a), csv::format_double(r.mean_b),
                         csv::format_double(r.sem_a), csv::format_double(r.sem_b), csv::format_double(r.u),
                         csv::format_double(r.p), std::string(stats::significance_stars(r.p)),
                         r.degenerate ? "true" : "false"});
}

}  // namespace storynet

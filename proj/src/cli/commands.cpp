#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "storynet/corpus.hpp"
#include "storynet/csv.hpp"
#include "storynet/explain.hpp"
#include "storynet/ml.hpp"
#include "storynet/parallel.hpp"
#include "storynet/pipeline.hpp"
#include "storynet/rater.hpp"
#include "storynet/stats.hpp"
#include "storynet/svg.hpp"

namespace storynet::cli {

namespace {

struct NetworkExtras {
  int isolated_nodes = 0;
  double pagerank_mean = 0, pagerank_max = 0, pagerank_std = 0;
};

NetworkExtras network_extras(const Tfmn& tfmn, const PageRankParams& params) {
  NetworkExtras x;
  const Graph g = to_graph(tfmn);
  for (std::size_t v = 0; v < g.size(); ++v) x.isolated_nodes += g.degree(static_cast<int>(v)) == 0;
  if (g.size() == 0) return x;
  const Eigen::VectorXd pr = pagerank(g, params);
  x.pagerank_mean = pagerank_feature(pr, PageRankMode::Mean);
  x.pagerank_max = pagerank_feature(pr, PageRankMode::Max);
  x.pagerank_std = pagerank_feature(pr, PageRankMode::Std);
  return x;
}

// Mean/max/std PageRank columns from the diagnostics.csv beside a feature
// matrix, aligned to its story ids; nullopt when unavailable.
std::optional<Eigen::MatrixXd> pagerank_aggregates(const fs::path& features, const std::vector<std::string>& ids) {
  const fs::path diag = features.parent_path() / "diagnostics.csv";
  std::ifstream in(diag);
  if (!in) return std::nullopt;
  const auto rows = csv::read_all(in);
  if (rows.empty()) return std::nullopt;
  std::array<std::size_t, 4> col{};
  const std::array<std::string, 4> want = {"story_id", "pagerank_mean", "pagerank_max", "pagerank_std"};
  for (std::size_t k = 0; k < 4; ++k) {
    const auto it = std::find(rows[0].begin(), rows[0].end(), want[k]);
    if (it == rows[0].end()) return std::nullopt;
    col[k] = static_cast<std::size_t>(it - rows[0].begin());
  }
  std::map<std::string, std::array<double, 3>> by_id;
  for (std::size_t r = 1; r < rows.size(); ++r)
    by_id[rows[r][col[0]]] = {std::stod(rows[r][col[1]]), std::stod(rows[r][col[2]]), std::stod(rows[r][col[3]])};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(ids.size()), 3);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto it = by_id.find(ids[i]);
    if (it == by_id.end()) return std::nullopt;
    for (int k = 0; k < 3; ++k) m(static_cast<Eigen::Index>(i), k) = it->second[static_cast<std::size_t>(k)];
  }
  return m;
}

// Writes `content` to out/rel and records the artifact.
void emit(CommandResult& r, const fs::path& out, const std::string& rel, const std::string& content) {
  const fs::path path = out / rel;
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
  if (!f) throw std::runtime_error("write failed for " + path.string());
  r.outputs.push_back(rel);
}

Corpus read_corpus(const fs::path& path, const std::string& format) {
  if (path.empty()) throw InputError("a corpus path is required");
  if (!fs::is_regular_file(path)) throw InputError("corpus file not found: " + path.string());
  if (format == "auto") return load_corpus(path);
  if (format == "csv") return load_corpus(path, CorpusFormat::Csv);
  if (format == "json") return load_corpus(path, CorpusFormat::Json);
  throw InputError("unknown corpus format '" + format + "' (expected auto, csv or json)");
}

Corpus maybe_filter(Corpus c, int required) { return required > 0 ? filter_complete(c, required) : c; }

std::string corpus_csv(const Corpus& c) {
  std::ostringstream os;
  write_corpus_csv(os, c);
  return os.str();
}

std::string matrix_csv(const FeatureMatrix& m) {
  std::ostringstream os;
  write_feature_matrix(os, m);
  return os.str();
}

FeatureMatrix standard_matrix(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw InputError("feature matrix not found: " + path.string());
  FeatureMatrix m = read_feature_matrix(path);
  require_standard_features(m.feature_names, path.string());
  return m;
}

ml::ModelSpec model_spec(const ModelOptions& o) {
  ml::ModelSpec s;
  s.kind = ml::parse_model_kind(o.model);
  s.gbt = {o.rounds, o.max_depth, o.learning_rate, o.lambda, o.min_child_weight, o.seed};
  s.tree.max_depth = o.tree_max_depth;
  s.tree.min_samples_leaf = o.min_samples_leaf;
  s.tree.seed = o.seed;
  s.forest.trees = o.forest_trees;
  s.forest.tree.max_depth = o.forest_max_depth;
  s.forest.tree.min_samples_leaf = o.min_samples_leaf;
  s.forest.tree.max_features = o.max_features;
  s.forest.seed = o.seed;
  return s;
}

Dataset model_dataset(const ModelOptions& o, CommandResult& r) {
  FeatureMatrix fm = standard_matrix(o.features);
  Corpus corpus = maybe_filter(read_corpus(o.corpus, o.format), o.required_raters);
  r.inputs["features"] = o.features;
  r.inputs["corpus"] = o.corpus;
  return build_dataset(fm, corpus, parse_rating_scheme(o.scheme), parse_label_mode(o.label_mode));
}

nlohmann::json class_counts(const std::vector<int>& y) {
  std::array<int, ml::kClasses> c{};
  for (int v : y) ++c[v];
  return c;
}

std::string confusion_csv(const ml::ConfusionMatrix& m) {
  std::ostringstream os;
  csv::write_row(os, {"true_class", "pred_0", "pred_1", "pred_2"});
  for (int i = 0; i < ml::kClasses; ++i)
    csv::write_row(os, {std::to_string(i), std::to_string(m(i, 0)), std::to_string(m(i, 1)), std::to_string(m(i, 2))});
  return os.str();
}

const std::vector<std::string> kClassLabels = {"0 (low)", "1 (mid)", "2 (high)"};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

rater::RaterConfig rater_config(const EndpointOptions& e) {
  rater::RaterConfig cfg;
  cfg.endpoint_url = e.endpoint;
  cfg.model_name = e.model_name;
  if (!e.temperature.empty()) {
    std::size_t used = 0;
    double t = 0;
    try {
      t = std::stod(e.temperature, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != e.temperature.size()) throw InputError("temperature must be a number, got '" + e.temperature + "'");
    cfg.temperature = t;
  }
  cfg.api_key_env_var = e.api_key_env;
  cfg.max_retries = e.max_retries;
  cfg.request_timeout_s = e.timeout;
  cfg.max_in_flight = e.max_in_flight;
  cfg.backoff_initial_s = e.backoff;
  cfg.seed = e.seed;
  return cfg;
}

}  // namespace

CommandResult run_ingest(const IngestOptions& o, const fs::path& out) {
  CommandResult r;
  r.inputs["corpus"] = o.corpus;
  const Corpus all = read_corpus(o.corpus, o.format);
  const Corpus kept = maybe_filter(all, o.required_raters);
  emit(r, out, "features/corpus_clean.csv", corpus_csv(kept));

  std::ostringstream lengths;
  csv::write_row(lengths, {"story_id", "author", "words"});
  std::map<AuthorKind, std::vector<double>> by_author;
  for (const Story& s : kept) {
    const auto n = story_word_count(s);
    by_author[s.author].push_back(static_cast<double>(n));
    csv::write_row(lengths, {s.id, std::string(to_string(s.author)), std::to_string(n)});
  }
  emit(r, out, "reports/story_lengths.csv", lengths.str());

  std::ostringstream md;
  md << "### Corpus\n\n";
  md << "| quantity | value |\n|---|---|\n";
  md << "| stories loaded | " << all.size() << " |\n";
  md << "| required raters | " << o.required_raters << " |\n";
  md << "| stories kept | " << kept.size() << " |\n";
  md << "| stories dropped | " << all.size() - kept.size() << " |\n";
  for (const auto& [author, v] : by_author)
    md << "| mean words (" << to_string(author) << ") | " << fixed(stats::mean(v), 1) << " |\n";
  if (by_author.size() == 2) {
    const auto t = stats::mann_whitney_u(by_author[AuthorKind::Human], by_author[AuthorKind::Llm]);
    md << "| story length Mann-Whitney U (human vs llm) | " << fixed(t.statistic, 1) << " |\n";
    md << "| story length p-value | " << t.p_value << " |\n";
    r.details["length_u"] = t.statistic;
    r.details["length_p"] = t.p_value;
  }
  emit(r, out, "reports/ingest_summary.md", md.str());
  r.details["loaded"] = all.size();
  r.details["kept"] = kept.size();
  return r;
}

CommandResult run_featurize(const FeaturizeOptions& o, const fs::path& out) {
  CommandResult r;
  r.inputs = {{"corpus", o.corpus}, {"conllu_dir", o.conllu_dir}, {"lexicon", o.lexicon},
              {"antonyms", o.antonyms}, {"stoplist", o.stoplist}};
  if (!o.scaling_params.empty()) r.inputs["scaling_params"] = o.scaling_params;
  const Corpus corpus = maybe_filter(read_corpus(o.corpus, o.format), o.required_raters);
  if (!fs::is_directory(o.conllu_dir)) throw InputError("CoNLL-U directory not found: " + o.conllu_dir.string());
  const auto missing = missing_parses(corpus, o.conllu_dir);
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    throw InputError("missing CoNLL-U parse files for " + std::to_string(missing.size()) + " stories: " + list);
  }
  const Resources res = Resources::load(o.lexicon, o.antonyms, o.stoplist);

  storynet::FeaturizeOptions opts;
  if (o.max_tree_distance < 1) throw InputError("max-tree-distance must be >= 1");
  opts.max_tree_distance = o.max_tree_distance;
  opts.null_model.mode = parse_null_model(o.null_model);
  opts.null_model.samples = o.mc_samples;
  opts.null_size = parse_null_size(o.null_size);
  opts.network.component_mode = parse_component_mode(o.component_mode);
  opts.network.degree_mode = parse_degree_mode(o.degree_mode);
  opts.network.pagerank_mode = parse_pagerank_mode(o.pagerank_mode);
  opts.network.pagerank = {o.damping, o.pagerank_tol, o.pagerank_max_iter};
  opts.seed = o.seed;

  std::vector<StoryAnalysis> results(corpus.size());
  std::vector<NetworkExtras> extras(corpus.size());
  parallel_for(corpus.size(), o.jobs, [&](std::size_t i) {
    const ParsedStory parsed = load_parsed_story(o.conllu_dir, corpus[i].id);
    results[i] = analyze_story(corpus[i], parsed, res, opts);
    extras[i] = network_extras(results[i].network, opts.network.pagerank);
  });

  FeatureMatrix raw;
  for (auto n : kFeatureNames) raw.feature_names.emplace_back(n);
  raw.values.resize(static_cast<Eigen::Index>(corpus.size()), kFeatureCount);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    raw.story_ids.push_back(corpus[i].id);
    raw.values.row(static_cast<Eigen::Index>(i)) = results[i].features.values.transpose();
  }
  if (corpus.empty()) throw InputError("no stories to featurize");

  std::optional<ScalingParams> given;
  if (!o.scaling_params.empty()) {
    std::ifstream in(o.scaling_params);
    if (!in) throw InputError("cannot open scaling params " + o.scaling_params.string());
    given = scaling_from_json(nlohmann::json::parse(in));
  }
  auto [scaled_values, params] = minmax_scale(raw.values, given);
  FeatureMatrix scaled{raw.story_ids, scaled_values, raw.feature_names};

  emit(r, out, "features/features_raw.csv", matrix_csv(raw));
  emit(r, out, "features/features_scaled.csv", matrix_csv(scaled));
  const nlohmann::json scaling = scaling_to_json(params, raw.feature_names);
  emit(r, out, "features/scaling.json", scaling.dump(2) + "\n");

  std::ostringstream diag;
  csv::write_row(diag, {"story_id", "sentences", "content_tokens", "nodes", "edges", "n_lexicon_tokens",
                        "isolated_nodes", "low_coverage", "negated", "unresolved_negations", "unresolved_lemmas",
                        "significant_emotions", "pagerank_mean", "pagerank_max", "pagerank_std"});
  int low_coverage = 0, unresolved = 0, isolated = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const NetworkExtras& x = extras[i];
    isolated += x.isolated_nodes;
    const StoryAnalysis& a = results[i];
    std::string lemmas, significant;
    for (const auto& l : a.diagnostics.unresolved_lemmas) lemmas += (lemmas.empty() ? "" : ";") + l;
    for (const auto& [e, dir] : significant_emotions(a.profile))
      significant += (significant.empty() ? "" : ";") + std::string(to_string(e)) + (dir == Direction::Over ? "+" : "-");
    low_coverage += a.profile.low_coverage;
    unresolved += a.diagnostics.unresolved_negations;
    csv::write_row(diag, {corpus[i].id, std::to_string(a.diagnostics.sentences),
                          std::to_string(a.diagnostics.content_tokens), std::to_string(a.network.node_count()),
                          std::to_string(a.network.edge_count()), std::to_string(a.profile.n_lexicon_tokens),
                          std::to_string(x.isolated_nodes), a.profile.low_coverage ? "true" : "false",
                          std::to_string(a.diagnostics.negated), std::to_string(a.diagnostics.unresolved_negations),
                          lemmas, significant, csv::format_double(x.pagerank_mean),
                          csv::format_double(x.pagerank_max), csv::format_double(x.pagerank_std)});
  }
  emit(r, out, "features/diagnostics.csv", diag.str());

  if (o.export_networks)
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      std::ostringstream edges, nodes;
      write_edge_list(edges, results[i].network);
      write_node_table(nodes, results[i].network);
      emit(r, out, "features/networks/" + corpus[i].id + ".edges.tsv", edges.str());
      emit(r, out, "features/networks/" + corpus[i].id + ".nodes.tsv", nodes.str());
    }

  std::ostringstream summary;
  summary << render_summary_markdown(summarize_columns(raw.values, raw.feature_names), "Raw features") << "\n";
  summary << render_summary_markdown(summarize_columns(scaled.values, scaled.feature_names),
                                     "Scaled features (min-max, fit on this corpus)");
  emit(r, out, "reports/feature_summary.md", summary.str());

  r.details["stories"] = corpus.size();
  r.details["low_coverage_stories"] = low_coverage;
  r.details["unresolved_negations"] = unresolved;
  r.details["isolated_nodes"] = isolated;
  r.details["isolated_nodes_policy"] = "isolated content lemmas are network nodes";
  r.details["featurize_options"] = opts.to_json();
  r.details["scaling_scope"] = given ? "supplied" : "per-corpus";
  r.details["scaling"] = scaling;
  return r;
}

CommandResult run_compare(const CompareOptions& o, const fs::path& out) {
  CommandResult r;
  r.inputs = {{"a", o.a}, {"b", o.b}};
  FeatureMatrix a = standard_matrix(o.a);
  FeatureMatrix b = standard_matrix(o.b);
  if (a.values.rows() == 0 || b.values.rows() == 0) throw InputError("compared matrices must be non-empty");
  Eigen::MatrixXd va = a.values, vb = b.values;
  if (o.scaling == "pooled") {
    Eigen::MatrixXd pooled(va.rows() + vb.rows(), va.cols());
    pooled << va, vb;
    const ScalingParams p = fit_minmax(pooled);
    va = apply_minmax(va, p);
    vb = apply_minmax(vb, p);
  } else if (o.scaling != "none") {
    throw InputError("unknown scaling '" + o.scaling + "' (expected pooled or none)");
  }
  std::vector<ComparisonRow> rows = compare_columns(va, vb, a.feature_names);

  if (!o.corpus_a.empty() && !o.corpus_b.empty()) {
    r.inputs["corpus_a"] = o.corpus_a;
    r.inputs["corpus_b"] = o.corpus_b;
    auto lengths = [](const Corpus& c) {
      std::vector<double> v;
      for (const Story& s : c) v.push_back(static_cast<double>(story_word_count(s)));
      return v;
    };
    const auto la = lengths(read_corpus(o.corpus_a, "auto"));
    const auto lb = lengths(read_corpus(o.corpus_b, "auto"));
    Eigen::MatrixXd ma = Eigen::Map<const Eigen::VectorXd>(la.data(), static_cast<Eigen::Index>(la.size()));
    Eigen::MatrixXd mb = Eigen::Map<const Eigen::VectorXd>(lb.data(), static_cast<Eigen::Index>(lb.size()));
    const auto length_rows = compare_columns(ma, mb, {"Story_length_words"});
    rows.insert(rows.begin(), length_rows.begin(), length_rows.end());
  }

  // Every PageRank aggregate, from the diagnostics written next to each matrix.
  const auto pa = pagerank_aggregates(o.a, a.story_ids), pb = pagerank_aggregates(o.b, b.story_ids);
  if (pa && pb) {
    Eigen::MatrixXd xa = *pa, xb = *pb;
    if (o.scaling == "pooled") {
      Eigen::MatrixXd pooled(xa.rows() + xb.rows(), xa.cols());
      pooled << xa, xb;
      const ScalingParams p = fit_minmax(pooled);
      xa = apply_minmax(xa, p);
      xb = apply_minmax(xb, p);
    }
    const auto extra = compare_columns(xa, xb, {"PageRank_mean", "PageRank_max", "PageRank_std"});
    rows.insert(rows.end(), extra.begin(), extra.end());
  }

  std::ostringstream md;
  md << "### Feature comparison: " << o.label_a << " (n=" << a.values.rows() << ") vs " << o.label_b
     << " (n=" << b.values.rows() << ")\n\n";
  md << "Scaling: " << o.scaling << ".\n\n" << render_comparison_markdown(rows, o.label_a, o.label_b);
  emit(r, out, "reports/comparison.md", md.str());
  std::ostringstream csv_out;
  write_comparison_csv(csv_out, rows);
  emit(r, out, "reports/comparison.csv", csv_out.str());

  std::vector<std::string> cats;
  svg::Series sa{o.label_a, {}, {}}, sb{o.label_b, {}, {}};
  for (const auto& row : rows) {
    const bool alternative = row.feature.rfind("PageRank_", 0) == 0 && row.feature != "PageRank_centrality";
    if (row.feature == "Story_length_words" || alternative) continue;
    cats.push_back(row.feature + std::string(stats::significance_stars(row.p)));
    sa.values.push_back(row.mean_a);
    sa.errors.push_back(row.sem_a);
    sb.values.push_back(row.mean_b);
    sb.errors.push_back(row.sem_b);
  }
  emit(r, out, "figures/comparison.svg",
       svg::grouped_bars("Mean scaled features (error bars: standard error)", cats, {sa, sb}, "scaled value"));
  nlohmann::json sig = nlohmann::json::object();
  for (const auto& row : rows) sig[row.feature] = {{"U", row.u}, {"p", row.p}};
  r.details["tests"] = sig;
  return r;
}

CommandResult run_train(const TrainOptions& o, const fs::path& out) {
  CommandResult r;
  const Dataset d = model_dataset(o.model, r);
  const auto model = ml::train_model(model_spec(o.model), d.X, d.y, d.feature_names);
  emit(r, out, "models/" + o.name + ".json", model->to_json().dump(2) + "\n");
  if (const auto* gbt = dynamic_cast<const ml::GbtModel*>(model.get())) {
    std::ostringstream log;
    csv::write_row(log, {"round", "train_log_loss"});
    for (std::size_t k = 0; k < gbt->train_log_loss.size(); ++k)
      csv::write_row(log, {std::to_string(k + 1), csv::format_double(gbt->train_log_loss[k])});
    emit(r, out, "reports/training_log.csv", log.str());
  }
  const Eigen::MatrixXd probs = model->predict_proba_rows(d.X);
  int correct = 0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index best = 0;
    probs.row(i).maxCoeff(&best);
    correct += static_cast<int>(best) == d.y[static_cast<std::size_t>(i)];
  }
  r.details["rows"] = d.y.size();
  r.details["class_counts"] = class_counts(d.y);
  r.details["train_accuracy"] = static_cast<double>(correct) / static_cast<double>(std::max<std::size_t>(d.y.size(), 1));
  return r;
}

CommandResult run_evaluate(const EvaluateOptions& o, const fs::path& out) {
  CommandResult r;
  const Dataset d = model_dataset(o.model, r);
  const ml::CvReport cv = ml::cross_validate(model_spec(o.model), d.X, d.y, o.folds, o.cv_seed);
  const std::string title =
      o.title.empty() ? o.model.model + ", " + o.model.scheme + " scheme, " + o.model.label_mode + " labels" : o.title;
  emit(r, out, "reports/classification_report.md", ml::render_classification_report(cv, title));
  emit(r, out, "reports/confusion_matrix.csv", confusion_csv(cv.confusion));

  std::vector<std::vector<double>> cells(ml::kClasses, std::vector<double>(ml::kClasses));
  for (int i = 0; i < ml::kClasses; ++i)
    for (int j = 0; j < ml::kClasses; ++j) cells[i][j] = static_cast<double>(cv.confusion(i, j));
  emit(r, out, "figures/confusion_matrix.svg",
       svg::heatmap("Cross-validated confusion matrix (" + std::to_string(o.folds) + "-fold)", cells, kClassLabels,
                    kClassLabels, "true class", "predicted class"));

  std::ostringstream oof;
  csv::write_row(oof, {"row_id", "y_true", "p0", "p1", "p2", "y_pred"});
  for (std::size_t i = 0; i < d.y.size(); ++i) {
    const auto row = cv.oof_probs.row(static_cast<Eigen::Index>(i));
    Eigen::Index best = 0;
    row.maxCoeff(&best);
    csv::write_row(oof, {d.row_ids[i], std::to_string(d.y[i]), csv::format_double(row(0)), csv::format_double(row(1)),
                         csv::format_double(row(2)), std::to_string(best)});
  }
  emit(r, out, "reports/oof_predictions.csv", oof.str());

  auto ms = [](const ml::MeanStd& m) { return nlohmann::json{{"mean", m.mean}, {"std", m.std}}; };
  nlohmann::json metrics = {{"folds", o.folds},
                            {"cv_seed", o.cv_seed},
                            {"rows", d.y.size()},
                            {"accuracy", ms(cv.accuracy)},
                            {"roc_auc_macro", ms(cv.roc_auc_macro)},
                            {"roc_auc_weighted", ms(cv.roc_auc_weighted)},
                            {"fold_accuracy", cv.fold_accuracy}};
  for (int c = 0; c < ml::kClasses; ++c)
    metrics["per_class"].push_back({{"class", c},
                                    {"precision", ms(cv.per_class[c].precision)},
                                    {"recall", ms(cv.per_class[c].recall)},
                                    {"f1", ms(cv.per_class[c].f1)},
                                    {"support", cv.per_class[c].support}});
  emit(r, out, "reports/cv_metrics.json", metrics.dump(2) + "\n");
  r.details["accuracy"] = ms(cv.accuracy);
  r.details["roc_auc_macro"] = ms(cv.roc_auc_macro);
  r.details["class_counts"] = class_counts(d.y);
  return r;
}

CommandResult run_explain(const ExplainOptions& o, const fs::path& out) {
  CommandResult r;
  r.inputs = {{"model", o.model}, {"features", o.features}};
  if (!fs::is_regular_file(o.model)) throw InputError("model file not found: " + o.model.string());
  std::ifstream min(o.model);
  const nlohmann::json mj = nlohmann::json::parse(min);
  if (mj.value("kind", "") != "gbt")
    throw InputError("SHAP export needs a gradient-boosted model; got '" + mj.value("kind", "?") + "'");
  const ml::GbtModel model = ml::GbtModel::from_json(mj);
  const FeatureMatrix fm = standard_matrix(o.features);
  if (model.feature_names != fm.feature_names)
    throw InputError("model feature names do not match the header of " + o.features.string());

  explain::ShapMatrix shap;
  Eigen::MatrixXd X;
  std::vector<std::string> ids;
  if (o.scope == "full") {
    X = fm.values;
    ids = fm.story_ids;
    shap = explain::shap_matrix(model, X);
  } else if (o.scope == "per-fold") {
    r.inputs["corpus"] = o.corpus;
    const Corpus corpus = maybe_filter(read_corpus(o.corpus, o.format), o.required_raters);
    const Dataset d =
        build_dataset(fm, corpus, parse_rating_scheme(o.scheme), parse_label_mode(o.label_mode));
    const auto folds = ml::stratified_folds(d.y, o.folds, o.cv_seed);
    X = d.X;
    ids = d.row_ids;
    for (int c = 0; c < ml::kClasses; ++c) shap.values[c] = Eigen::MatrixXd::Zero(X.rows(), X.cols());
    // Base values differ per fold; the reported base is their mean.
    for (std::size_t f = 0; f < folds.size(); ++f) {
      std::vector<char> test(d.y.size(), 0);
      for (auto i : folds[f]) test[i] = 1;
      std::vector<Eigen::Index> rows;
      std::vector<int> y;
      for (std::size_t i = 0; i < d.y.size(); ++i)
        if (!test[i]) {
          rows.push_back(static_cast<Eigen::Index>(i));
          y.push_back(d.y[i]);
        }
      ml::GbtParams p = model.params;
      p.seed += f;
      const ml::GbtModel fold_model = ml::train_gbt(X(rows, Eigen::all), y, p, model.feature_names);
      shap.base_values += explain::base_values(fold_model) / static_cast<double>(folds.size());
      for (auto i : folds[f]) {
        const auto s = explain::tree_shap(fold_model, X.row(static_cast<Eigen::Index>(i)));
        for (int c = 0; c < ml::kClasses; ++c) shap.values[c].row(static_cast<Eigen::Index>(i)) = s.values[c].transpose();
      }
    }
  } else {
    throw InputError("unknown SHAP scope '" + o.scope + "' (expected full or per-fold)");
  }

  const auto imp = explain::mean_abs_shap(shap);
  std::ostringstream values, importance, swarm;
  explain::write_shap_csv(values, shap, X, ids, fm.feature_names);
  explain::write_importance_csv(importance, imp, fm.feature_names);
  emit(r, out, "reports/shap_values.csv", values.str());
  emit(r, out, "reports/shap_importance.csv", importance.str());

  csv::write_row(swarm, {"class", "feature", "sample_id", "shap_value", "feature_value", "tercile"});
  for (int c = 0; c < ml::kClasses; ++c) {
    const auto rows = explain::beeswarm_export(X, shap, c);
    for (const auto& row : rows)
      csv::write_row(swarm, {std::to_string(c), fm.feature_names[static_cast<std::size_t>(row.feature)],
                             ids[static_cast<std::size_t>(row.sample)], csv::format_double(row.shap_value),
                             csv::format_double(row.feature_value), std::string(explain::to_string(row.tercile))});

    std::vector<std::string> cats;
    std::vector<int> position(fm.feature_names.size());
    for (std::size_t k = 0; k < imp.class_rank[c].size(); ++k) {
      cats.push_back(fm.feature_names[static_cast<std::size_t>(imp.class_rank[c][k])]);
      position[static_cast<std::size_t>(imp.class_rank[c][k])] = static_cast<int>(k);
    }
    std::vector<svg::SwarmPoint> points;
    for (const auto& row : rows)
      points.push_back({position[static_cast<std::size_t>(row.feature)], row.shap_value,
                        static_cast<int>(row.tercile)});
    emit(r, out, "figures/shap_beeswarm_class" + std::to_string(c) + ".svg",
         svg::beeswarm("SHAP values, class " + kClassLabels[static_cast<std::size_t>(c)], cats, points,
                       {"weak", "moderate", "strong"}, "SHAP value (margin scale)"));
  }
  emit(r, out, "reports/shap_beeswarm.csv", swarm.str());

  std::vector<std::string> cats;
  std::vector<svg::Series> series;
  for (int c = 0; c < ml::kClasses; ++c) series.push_back({"class " + kClassLabels[static_cast<std::size_t>(c)], {}, {}});
  for (int j : imp.global_rank) {
    cats.push_back(fm.feature_names[static_cast<std::size_t>(j)]);
    for (int c = 0; c < ml::kClasses; ++c) series[static_cast<std::size_t>(c)].values.push_back(imp.mean_abs(c, j));
  }
  emit(r, out, "figures/shap_importance.svg",
       svg::grouped_hbars("Mean |SHAP| per feature and class", cats, series, "mean |SHAP value| (margin scale)"));

  r.details["scope"] = o.scope;
  r.details["base_values"] = {shap.base_values(0), shap.base_values(1), shap.base_values(2)};
  for (int c = 0; c < ml::kClasses; ++c) {
    nlohmann::json top = nlohmann::json::array();
    for (std::size_t k = 0; k < std::min<std::size_t>(5, imp.class_rank[c].size()); ++k)
      top.push_back(fm.feature_names[static_cast<std::size_t>(imp.class_rank[c][k])]);
    r.details["top_features"][std::to_string(c)] = top;
  }
  return r;
}

CommandResult run_rate(const RateOptions& o, const fs::path& out) {
  CommandResult r;
  r.inputs["corpus"] = o.corpus;
  Corpus corpus = read_corpus(o.corpus, o.format);
  if (!o.keep_existing)
    for (Story& s : corpus) s.ratings.clear();
  rater::RaterConfig cfg = rater_config(o.endpoint);
  cfg.judges = o.judges;
  cfg.validate();
  const std::string key = rater::api_key_from_env(cfg);
  if (key.empty()) std::clog << "warning: environment variable " << cfg.api_key_env_var << " is not set\n";
  rater::HttpTransport transport(cfg, key);
  fs::create_directories(out / "reports");
  fs::remove(out / "reports/requests.jsonl");
  rater::RequestLog log((out / "reports/requests.jsonl").string());
  r.outputs.push_back("reports/requests.jsonl");
  rater::ChatClient client(transport, cfg, &log);
  const auto report = rater::rate_corpus(corpus, client, rater::PromptTemplates::defaults());

  bool fits_csv = std::all_of(report.corpus.begin(), report.corpus.end(),
                              [](const Story& s) { return s.ratings.size() <= 4; });
  std::ostringstream corpus_out;
  if (fits_csv)
    write_corpus_csv(corpus_out, report.corpus);
  else
    write_corpus_json(corpus_out, report.corpus);
  emit(r, out, fits_csv ? "reports/rated_corpus.csv" : "reports/rated_corpus.json", corpus_out.str());

  std::ostringstream outcomes;
  csv::write_row(outcomes, {"story_id", "judge", "rater_id", "score", "attempts", "lenient", "error"});
  for (const auto& oc : report.outcomes)
    csv::write_row(outcomes, {oc.story_id, std::to_string(oc.judge), rater::judge_id(oc.judge),
                              oc.score ? std::to_string(*oc.score) : "", std::to_string(oc.attempts),
                              oc.lenient_warning ? "true" : "false", oc.error});
  emit(r, out, "reports/rating_outcomes.csv", outcomes.str());
  if (report.failures > 0)
    std::clog << "warning: " << report.failures << " of " << report.outcomes.size() << " ratings failed\n";
  r.details["rater"] = cfg.to_json();
  r.details["failures"] = report.failures;
  r.details["lenient_parses"] = report.lenient;
  return r;
}

CommandResult run_generate(const GenerateOptions& o, const fs::path& out) {
  CommandResult r;
  r.inputs["prompts"] = o.prompts;
  if (!fs::is_regular_file(o.prompts)) throw InputError("prompt file not found: " + o.prompts.string());
  std::ifstream in(o.prompts, std::ios::binary);
  const auto rows = csv::read_all(in);
  if (rows.empty() || rows[0] != csv::Row{"prompt1", "prompt2", "prompt3"})
    throw InputError(o.prompts.string() + ": expected header prompt1,prompt2,prompt3");
  std::vector<rater::Triplet> prompts;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() == 1 && rows[i][0].empty()) continue;
    if (rows[i].size() != 3)
      throw InputError(o.prompts.string() + ": row " + std::to_string(i + 1) + " needs three words");
    prompts.push_back({rows[i][0], rows[i][1], rows[i][2]});
  }
  rater::RaterConfig cfg = rater_config(o.endpoint);
  cfg.validate();
  rater::HttpTransport transport(cfg, rater::api_key_from_env(cfg));
  fs::create_directories(out / "reports");
  fs::remove(out / "reports/requests.jsonl");
  rater::RequestLog log((out / "reports/requests.jsonl").string());
  r.outputs.push_back("reports/requests.jsonl");
  rater::ChatClient client(transport, cfg, &log);
  const auto result = rater::generate_stories(prompts, o.participants, client, rater::PromptTemplates::defaults());

  emit(r, out, "reports/generated_corpus.csv", corpus_csv(result.stories));
  std::ostringstream gaps;
  csv::write_row(gaps, {"participant", "prompt_index", "prompt1", "prompt2", "prompt3", "reason"});
  for (const auto& g : result.gaps)
    csv::write_row(gaps, {std::to_string(g.participant), std::to_string(g.prompt_index), g.prompt[0], g.prompt[1],
                          g.prompt[2], g.reason});
  emit(r, out, "reports/generation_gaps.csv", gaps.str());
  r.details["rater"] = cfg.to_json();
  r.details["stories"] = result.stories.size();
  r.details["gaps"] = result.gaps.size();
  return r;
}

CommandResult run_distributions(const DistributionOptions& o, const fs::path& out) {
  CommandResult r;
  r.inputs["corpus"] = o.corpus;
  const Corpus corpus = maybe_filter(read_corpus(o.corpus, o.format), o.required_raters);
  const RatingScheme scheme = parse_rating_scheme(o.scheme);
  std::vector<std::string> raters;
  std::map<std::string, std::array<long long, 5>> scores;
  std::map<std::string, std::array<long long, 3>> classes;
  for (const Story& s : corpus)
    for (const RaterScore& rs : s.ratings) {
      if (!scores.count(rs.rater_id)) {
        raters.push_back(rs.rater_id);
        scores[rs.rater_id] = {};
        classes[rs.rater_id] = {};
      }
      ++scores[rs.rater_id][static_cast<std::size_t>(rs.score - 1)];
      try {
        ++classes[rs.rater_id][static_cast<std::size_t>(bin_rating(rs.score, scheme))];
      } catch (const SchemeError& e) {
        throw SchemeError("story '" + s.id + "': " + e.what());
      }
    }
  if (raters.empty()) throw InputError("the corpus has no ratings");

  std::ostringstream sc, cc;
  csv::write_row(sc, {"rater_id", "score", "count"});
  csv::write_row(cc, {"rater_id", "class", "count"});
  std::vector<svg::Series> score_series, class_series;
  for (const auto& id : raters) {
    svg::Series s1{id, {}, {}}, s2{id, {}, {}};
    for (int k = 0; k < 5; ++k) {
      csv::write_row(sc, {id, std::to_string(k + 1), std::to_string(scores[id][static_cast<std::size_t>(k)])});
      s1.values.push_back(static_cast<double>(scores[id][static_cast<std::size_t>(k)]));
    }
    for (int k = 0; k < 3; ++k) {
      csv::write_row(cc, {id, std::to_string(k), std::to_string(classes[id][static_cast<std::size_t>(k)])});
      s2.values.push_back(static_cast<double>(classes[id][static_cast<std::size_t>(k)]));
    }
    score_series.push_back(s1);
    class_series.push_back(s2);
  }
  emit(r, out, "reports/rating_distribution.csv", sc.str());
  emit(r, out, "reports/class_distribution.csv", cc.str());
  emit(r, out, "figures/rating_distribution.svg",
       svg::grouped_bars("Rating distribution per rater", {"1", "2", "3", "4", "5"}, score_series, "stories"));
  emit(r, out, "figures/class_distribution.svg",
       svg::grouped_bars("Creativity classes per rater (" + o.scheme + ")", kClassLabels, class_series, "stories"));
  r.details["raters"] = raters;
  return r;
}

CommandResult run_report(const ReportOptions& o, const fs::path& out) {
  CommandResult r;
  auto has = [&](const std::string& rel) { return fs::is_regular_file(out / rel); };
  std::ostringstream md;
  md << "# " << o.title << "\n\n";
  const auto manifest_file = out / "manifest.json";
  if (fs::is_regular_file(manifest_file)) {
    std::ifstream in(manifest_file);
    const auto m = nlohmann::json::parse(in);
    md << "Toolkit version " << m.value("version", "?") << ". Commands recorded in `manifest.json`:";
    for (const auto& [name, _] : m["commands"].items()) md << " `" << name << "`";
    md << ".\n\n";
  }
  struct Section {
    std::string heading;
    std::vector<std::string> markdown;
    std::vector<std::string> figures;
  };
  const std::vector<Section> sections = {
      {"Data and ratings", {"reports/ingest_summary.md"}, {"figures/rating_distribution.svg", "figures/class_distribution.svg"}},
      {"Network and emotion features", {"reports/feature_summary.md"}, {}},
      {"Human versus LLM stories", {"reports/comparison.md"}, {"figures/comparison.svg"}},
      {"Classification", {"reports/classification_report.md"}, {"figures/confusion_matrix.svg"}},
      {"Feature importance", {}, {"figures/shap_importance.svg", "figures/shap_beeswarm_class0.svg",
                                  "figures/shap_beeswarm_class1.svg", "figures/shap_beeswarm_class2.svg"}},
  };
  int n = 0;
  for (const auto& s : sections) {
    bool any = false;
    for (const auto& f : s.markdown) any = any || has(f);
    for (const auto& f : s.figures) any = any || has(f);
    if (s.heading == "Feature importance") any = any || has("reports/shap_importance.csv");
    if (!any) continue;
    md << "## " << ++n << ". " << s.heading << "\n\n";
    for (const auto& f : s.markdown)
      if (has(f)) md << read_text(out / f) << "\n";
    if (s.heading == "Classification" && has("reports/confusion_matrix.csv")) {
      std::ifstream in(out / "reports/confusion_matrix.csv");
      const auto rows = csv::read_all(in);
      md << "Pooled confusion matrix (rows: true class, columns: predicted class):\n\n";
      md << "| | pred 0 | pred 1 | pred 2 |\n|---|---|---|---|\n";
      for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].size() == 4)
          md << "| true " << rows[i][0] << " | " << rows[i][1] << " | " << rows[i][2] << " | " << rows[i][3] << " |\n";
      md << "\n";
    }
    if (s.heading == "Feature importance" && has("reports/shap_importance.csv")) {
      std::ifstream in(out / "reports/shap_importance.csv");
      const auto rows = csv::read_all(in);
      md << "Top five features by mean |SHAP| per class:\n\n| class | rank | feature | mean abs SHAP |\n|---|---|---|---|\n";
      for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].size() == 4 && std::stoi(rows[i][3]) <= 5)
          md << "| " << rows[i][0] << " | " << rows[i][3] << " | " << rows[i][1] << " | "
             << fixed(std::stod(rows[i][2]), 4) << " |\n";
      md << "\n";
    }
    for (const auto& f : s.figures)
      if (has(f)) md << "![" << fs::path(f).stem().string() << "](../" << f << ")\n\n";
  }
  if (n == 0) throw InputError("no artifacts found under " + out.string() + "; run the pipeline commands first");
  emit(r, out, "reports/report.md", md.str());
  r.details["sections"] = n;
  return r;
}

}  // namespace storynet::cli

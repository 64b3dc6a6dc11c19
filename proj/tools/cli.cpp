#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "rankmerge/error.hpp"
#include "rankmerge/heterogeneity.hpp"
#include "rankmerge/ingest.hpp"
#include "rankmerge/matrix.hpp"
#include "rankmerge/multivar.hpp"
#include "rankmerge/pairwise.hpp"
#include "rankmerge/rstats.hpp"
#include "rankmerge/svg.hpp"
#include "rankmerge/text.hpp"
#include "rankmerge/transform.hpp"

namespace rankmerge::cli {

namespace fs = std::filesystem;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string config;
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return kUsage;
    case ErrorKind::parse: return kParse;
    case ErrorKind::format: return kParse;
    case ErrorKind::annotation: return kAnnotation;
    case ErrorKind::score_state: return kScoreState;
    case ErrorKind::no_common_features: return kNoCommonFeatures;
    case ErrorKind::degenerate: return kDegenerate;
    case ErrorKind::unknown_feature: return kUnknownFeature;
    case ErrorKind::empty_universe: return kEmptyUniverse;
    case ErrorKind::io: return kIo;
  }
  return kUsage;
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes path via "<path>.partial" and renames on success. An I/O failure
/// leaves the .partial file behind as a marker; any other failure removes it.
template <class Fn>
void write_output(const fs::path& path, Fn&& body) {
  fs::path partial = path;
  partial += ".partial";
  {
    std::ofstream out(partial, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot open " + partial.string() + " for writing");
    try {
      body(out);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::io) {
        out.close();
        fs::remove(partial);
      }
      throw;
    } catch (...) {
      out.close();
      fs::remove(partial);
      throw;
    }
    out.flush();
    if (!out) throw Error(ErrorKind::io, "write failed; incomplete output left at " + partial.string());
  }
  std::error_code ec;
  fs::rename(partial, path, ec);
  if (ec) throw Error(ErrorKind::io, "cannot rename " + partial.string() + ": " + ec.message());
}

/// Writes to --out when given, otherwise to stdout.
template <class Fn>
void write_output_or_stdout(const std::string& path, std::ostream& out, Fn&& body) {
  if (path.empty() || path == "-") {
    body(out);
  } else {
    write_output(path, std::forward<Fn>(body));
  }
}

template <class Parser>
auto parse_file(const fs::path& path, Parser&& parser) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  try {
    return parser(in);
  } catch (const ParseError& e) {
    throw ParseError(e.code(), e.line(), path.string() + ": " + e.what());
  }
}

std::vector<Dataset> load_all(const std::vector<std::string>& dirs) {
  std::vector<Dataset> out;
  out.reserve(dirs.size());
  for (const auto& d : dirs) out.push_back(load_dataset(d));
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto part : split(text, ',')) {
    part = trim(part);
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

std::string near_matches(const DataMatrix& m, std::string_view symbol) {
  std::vector<std::pair<std::size_t, std::string>> scored;
  for (const auto& name : m.row_names()) {
    const auto d = edit_distance(symbol, name);
    if (d <= 2) scored.emplace_back(d, name);
  }
  std::sort(scored.begin(), scored.end());
  std::string out;
  for (std::size_t i = 0; i < scored.size() && i < 5; ++i) {
    if (i) out += ", ";
    out += scored[i].second;
  }
  return out.empty() ? "none" : out;
}

// ---------------------------------------------------------------------------
// Config file: top-level scalars become global flags, objects keyed by a
// command name become flags of that command. Command-line flags win because
// injected flags come first and options keep their last value.

std::vector<std::string> apply_config(const std::vector<std::string>& args, const std::set<std::string>& commands) {
  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].starts_with("--config=")) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw Error(ErrorKind::io, "cannot open config " + config_path);
  nlohmann::json cfg;
  try {
    in >> cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, "config " + config_path + ": " + e.what());
  }
  if (!cfg.is_object()) throw Error(ErrorKind::parse, "config " + config_path + ": top level must be an object");

  const auto to_flags = [](const nlohmann::json& obj) {
    std::vector<std::string> flags;
    for (const auto& [key, value] : obj.items()) {
      if (value.is_object()) continue;
      if (value.is_boolean()) {
        if (value.get<bool>()) flags.push_back("--" + key);
      } else if (value.is_string()) {
        flags.push_back("--" + key + "=" + value.get<std::string>());
      } else if (value.is_array()) {
        std::string joined;
        for (const auto& v : value) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
        flags.push_back("--" + key + "=" + joined);
      } else {
        flags.push_back("--" + key + "=" + value.dump());
      }
    }
    return flags;
  };

  std::vector<std::string> out{args.front()};
  const auto globals = to_flags(cfg);
  out.insert(out.end(), globals.begin(), globals.end());
  for (std::size_t i = 1; i < args.size(); ++i) {
    out.push_back(args[i]);
    if (commands.contains(args[i]) && cfg.contains(args[i]) && cfg[args[i]].is_object()) {
      const auto local = to_flags(cfg[args[i]]);
      out.insert(out.end(), local.begin(), local.end());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands

struct IngestArgs {
  std::string series;
  std::string annotation;
  std::string out;
  std::string name;
  std::string multi_policy = "first";
};

int cmd_ingest(const IngestArgs& a, const Globals& g, std::ostream& out) {
  const auto doc = parse_file(a.series, [](std::istream& in) { return parse_series_matrix(in); });
  const auto ann = parse_file(a.annotation, [](std::istream& in) { return parse_annotation(in); });
  const auto annotated = annotate(doc, ann, parse_multi_policy(a.multi_policy));
  const auto reduced = reduce_duplicates(annotated.raw, g.threads);

  const std::string name = a.name.empty() ? fs::path(a.series).stem().string() : a.name;
  DatasetMeta meta;
  meta.source = fs::path(a.series).filename().string();
  save_dataset(Dataset(reduced.matrix, annotated.info, name, meta), a.out);

  out << "probes\t" << doc.probes() << '\n'
      << "unmapped_probes\t" << annotated.unmapped_probes << '\n'
      << "multi_symbol_dropped\t" << annotated.multi_symbol_dropped << '\n'
      << "annotated_rows\t" << annotated.raw.rows() << '\n'
      << "all_missing_symbols_dropped\t" << reduced.dropped_symbols.size() << '\n'
      << "features\t" << reduced.matrix.rows() << '\n'
      << "samples\t" << reduced.matrix.cols() << '\n'
      << "info_fields\t" << annotated.info.fields() << '\n';
  return kOk;
}

struct ScoreArgs {
  std::string dataset;
  std::string kind = "vdw";
  std::string out;
};

int cmd_score(const ScoreArgs& a, const Globals& g, std::ostream& out) {
  const auto ds = load_dataset(a.dataset);
  const auto scored = score_dataset(ds, parse_score_kind(a.kind), g.threads);
  save_dataset(scored, a.out);
  out << "scored\t" << scored.data().rows() << " x " << scored.data().cols() << '\t' << a.kind << '\n';
  return kOk;
}

struct MergeArgs {
  std::vector<std::string> datasets;
  std::string out;
  std::string name;
};

int cmd_merge(const MergeArgs& a, std::ostream& out) {
  const auto all = load_all(a.datasets);
  auto merged = merge_datasets(all);
  if (!a.name.empty()) merged = Dataset(merged.data(), merged.info(), a.name, merged.meta());
  save_dataset(merged, a.out);
  out << "features\t" << merged.data().rows() << '\n' << "samples\t" << merged.samples() << '\n';
  return kOk;
}

struct SelectArgs {
  std::string dataset;
  std::string field;
  std::string keyword;
  std::string mode = "exact";
  bool exclude = false;
  std::string out;
};

int cmd_select(const SelectArgs& a, std::ostream& out) {
  const auto ds = load_dataset(a.dataset);
  const auto mode = parse_match_mode(a.mode);
  const auto sel = a.exclude ? exclude_samples(ds, a.field, a.keyword, mode) : select_samples(ds, a.field, a.keyword, mode);
  save_dataset(sel, a.out);
  out << "samples\t" << sel.samples() << " of " << ds.samples() << '\n';
  return kOk;
}

struct PartitionArgs {
  std::string dataset;
  std::string sizes;
  std::string out_prefix;
};

int cmd_partition(const PartitionArgs& a, const Globals& g, std::ostream& out) {
  const auto ds = load_dataset(a.dataset);
  std::vector<std::size_t> sizes;
  for (const auto& s : split_list(a.sizes)) {
    const auto v = parse_cell(s);
    if (!v || is_missing(*v) || *v < 1 || *v != std::floor(*v)) throw UsageError("--sizes: bad size '" + s + "'");
    sizes.push_back(static_cast<std::size_t>(*v));
  }
  const auto parts = random_partition(ds, sizes, g.seed);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string dir = a.out_prefix + "_" + std::to_string(i + 1);
    save_dataset(parts[i], dir);
    out << dir << '\t' << parts[i].samples() << '\n';
  }
  return kOk;
}

struct MedianCorArgs {
  std::vector<std::string> datasets;
  std::string method = "pearson";
  double alpha = 0.05;
  std::string out;
};

int cmd_median_cor(const MedianCorArgs& a, const Globals& g, std::ostream& out) {
  const auto all = load_all(a.datasets);
  const auto method = parse_correlation_method(a.method);
  const auto symbols = common_rows(std::span<const Dataset>(all));
  std::vector<std::vector<double>> medians;
  for (const auto& ds : all) medians.push_back(median_column(restrict_rows(ds.data(), symbols), g.threads));

  const std::size_t k = all.size();
  std::vector<double> cor(k * k, 1.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      cor[i * k + j] = cor[j * k + i] = median_correlation(medians[i], medians[j], method);
    }
  }

  write_output_or_stdout(a.out, out, [&](std::ostream& os) {
    os << "dataset";
    for (const auto& ds : all) os << '\t' << ds.name();
    os << '\n';
    for (std::size_t i = 0; i < k; ++i) {
      os << all[i].name();
      for (std::size_t j = 0; j < k; ++j) os << '\t' << format_double(cor[i * k + j]);
      os << '\n';
    }
    os << "# common_features\t" << symbols.size() << '\n';
    if (symbols.size() >= 10) {
      const double t = correlation_threshold(symbols.size(), a.alpha, Sidedness::one);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3g", t);
      os << "# threshold\t" << buf << "\t(alpha=" << format_double(a.alpha) << ", one-sided, exact "
         << format_double(t) << ")\n";
    } else {
      os << "# threshold\tNA\t(fewer than 10 common features)\n";
    }
  });
  return kOk;
}

struct PairwiseArgs {
  std::string dataset;
  std::string method = "pearson";
  std::string out;
  std::size_t chunk_rows = 64;
};

int cmd_pairwise(const PairwiseArgs& a, const Globals& g, std::ostream& out) {
  const auto ds = load_dataset(a.dataset);
  PairwiseOptions opt;
  opt.method = parse_correlation_method(a.method);
  opt.threads = g.threads;
  opt.chunk_rows = a.chunk_rows;
  const auto& names = ds.data().row_names();
  PairwiseSummary summary;
  write_output(a.out, [&](std::ostream& os) {
    std::string line;
    summary = pairwise_row_correlations(ds.data(), opt, [&](std::size_t i, std::size_t j, double r) {
      line.clear();
      line += names[i];
      line += '\t';
      line += names[j];
      line += '\t';
      line += format_double(r);
      line += '\n';
      os.write(line.data(), static_cast<std::streamsize>(line.size()));
    });
    if (!os) throw Error(ErrorKind::io, "write failed while streaming pairs");
  });
  out << "pairs\t" << summary.emitted << "\tskipped\t" << summary.skipped << '\n';
  return kOk;
}

struct TestArgs {
  std::vector<std::string> datasets;
  std::string test = "kw";
  std::string alternative = "greater";
  std::string field;
  std::string keyword;
  std::string mode = "exact";
  std::string fdr = "by";
  std::string rank_by = "p";
  double alpha = 0.05;
  std::string out;
};

int cmd_test(const TestArgs& a, const Globals& g, std::ostream& out) {
  if (a.test != "kw" && a.test != "wilcoxon") throw UsageError("--test must be kw or wilcoxon");
  if (a.fdr != "by" && a.fdr != "none") throw UsageError("--fdr must be by or none");
  const auto all = load_all(a.datasets);
  const auto alt = parse_alternative(a.alternative);

  std::vector<TestResult> results;
  std::size_t degenerate = 0;
  if (all.size() > 1) {
    if (!a.field.empty()) throw UsageError("--field applies to a single dataset");
    if (a.test == "kw") {
      std::vector<DataMatrix> groups;
      for (const auto& ds : all) groups.push_back(ds.data());
      auto batch = kw_per_feature(groups, g.threads);
      results = std::move(batch.results);
      degenerate = batch.degenerate;
    } else {
      if (all.size() != 2) throw UsageError("wilcoxon compares exactly two datasets");
      const auto merged = merge_datasets(all);
      std::vector<std::size_t> cols_a(all[0].samples());
      std::vector<std::size_t> cols_b(all[1].samples());
      std::iota(cols_a.begin(), cols_a.end(), std::size_t{0});
      std::iota(cols_b.begin(), cols_b.end(), all[0].samples());
      auto batch = wilcoxon_per_feature(merged.data(), cols_a, cols_b, alt, g.threads);
      results = std::move(batch.results);
      degenerate = batch.degenerate;
    }
  } else {
    if (a.field.empty()) throw UsageError("a single dataset needs --field to define groups");
    const auto& ds = all.front();
    if (!a.keyword.empty()) {
      const auto mode = parse_match_mode(a.mode);
      if (a.test == "wilcoxon") {
        auto batch = wilcoxon_group_vs_rest(ds, a.field, a.keyword, mode, alt, g.threads);
        results = std::move(batch.results);
        degenerate = batch.degenerate;
      } else {
        const auto mask = match_samples(ds, a.field, a.keyword, mode);
        std::vector<std::size_t> in;
        std::vector<std::size_t> rest;
        for (std::size_t c = 0; c < mask.size(); ++c) (mask[c] ? in : rest).push_back(c);
        if (in.empty() || rest.empty()) throw Error(ErrorKind::degenerate, "keyword does not split the samples");
        const std::vector<DataMatrix> groups{ds.data().select_columns(in), ds.data().select_columns(rest)};
        auto batch = kw_per_feature(groups, g.threads);
        results = std::move(batch.results);
        degenerate = batch.degenerate;
      }
    } else {
      if (a.test == "wilcoxon") throw UsageError("wilcoxon on one dataset needs --keyword");
      const auto f = ds.info().find_field(a.field);
      if (!f) throw Error(ErrorKind::invalid_argument, "unknown information field '" + a.field + "'");
      std::map<std::string, std::vector<std::size_t>> by_value;
      for (std::size_t c = 0; c < ds.samples(); ++c) by_value[ds.info()(*f, c)].push_back(c);
      if (by_value.size() < 2) throw Error(ErrorKind::degenerate, "field '" + a.field + "' has a single value");
      std::vector<DataMatrix> groups;
      for (const auto& [value, cols] : by_value) groups.push_back(ds.data().select_columns(cols));
      auto batch = kw_per_feature(groups, g.threads);
      results = std::move(batch.results);
      degenerate = batch.degenerate;
    }
  }

  if (a.fdr == "by") apply_benjamini_yekutieli(results);
  const auto ranked = rank_features(results, parse_rank_by(a.rank_by));

  std::size_t significant = 0;
  const double ln_alpha = std::log(a.alpha);
  for (const auto& r : ranked) {
    const auto& p = a.fdr == "by" ? r.p_adjusted : r.p_raw;
    if (p && p->ln() < ln_alpha) ++significant;
  }

  write_output_or_stdout(a.out, out, [&](std::ostream& os) { write_results_tsv(os, ranked); });
  if (!a.out.empty() && a.out != "-") {
    out << "features\t" << ranked.size() << '\n'
        << "degenerate\t" << degenerate << '\n'
        << "significant\t" << significant << '\n';
  }
  return kOk;
}

struct PcaArgs {
  std::vector<std::string> datasets;
  std::string field;
  std::string features;
  std::size_t top = 0;
  std::string results;
  bool scale = false;
  std::string out_svg;
  std::string out_tsv;
};

int cmd_pca(const PcaArgs& a, std::ostream& out) {
  if (a.features.empty() == (a.top == 0)) throw UsageError("give exactly one of --features or --top");
  if (a.top > 0 && a.results.empty()) throw UsageError("--top needs --results");
  if (a.out_svg.empty() && a.out_tsv.empty()) throw UsageError("give --out-svg and/or --out-tsv");

  const auto all = load_all(a.datasets);
  const Dataset ds = all.size() == 1 ? all.front() : merge_datasets(all);

  std::vector<std::string> features;
  if (!a.features.empty()) {
    features = split_list(a.features);
  } else {
    const auto results = parse_file(a.results, [](std::istream& in) { return read_results_tsv(in); });
    for (const auto& r : results) {
      if (features.size() == a.top) break;
      if (r.p_raw) features.push_back(r.feature);
    }
    if (features.size() < a.top) {
      throw Error(ErrorKind::invalid_argument, "--top " + std::to_string(a.top) + " but the results list only " +
                                                   std::to_string(features.size()) + " testable features");
    }
  }
  std::vector<std::size_t> rows;
  for (const auto& f : features) {
    const auto r = ds.data().find_row(f);
    if (!r) {
      throw Error(ErrorKind::unknown_feature,
                  "unknown feature '" + f + "'; near matches: " + near_matches(ds.data(), f));
    }
    rows.push_back(*r);
  }

  std::vector<std::string> labels(ds.samples());
  if (!a.field.empty()) {
    const auto f = ds.info().find_field(a.field);
    if (!f) throw Error(ErrorKind::invalid_argument, "unknown information field '" + a.field + "'");
    for (std::size_t c = 0; c < ds.samples(); ++c) labels[c] = ds.info()(*f, c);
  } else if (all.size() > 1) {
    std::size_t c = 0;
    for (const auto& part : all) {
      for (std::size_t i = 0; i < part.samples(); ++i) labels[c++] = part.name();
    }
  } else {
    std::fill(labels.begin(), labels.end(), ds.name());
  }

  const auto result = pca(samples_by_features(ds.data(), rows), a.scale);
  const auto points = project_first_plane(result, ds.data().col_names(), labels);

  if (!a.out_tsv.empty()) {
    write_output(a.out_tsv, [&](std::ostream& os) {
      os << "sample\tPC1\tPC2\tlabel\n";
      for (const auto& p : points) {
        os << p.id << '\t' << format_double(p.pc1) << '\t' << format_double(p.pc2) << '\t' << p.label << '\n';
      }
    });
  }
  if (!a.out_svg.empty()) {
    double total = 0.0;
    for (double e : result.eigenvalues) total += e;
    const auto pct = [&](std::size_t k) { return format_fixed(total > 0 ? 100.0 * result.eigenvalues[k] / total : 0.0, 1); };
    PlotSpec spec;
    spec.title = "PCA of " + std::to_string(features.size()) + " features";
    spec.x_label = "PC1 (" + pct(0) + "%)";
    spec.y_label = "PC2 (" + pct(1) + "%)";
    for (const auto& p : points) spec.points.push_back({p.pc1, p.pc2, p.label, {}});
    write_output(a.out_svg, [&](std::ostream& os) { os << render_svg(spec); });
  }
  out << "variables\t" << features.size() << '\n' << "individuals\t" << points.size() << '\n' << "eigenvalues";
  for (double e : result.eigenvalues) out << '\t' << format_double(e);
  out << '\n';
  return kOk;
}

struct FactorArgs {
  std::vector<std::string> datasets;
  bool covariance = false;
  std::string out_svg;
  std::string out_tsv;
};

int cmd_factor_plot(const FactorArgs& a, const Globals& g, std::ostream& out) {
  if (a.out_svg.empty() && a.out_tsv.empty()) throw UsageError("give --out-svg and/or --out-tsv");
  const auto all = load_all(a.datasets);
  const auto symbols = common_rows(std::span<const Dataset>(all));
  Table medians(symbols.size(), all.size());
  std::vector<std::string> names;
  for (std::size_t j = 0; j < all.size(); ++j) {
    const auto med = median_column(restrict_rows(all[j].data(), symbols), g.threads);
    for (std::size_t i = 0; i < symbols.size(); ++i) medians(i, j) = med[i];
    names.push_back(all[j].name());
  }
  const auto coords = factor_plot_medians(medians, names, !a.covariance);

  if (!a.out_tsv.empty()) {
    write_output(a.out_tsv, [&](std::ostream& os) {
      os << "dataset\tC1\tC2\n";
      for (const auto& c : coords) os << c.name << '\t' << format_double(c.c1) << '\t' << format_double(c.c2) << '\n';
    });
  }
  if (!a.out_svg.empty()) {
    PlotSpec spec;
    spec.title = "Median columns of " + std::to_string(all.size()) + " datasets";
    spec.x_label = "C1";
    spec.y_label = "C2";
    spec.unit_circle = !a.covariance;
    for (const auto& c : coords) spec.points.push_back({c.c1, c.c2, "dataset", c.name});
    write_output(a.out_svg, [&](std::ostream& os) { os << render_svg(spec); });
  }
  out << "datasets\t" << all.size() << '\n' << "common_features\t" << symbols.size() << '\n';
  return kOk;
}

struct EnrichArgs {
  std::string results;
  std::string gmt;
  std::string universe;
  double alpha = 0.05;
  std::string out;
};

int cmd_enrich(const EnrichArgs& a, std::ostream& out) {
  const auto results = parse_file(a.results, [](std::istream& in) { return read_results_tsv(in); });
  const auto sets = parse_file(a.gmt, [](std::istream& in) { return parse_gmt(in); });

  std::set<std::string> universe;
  if (a.universe.empty()) {
    for (const auto& r : results) universe.insert(r.feature);
  } else {
    std::ifstream in(a.universe);
    if (!in) throw Error(ErrorKind::io, "cannot open " + a.universe);
    std::string line;
    while (std::getline(in, line)) {
      const auto s = trim(chomp_cr(line));
      if (!s.empty()) universe.emplace(s);
    }
  }
  if (universe.empty()) throw Error(ErrorKind::empty_universe, "enrichment universe is empty");

  const double ln_alpha = std::log(a.alpha);
  std::set<std::string> selected;
  for (const auto& r : results) {
    const auto& p = r.p_adjusted ? r.p_adjusted : r.p_raw;
    if (p && p->ln() < ln_alpha && universe.contains(r.feature)) selected.insert(r.feature);
  }

  struct Row {
    std::string name;
    std::int64_t reference = 0;
    std::int64_t overlap = 0;
    LogP p;
  };
  std::vector<Row> rows;
  std::vector<LogP> raw;
  const auto n = static_cast<std::int64_t>(universe.size());
  const auto n_sel = static_cast<std::int64_t>(selected.size());
  for (const auto& gs : sets) {
    Row row;
    row.name = gs.name;
    for (const auto& s : gs.symbols) {
      if (!universe.contains(s)) continue;
      ++row.reference;
      if (selected.contains(s)) ++row.overlap;
    }
    row.p = fisher_enrichment(n, n_sel, row.reference, row.overlap);
    raw.push_back(row.p);
    rows.push_back(std::move(row));
  }
  const auto adjusted = benjamini_yekutieli(raw);

  write_output_or_stdout(a.out, out, [&](std::ostream& os) {
    os << "geneset\tuniverse\tselected\treference\toverlap\tp\tlog10_p\tp_adj\tlog10_p_adj\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      os << r.name << '\t' << n << '\t' << n_sel << '\t' << r.reference << '\t' << r.overlap << '\t'
         << format_p(r.p) << '\t' << format_log10_p(r.p) << '\t' << format_p(adjusted[i]) << '\t'
         << format_log10_p(adjusted[i]) << '\n';
    }
  });
  return kOk;
}

struct SplitHetArgs {
  std::string dataset;
  std::string feature;
  std::string method = "pearson";
};

int cmd_split_het(const SplitHetArgs& a, std::ostream& out) {
  const auto ds = load_dataset(a.dataset);
  if (!ds.data().find_row(a.feature)) {
    throw Error(ErrorKind::unknown_feature,
                "unknown feature '" + a.feature + "'; near matches: " + near_matches(ds.data(), a.feature));
  }
  const auto res = heterogeneity_split(ds, a.feature, parse_correlation_method(a.method));
  out << "correlation\t" << format_double(res.correlation) << '\n'
      << "non_negative\t" << res.non_negative << '\n'
      << "negative\t" << res.negative << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rank-based merging and robust testing of gene-expression datasets", "rankmerge"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Seed for randomized operations");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");
  app.add_option("--config", g.config, "JSON file of default flags");

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Parse, annotate and reduce a series-matrix file");
  c_ingest->add_option("series", ingest.series, "Series-matrix file")->required();
  c_ingest->add_option("annotation", ingest.annotation, "Probe annotation TSV")->required();
  c_ingest->add_option("--out", ingest.out, "Output dataset directory")->required();
  c_ingest->add_option("--name", ingest.name, "Dataset name (default: file stem)");
  c_ingest->add_option("--multi-policy", ingest.multi_policy, "first|drop")->check(CLI::IsMember({"first", "drop"}));

  ScoreArgs score;
  auto* c_score = app.add_subcommand("score", "Replace every column by ECDF or van der Waerden scores");
  c_score->add_option("dataset", score.dataset)->required();
  c_score->add_option("--kind", score.kind, "ecdf|vdw")->check(CLI::IsMember({"ecdf", "vdw"}));
  c_score->add_option("--out", score.out)->required();

  MergeArgs merge;
  auto* c_merge = app.add_subcommand("merge", "Merge datasets on their common features");
  c_merge->add_option("datasets", merge.datasets)->required();
  c_merge->add_option("--out", merge.out)->required();
  c_merge->add_option("--name", merge.name);

  SelectArgs select;
  auto* c_select = app.add_subcommand("select", "Keep (or drop) samples by metadata keyword");
  c_select->add_option("dataset", select.dataset)->required();
  c_select->add_option("--field", select.field)->required();
  c_select->add_option("--keyword", select.keyword)->required();
  c_select->add_option("--mode", select.mode, "exact|substring")->check(CLI::IsMember({"exact", "substring"}));
  c_select->add_flag("--exclude", select.exclude, "Drop matching samples instead of keeping them");
  c_select->add_option("--out", select.out)->required();

  PartitionArgs partition;
  auto* c_partition = app.add_subcommand("partition", "Seeded random partition of the samples");
  c_partition->add_option("dataset", partition.dataset)->required();
  c_partition->add_option("--sizes", partition.sizes, "Comma-separated part sizes")->required();
  c_partition->add_option("--out-prefix", partition.out_prefix)->required();

  MedianCorArgs median_cor;
  auto* c_median = app.add_subcommand("median-cor", "Correlations between per-dataset median columns");
  c_median->add_option("datasets", median_cor.datasets)->required();
  c_median->add_option("--method", median_cor.method)->check(CLI::IsMember({"pearson", "spearman"}));
  c_median->add_option("--alpha", median_cor.alpha);
  c_median->add_option("--out", median_cor.out);

  PairwiseArgs pairwise;
  auto* c_pairwise = app.add_subcommand("pairwise", "Stream every pairwise row correlation");
  c_pairwise->add_option("dataset", pairwise.dataset)->required();
  c_pairwise->add_option("--method", pairwise.method)->check(CLI::IsMember({"pearson", "spearman"}));
  c_pairwise->add_option("--out", pairwise.out)->required();
  c_pairwise->add_option("--chunk-rows", pairwise.chunk_rows);

  TestArgs test;
  auto* c_test = app.add_subcommand("test", "Per-feature Kruskal-Wallis or one-sided Wilcoxon tests");
  c_test->add_option("datasets", test.datasets)->required();
  c_test->add_option("--test", test.test, "kw|wilcoxon");
  c_test->add_option("--alternative", test.alternative, "greater|less (first group vs second)");
  c_test->add_option("--field", test.field);
  c_test->add_option("--keyword", test.keyword);
  c_test->add_option("--mode", test.mode)->check(CLI::IsMember({"exact", "substring"}));
  c_test->add_option("--fdr", test.fdr, "by|none");
  c_test->add_option("--rank-by", test.rank_by)->check(CLI::IsMember({"p", "statistic"}));
  c_test->add_option("--alpha", test.alpha);
  c_test->add_option("--out", test.out);

  PcaArgs pca_args;
  auto* c_pca = app.add_subcommand("pca", "PCA of selected features, samples on the first plane");
  c_pca->add_option("datasets", pca_args.datasets)->required();
  c_pca->add_option("--field", pca_args.field, "Colour samples by this information field");
  c_pca->add_option("--features", pca_args.features, "Comma-separated symbols");
  c_pca->add_option("--top", pca_args.top, "Use the first N testable features of --results");
  c_pca->add_option("--results", pca_args.results);
  c_pca->add_flag("--scale", pca_args.scale);
  c_pca->add_option("--out-svg", pca_args.out_svg);
  c_pca->add_option("--out-tsv", pca_args.out_tsv);

  FactorArgs factor;
  auto* c_factor = app.add_subcommand("factor-plot", "Median columns as variables on the first plane");
  c_factor->add_option("datasets", factor.datasets)->required();
  c_factor->add_flag("--covariance", factor.covariance, "Use covariance instead of correlation");
  c_factor->add_option("--out-svg", factor.out_svg);
  c_factor->add_option("--out-tsv", factor.out_tsv);

  EnrichArgs enrich;
  auto* c_enrich = app.add_subcommand("enrich", "Hypergeometric enrichment of significant features");
  c_enrich->add_option("results", enrich.results)->required();
  c_enrich->add_option("genesets", enrich.gmt, "GMT file")->required();
  c_enrich->add_option("--universe", enrich.universe, "File of universe symbols (default: all tested)");
  c_enrich->add_option("--alpha", enrich.alpha);
  c_enrich->add_option("--out", enrich.out);

  SplitHetArgs split_het;
  auto* c_split = app.add_subcommand("split-het", "Correlate medians of samples split by one feature's sign");
  c_split->add_option("dataset", split_het.dataset)->required();
  c_split->add_option("--feature", split_het.feature)->required();
  c_split->add_option("--method", split_het.method)->check(CLI::IsMember({"pearson", "spearman"}));

  std::set<std::string> commands;
  for (const auto* sub : app.get_subcommands({})) commands.insert(sub->get_name());

  try {
    auto args = apply_config(raw_args, commands);
    std::vector<const char*> argv;
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kOk : kUsage;
    }

    if (c_ingest->parsed()) return cmd_ingest(ingest, g, out);
    if (c_score->parsed()) return cmd_score(score, g, out);
    if (c_merge->parsed()) return cmd_merge(merge, out);
    if (c_select->parsed()) return cmd_select(select, out);
    if (c_partition->parsed()) return cmd_partition(partition, g, out);
    if (c_median->parsed()) return cmd_median_cor(median_cor, g, out);
    if (c_pairwise->parsed()) return cmd_pairwise(pairwise, g, out);
    if (c_test->parsed()) return cmd_test(test, g, out);
    if (c_pca->parsed()) return cmd_pca(pca_args, out);
    if (c_factor->parsed()) return cmd_factor_plot(factor, g, out);
    if (c_enrich->parsed()) return cmd_enrich(enrich, out);
    if (c_split->parsed()) return cmd_split_het(split_het, out);
    err << app.help();
    return kUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  }
}

}  // namespace rankmerge::cli

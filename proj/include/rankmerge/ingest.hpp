#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rankmerge/matrix.hpp"

namespace rankmerge {

/// One '!'-prefixed line of a series-matrix file: key (without '!') and its values.
struct MetadataLine {
  std::string key;
  std::vector<std::string> values;

  friend bool operator==(const MetadataLine&, const MetadataLine&) = default;
};

/// Parsed GEO series-matrix file.
struct SeriesMatrixDocument {
  std::vector<MetadataLine> metadata;
  std::vector<std::string> probe_ids;
  std::vector<std::string> sample_ids;
  /// probes x samples, row-major; missing cells are NaN.
  std::vector<double> values;

  std::size_t probes() const noexcept { return probe_ids.size(); }
  std::size_t samples() const noexcept { return sample_ids.size(); }
  double value(std::size_t probe, std::size_t sample) const { return values[probe * samples() + sample]; }

  friend bool operator==(const SeriesMatrixDocument& a, const SeriesMatrixDocument& b);
};

inline constexpr std::string_view kTableBegin = "!series_matrix_table_begin";
inline constexpr std::string_view kTableEnd = "!series_matrix_table_end";

/// Throws ParseError (with 1-based line number) on missing sentinels, a missing
/// "ID_REF" header, ragged rows, duplicate samples or probes, or non-numeric cells.
SeriesMatrixDocument parse_series_matrix(std::istream& in);

/// Canonical text form; parse(serialize(doc)) == doc.
void serialize_series_matrix(std::ostream& out, const SeriesMatrixDocument& doc);

/// Probe id -> gene symbols (possibly none).
struct AnnotationTable {
  std::unordered_map<std::string, std::vector<std::string>> probe_to_symbols;
};

/// Two-column TSV (probe, symbols separated by " /// "); an "ID\tSymbol" header
/// line is detected and skipped. Throws ParseError on duplicate probe ids.
AnnotationTable parse_annotation(std::istream& in);

enum class MultiSymbolPolicy { first, drop };
MultiSymbolPolicy parse_multi_policy(std::string_view text);

struct AnnotatedMatrix {
  DataMatrix raw;  ///< rows labelled by symbol, duplicates possible
  InfoMatrix info;
  std::size_t unmapped_probes = 0;      ///< absent from the table or mapped to no symbol
  std::size_t multi_symbol_dropped = 0; ///< discarded under MultiSymbolPolicy::drop
};

/// Relabels probe rows by gene symbol and builds the information matrix from
/// metadata lines with one value per sample. Throws Error(annotation) if no
/// probe maps to a symbol.
AnnotatedMatrix annotate(const SeriesMatrixDocument& doc, const AnnotationTable& ann,
                         MultiSymbolPolicy policy = MultiSymbolPolicy::first);

inline constexpr int kDatasetFormatVersion = 1;

/// Writes data.tsv, info.tsv and manifest.json into dir (created if needed).
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);

/// Throws Error(format) on a manifest version mismatch or malformed tables.
Dataset load_dataset(const std::filesystem::path& dir);

/// Data TSV: header "symbol<TAB>sample...", then one row per feature; "NA" for missing.
void write_data_tsv(std::ostream& out, const DataMatrix& m);
DataMatrix read_data_tsv(std::istream& in);

/// Info TSV: header "field<TAB>sample...", then one row per field.
void write_info_tsv(std::ostream& out, const InfoMatrix& info);
InfoMatrix read_info_tsv(std::istream& in);

}  // namespace rankmerge

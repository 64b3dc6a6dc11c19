#include "rankmerge/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "json.hpp"

#include "rankmerge/error.hpp"
#include "rankmerge/text.hpp"

namespace rankmerge {

const char* to_string(ParseErrorCode code) {
  switch (code) {
    case ParseErrorCode::missing_table_begin: return "missing table begin sentinel";
    case ParseErrorCode::missing_table_end: return "missing table end sentinel";
    case ParseErrorCode::missing_header: return "missing header";
    case ParseErrorCode::ragged_row: return "ragged row";
    case ParseErrorCode::duplicate_sample: return "duplicate sample";
    case ParseErrorCode::duplicate_probe: return "duplicate probe";
    case ParseErrorCode::bad_number: return "bad number";
  }
  return "parse error";
}

bool operator==(const SeriesMatrixDocument& a, const SeriesMatrixDocument& b) {
  if (a.metadata != b.metadata || a.probe_ids != b.probe_ids || a.sample_ids != b.sample_ids) return false;
  return std::equal(a.values.begin(), a.values.end(), b.values.begin(), b.values.end(),
                    [](double x, double y) { return x == y || (is_missing(x) && is_missing(y)); });
}

// ---------------------------------------------------------------------------
// Series matrix

namespace {

MetadataLine parse_metadata_line(std::string_view line) {
  const auto cells = split(line, '\t');
  MetadataLine md;
  md.key = std::string(cells[0].substr(1));
  for (std::size_t i = 1; i < cells.size(); ++i) md.values.emplace_back(unquote(cells[i]));
  return md;
}

}  // namespace

SeriesMatrixDocument parse_series_matrix(std::istream& in) {
  enum class State { preamble, header, table, after };
  State state = State::preamble;
  SeriesMatrixDocument doc;
  std::unordered_set<std::string> probes_seen;

  std::string buffer;
  std::size_t line_no = 0;
  while (std::getline(in, buffer)) {
    ++line_no;
    const std::string_view line = chomp_cr(buffer);
    if (trim(line).empty()) continue;

    switch (state) {
      case State::preamble:
      case State::after:
        if (line.starts_with(kTableBegin)) {
          if (state == State::after) {
            throw ParseError(ParseErrorCode::missing_table_end, line_no, "second table begins after the first ended");
          }
          state = State::header;
        } else if (line.starts_with(kTableEnd)) {
          throw ParseError(ParseErrorCode::missing_table_begin, line_no, "table end without a table begin");
        } else if (line.front() == '!') {
          doc.metadata.push_back(parse_metadata_line(line));
        }
        break;

      case State::header: {
        const auto cells = split(line, '\t');
        if (unquote(trim(cells[0])) != "ID_REF") {
          throw ParseError(ParseErrorCode::missing_header, line_no, "expected \"ID_REF\" header after table begin");
        }
        std::unordered_set<std::string> seen;
        for (std::size_t i = 1; i < cells.size(); ++i) {
          std::string id(unquote(trim(cells[i])));
          if (!seen.insert(id).second) {
            throw ParseError(ParseErrorCode::duplicate_sample, line_no, "sample '" + id + "' appears twice");
          }
          doc.sample_ids.push_back(std::move(id));
        }
        state = State::table;
        break;
      }

      case State::table: {
        if (line.starts_with(kTableEnd)) {
          state = State::after;
          break;
        }
        const auto cells = split(line, '\t');
        if (cells.size() != doc.samples() + 1) {
          throw ParseError(ParseErrorCode::ragged_row, line_no,
                           "expected " + std::to_string(doc.samples()) + " values, found " +
                               std::to_string(cells.size() - 1));
        }
        std::string probe(unquote(trim(cells[0])));
        if (!probes_seen.insert(probe).second) {
          throw ParseError(ParseErrorCode::duplicate_probe, line_no, "probe '" + probe + "' appears twice");
        }
        for (std::size_t i = 1; i < cells.size(); ++i) {
          const auto v = parse_cell(unquote(trim(cells[i])));
          if (!v) {
            throw ParseError(ParseErrorCode::bad_number, line_no,
                             "cell " + std::to_string(i + 1) + " is not a number: '" + std::string(cells[i]) + "'");
          }
          doc.values.push_back(*v);
        }
        doc.probe_ids.push_back(std::move(probe));
        break;
      }
    }
  }

  if (state == State::preamble) {
    throw ParseError(ParseErrorCode::missing_table_begin, line_no + 1, "no \"" + std::string(kTableBegin) + "\" line");
  }
  if (state == State::header) {
    throw ParseError(ParseErrorCode::missing_header, line_no + 1, "table begins but has no header");
  }
  if (state == State::table) {
    throw ParseError(ParseErrorCode::missing_table_end, line_no + 1, "no \"" + std::string(kTableEnd) + "\" line");
  }
  return doc;
}

void serialize_series_matrix(std::ostream& out, const SeriesMatrixDocument& doc) {
  for (const auto& md : doc.metadata) {
    out << '!' << md.key;
    for (const auto& v : md.values) out << "\t\"" << v << '"';
    out << '\n';
  }
  out << kTableBegin << '\n';
  out << "\"ID_REF\"";
  for (const auto& s : doc.sample_ids) out << "\t\"" << s << '"';
  out << '\n';
  for (std::size_t p = 0; p < doc.probes(); ++p) {
    out << '"' << doc.probe_ids[p] << '"';
    for (std::size_t s = 0; s < doc.samples(); ++s) {
      const double v = doc.value(p, s);
      out << '\t' << (is_missing(v) ? std::string("null") : format_double(v));
    }
    out << '\n';
  }
  out << kTableEnd << '\n';
}

// ---------------------------------------------------------------------------
// Annotation

AnnotationTable parse_annotation(std::istream& in) {
  AnnotationTable table;
  std::string buffer;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, buffer)) {
    ++line_no;
    const std::string_view line = chomp_cr(buffer);
    if (trim(line).empty()) continue;
    const auto cells = split(line, '\t');
    const std::string probe(unquote(trim(cells[0])));
    if (first) {
      first = false;
      if (iequals(probe, "ID")) continue;
    }
    std::vector<std::string> symbols;
    if (cells.size() > 1) {
      for (auto part : split(unquote(trim(cells[1])), "///")) {
        part = trim(part);
        if (!part.empty()) symbols.emplace_back(part);
      }
    }
    if (!table.probe_to_symbols.emplace(probe, std::move(symbols)).second) {
      throw ParseError(ParseErrorCode::duplicate_probe, line_no, "probe '" + probe + "' annotated twice");
    }
  }
  return table;
}

MultiSymbolPolicy parse_multi_policy(std::string_view text) {
  if (text == "first") return MultiSymbolPolicy::first;
  if (text == "drop") return MultiSymbolPolicy::drop;
  throw Error(ErrorKind::invalid_argument, "unknown multi-symbol policy: " + std::string(text));
}

AnnotatedMatrix annotate(const SeriesMatrixDocument& doc, const AnnotationTable& ann, MultiSymbolPolicy policy) {
  AnnotatedMatrix out;
  std::vector<std::string> rows;
  std::vector<double> values;
  for (std::size_t p = 0; p < doc.probes(); ++p) {
    const auto it = ann.probe_to_symbols.find(doc.probe_ids[p]);
    if (it == ann.probe_to_symbols.end() || it->second.empty()) {
      ++out.unmapped_probes;
      continue;
    }
    if (it->second.size() > 1 && policy == MultiSymbolPolicy::drop) {
      ++out.multi_symbol_dropped;
      continue;
    }
    rows.push_back(it->second.front());
    const auto begin = doc.values.begin() + static_cast<std::ptrdiff_t>(p * doc.samples());
    values.insert(values.end(), begin, begin + static_cast<std::ptrdiff_t>(doc.samples()));
  }
  if (rows.empty()) throw Error(ErrorKind::annotation, "no probe could be mapped to a gene symbol");
  out.raw = DataMatrix(std::move(rows), doc.sample_ids, std::move(values));

  // Per-sample metadata keys become fields; repeated keys get a numeric suffix.
  std::vector<std::string> fields;
  std::vector<std::string> cells;
  std::unordered_map<std::string, std::size_t> key_count;
  for (const auto& md : doc.metadata) {
    if (md.values.size() != doc.samples() || doc.samples() == 0) continue;
    const std::size_t n = ++key_count[md.key];
    fields.push_back(n == 1 ? md.key : md.key + "." + std::to_string(n));
    cells.insert(cells.end(), md.values.begin(), md.values.end());
  }
  out.info = InfoMatrix(std::move(fields), doc.sample_ids, std::move(cells));
  return out;
}

// ---------------------------------------------------------------------------
// Dataset persistence

namespace {

void check_cell_text(std::string_view cell, std::string_view what) {
  if (cell.find_first_of("\t\n\r") != std::string_view::npos) {
    throw Error(ErrorKind::format, std::string(what) + " contains a tab or newline: '" + std::string(cell) + "'");
  }
}

void write_header(std::ostream& out, std::string_view first, const std::vector<std::string>& cols) {
  out << first;
  for (const auto& c : cols) {
    check_cell_text(c, "column name");
    out << '\t' << c;
  }
  out << '\n';
}

struct RawTable {
  std::vector<std::string> cols;
  std::vector<std::string> row_names;
  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> line_numbers;
};

RawTable read_table(std::istream& in, std::string_view what, std::string_view first_header) {
  RawTable t;
  std::string buffer;
  std::size_t line_no = 1;
  if (!std::getline(in, buffer)) throw Error(ErrorKind::format, std::string(what) + ": empty file");
  auto header = split(chomp_cr(buffer), '\t');
  if (header.front() != first_header) {
    throw Error(ErrorKind::format, std::string(what) + " line 1: header must start with '" +
                                       std::string(first_header) + "'");
  }
  for (std::size_t i = 1; i < header.size(); ++i) t.cols.emplace_back(header[i]);
  while (std::getline(in, buffer)) {
    ++line_no;
    const auto line = chomp_cr(buffer);
    if (line.empty()) continue;
    const auto cells = split(line, '\t');
    if (cells.size() != t.cols.size() + 1) {
      throw Error(ErrorKind::format, std::string(what) + " line " + std::to_string(line_no) + ": expected " +
                                         std::to_string(t.cols.size() + 1) + " cells, found " +
                                         std::to_string(cells.size()));
    }
    t.row_names.emplace_back(cells[0]);
    t.cells.emplace_back(cells.begin() + 1, cells.end());
    t.line_numbers.push_back(line_no);
  }
  return t;
}

template <class Fn>
void write_file(const std::filesystem::path& path, Fn&& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  body(out);
  out.flush();
  if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return in;
}

}  // namespace

void write_data_tsv(std::ostream& out, const DataMatrix& m) {
  write_header(out, "symbol", m.col_names());
  std::string line;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    check_cell_text(m.row_names()[r], "row name");
    line = m.row_names()[r];
    for (double v : m.row(r)) {
      line += '\t';
      line += format_double(v);
    }
    line += '\n';
    out << line;
  }
}

DataMatrix read_data_tsv(std::istream& in) {
  auto t = read_table(in, "data.tsv", "symbol");
  std::vector<double> values;
  values.reserve(t.row_names.size() * t.cols.size());
  for (std::size_t r = 0; r < t.cells.size(); ++r) {
    for (const auto& cell : t.cells[r]) {
      const auto v = parse_cell(cell);
      if (!v) {
        throw Error(ErrorKind::format, "data.tsv line " + std::to_string(t.line_numbers[r]) + ": bad number '" +
                                           cell + "'");
      }
      values.push_back(*v);
    }
  }
  return DataMatrix(std::move(t.row_names), std::move(t.cols), std::move(values));
}

void write_info_tsv(std::ostream& out, const InfoMatrix& info) {
  write_header(out, "field", info.col_names());
  for (std::size_t f = 0; f < info.fields(); ++f) {
    check_cell_text(info.field_names()[f], "field name");
    out << info.field_names()[f];
    for (std::size_t c = 0; c < info.cols(); ++c) {
      check_cell_text(info(f, c), "information cell");
      out << '\t' << info(f, c);
    }
    out << '\n';
  }
}

InfoMatrix read_info_tsv(std::istream& in) {
  auto t = read_table(in, "info.tsv", "field");
  std::vector<std::string> cells;
  cells.reserve(t.row_names.size() * t.cols.size());
  for (auto& row : t.cells) {
    for (auto& cell : row) cells.push_back(std::move(cell));
  }
  return InfoMatrix(std::move(t.row_names), std::move(t.cols), std::move(cells));
}

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  // Assemble under "<dir>.partial" and rename once complete, so a failure never
  // leaves a truncated dataset under the final name.
  fs::path staging = dir;
  staging += ".partial";
  std::error_code ec;
  fs::remove_all(staging, ec);
  fs::create_directories(staging, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + staging.string() + ": " + ec.message());

  write_file(staging / "data.tsv", [&](std::ostream& out) { write_data_tsv(out, ds.data()); });
  write_file(staging / "info.tsv", [&](std::ostream& out) { write_info_tsv(out, ds.info()); });

  nlohmann::ordered_json manifest;
  manifest["name"] = ds.name();
  manifest["version"] = kDatasetFormatVersion;
  manifest["score"] = to_string(ds.meta().score);
  manifest["source"] = ds.meta().source;
  if (ds.meta().seed) {
    manifest["seed"] = *ds.meta().seed;
  } else {
    manifest["seed"] = nullptr;
  }
  write_file(staging / "manifest.json", [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });

  fs::remove_all(dir, ec);
  fs::rename(staging, dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot move dataset into " + dir.string() + ": " + ec.message());
}

Dataset load_dataset(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  {
    auto in = open_input(dir / "manifest.json");
    try {
      in >> manifest;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::format, dir.string() + "/manifest.json: " + e.what());
    }
  }

  DatasetMeta meta;
  std::string name;
  try {
    const int version = manifest.at("version").get<int>();
    if (version != kDatasetFormatVersion) {
      throw Error(ErrorKind::format, dir.string() + ": unsupported dataset version " + std::to_string(version) +
                                         " (expected " + std::to_string(kDatasetFormatVersion) + ")");
    }
    name = manifest.at("name").get<std::string>();
    meta.score = parse_score_kind(manifest.at("score").get<std::string>());
    meta.source = manifest.value("source", std::string());
    if (manifest.contains("seed") && !manifest["seed"].is_null()) meta.seed = manifest["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, dir.string() + "/manifest.json: " + e.what());
  }

  auto data_in = open_input(dir / "data.tsv");
  auto info_in = open_input(dir / "info.tsv");
  auto data = read_data_tsv(data_in);
  auto info = read_info_tsv(info_in);
  try {
    return Dataset(std::move(data), std::move(info), std::move(name), std::move(meta));
  } catch (const Error& e) {
    throw Error(ErrorKind::format, dir.string() + ": " + e.what());
  }
}

}  // namespace rankmerge

#pragma once

/**
 * @file io.hpp
 * @brief Model files (JSON), CSV datasets and translation specs.
 *
 * Model file:
 *
 *     {
 *       "format_version": 1,
 *       "input_dim": 1,
 *       "output_dim": 1,
 *       "shape_tag": "TypeII",
 *       "layers": [
 *         {"kind": "linear", "rows": 2, "cols": 1, "entries": [1, -1]},
 *         {"kind": "minplus", "rows": 1, "cols": 2, "entries": [0, "inf"]},
 *         ...
 *       ]
 *     }
 *
 * Entries are row-major; infinities are the strings "inf" and "-inf".
 * serialize_model() output is the canonical form: parsing it and serializing
 * again reproduces the same bytes.
 */

#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mmpnn/error.hpp"
#include "mmpnn/matrix.hpp"
#include "mmpnn/network.hpp"
#include "mmpnn/training.hpp"
#include "mmpnn/translate.hpp"
#include "mmpnn/tropical.hpp"

namespace mmpnn {

inline constexpr int kModelFormatVersion = 1;

inline std::string serialize_model(const Network& net) {
  std::string s;
  s += "{\n";
  s += "  \"format_version\": " + std::to_string(kModelFormatVersion) + ",\n";
  s += "  \"input_dim\": " + std::to_string(net.input_dim()) + ",\n";
  s += "  \"output_dim\": " + std::to_string(net.output_dim()) + ",\n";
  s += "  \"shape_tag\": \"" + std::string(to_string(net.shape_tag())) + "\",\n";
  s += "  \"layers\": [\n";
  for (std::size_t k = 0; k < net.size(); ++k) {
    const Layer& l = net.layer(k);
    s += "    {\"kind\": \"" + std::string(to_string(l.kind())) + "\", \"rows\": " +
         std::to_string(l.out_dim()) + ", \"cols\": " + std::to_string(l.in_dim()) +
         ", \"entries\": [";
    auto e = l.entries();
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (i) s += ", ";
      s += std::isfinite(e[i]) ? format_scalar(e[i]) : "\"" + format_scalar(e[i]) + "\"";
    }
    s += "]}";
    s += k + 1 < net.size() ? ",\n" : "\n";
  }
  s += "  ]\n}\n";
  return s;
}

namespace detail {

using json = nlohmann::json;

inline const json& member(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    fail(ErrorCode::ParseError, where + ": missing \"" + key + "\"");
  }
  return obj.at(key);
}

inline std::size_t count_field(const json& obj, const char* key, const std::string& where) {
  const json& v = member(obj, key, where);
  if (!v.is_number_unsigned()) {
    fail(ErrorCode::ParseError, where + "." + key + ": expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

inline double json_scalar(const json& v, const std::string& where) {
  if (v.is_number()) {
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(ErrorCode::ParseError, where + ": number out of range");
    return d;
  }
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s == "inf" || s == "-inf") return parse_scalar(s).value();
  }
  fail(ErrorCode::ParseError, where + ": expected a number, \"inf\" or \"-inf\"");
}

inline Layer parse_layer(const json& j, const std::string& where) {
  const std::string kind = [&] {
    const json& k = member(j, "kind", where);
    if (!k.is_string()) fail(ErrorCode::ParseError, where + ".kind: expected a string");
    return k.get<std::string>();
  }();
  const std::size_t rows = count_field(j, "rows", where);
  const std::size_t cols = count_field(j, "cols", where);
  const json& entries = member(j, "entries", where);
  if (!entries.is_array() || entries.size() != rows * cols) {
    fail(ErrorCode::ParseError, where + ".entries: expected " + std::to_string(rows * cols) +
                                    " values for a " + shape_str(rows, cols) + " matrix");
  }
  std::vector<double> e;
  e.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    e.push_back(json_scalar(entries[i], where + ".entries[" + std::to_string(i) + "]"));
  }
  try {
    if (kind == "linear") return RealMatrix(rows, cols, std::move(e));
    if (kind == "minplus") return MinPlusMatrix(rows, cols, std::move(e));
    if (kind == "maxplus") return MaxPlusMatrix(rows, cols, std::move(e));
  } catch (const Error& err) {
    fail(ErrorCode::ParseError, where + ": " + err.what());
  }
  fail(ErrorCode::ParseError, where + ".kind: unknown layer kind \"" + kind + "\"");
}

}  // namespace detail

// `origin` names the source in error messages.
inline Network parse_model(std::string_view text, const std::string& origin = "model") {
  detail::json j;
  try {
    j = detail::json::parse(text.begin(), text.end());
  } catch (const detail::json::parse_error& e) {
    fail(ErrorCode::ParseError, origin + ": " + e.what());
  }
  const int version = [&] {
    const auto& v = detail::member(j, "format_version", origin);
    if (!v.is_number_integer()) fail(ErrorCode::ParseError, origin + ".format_version: expected 1");
    return v.get<int>();
  }();
  if (version != kModelFormatVersion) {
    fail(ErrorCode::ParseError, origin + ".format_version: unsupported version " +
                                    std::to_string(version));
  }
  const std::size_t d = detail::count_field(j, "input_dim", origin);
  const std::size_t p = detail::count_field(j, "output_dim", origin);
  const auto& tag_json = detail::member(j, "shape_tag", origin);
  auto tag = tag_json.is_string() ? shape_tag_from_string(tag_json.get<std::string>()) : std::nullopt;
  if (!tag) fail(ErrorCode::ParseError, origin + ".shape_tag: unknown shape tag");
  const auto& layers_json = detail::member(j, "layers", origin);
  if (!layers_json.is_array() || layers_json.empty()) {
    fail(ErrorCode::ParseError, origin + ".layers: expected a non-empty array");
  }
  std::vector<Layer> layers;
  for (std::size_t k = 0; k < layers_json.size(); ++k) {
    layers.push_back(detail::parse_layer(layers_json[k], origin + ".layers[" + std::to_string(k) + "]"));
  }
  Network net = [&] {
    try {
      return Network(std::move(layers), *tag);
    } catch (const Error& e) {
      fail(ErrorCode::ShapeMismatch, origin + ": " + e.what());
    }
  }();
  if (net.input_dim() != d || net.output_dim() != p) {
    fail(ErrorCode::ShapeMismatch, origin + ": declared dimensions " + std::to_string(d) + "->" +
                                       std::to_string(p) + " disagree with the layers (" +
                                       std::to_string(net.input_dim()) + "->" +
                                       std::to_string(net.output_dim()) + ")");
  }
  return net;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ParseError, path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::ParseError, path + ": cannot open file for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::ParseError, path + ": write failed");
}

inline Network load_model(const std::string& path) { return parse_model(read_file(path), path); }

inline void save_model(const std::string& path, const Network& net) {
  write_file(path, serialize_model(net));
}

// ---------------------------------------------------------------------------
// CSV: comma separated, '.' decimal point, mandatory header.

struct CsvTable {
  std::vector<std::string> header;
  std::vector<Vector> rows;
};

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

inline CsvTable parse_csv(std::string_view text, const std::string& origin = "csv") {
  CsvTable t;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = detail::trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    auto cells = detail::split_commas(line);
    if (t.header.empty()) {
      for (auto c : cells) t.header.emplace_back(detail::trim(c));
      continue;
    }
    if (cells.size() != t.header.size()) {
      fail(ErrorCode::ParseError, origin + ":" + std::to_string(line_no) + ": expected " +
                                      std::to_string(t.header.size()) + " columns, got " +
                                      std::to_string(cells.size()));
    }
    Vector row;
    row.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto cell = detail::trim(cells[c]);
      double v = 0.0;
      try {
        v = parse_scalar(cell).value();
      } catch (const Error&) {
        v = kInf;
      }
      if (!std::isfinite(v)) {
        fail(ErrorCode::ParseError, origin + ":" + std::to_string(line_no) + ": column " +
                                        std::to_string(c + 1) + " is not a finite number: '" +
                                        std::string(cell) + "'");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) fail(ErrorCode::ParseError, origin + ": missing header");
  if (t.rows.empty()) fail(ErrorCode::ParseError, origin + ": no data rows");
  return t;
}

/// Splits a CSV with header x1..xd,y1..yp into a dataset. Column names must
/// be exactly that sequence.
inline Dataset dataset_from_csv(const CsvTable& t, const std::string& origin = "csv") {
  std::size_t d = 0;
  while (d < t.header.size() && t.header[d] == "x" + std::to_string(d + 1)) ++d;
  std::size_t p = 0;
  while (d + p < t.header.size() && t.header[d + p] == "y" + std::to_string(p + 1)) ++p;
  if (d == 0 || d + p != t.header.size()) {
    fail(ErrorCode::ParseError, origin + ":1: header must be x1,...,xd,y1,...,yp");
  }
  Dataset ds;
  for (const auto& r : t.rows) {
    ds.inputs.emplace_back(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(d));
    ds.targets.emplace_back(r.begin() + static_cast<std::ptrdiff_t>(d), r.end());
  }
  return ds;
}

inline Dataset load_dataset(const std::string& path) {
  return dataset_from_csv(parse_csv(read_file(path), path), path);
}

inline std::string dataset_to_csv(const Dataset& ds) {
  std::string s;
  for (std::size_t i = 0; i < ds.input_dim(); ++i) s += (i ? ",x" : "x") + std::to_string(i + 1);
  for (std::size_t i = 0; i < ds.output_dim(); ++i) s += ",y" + std::to_string(i + 1);
  s += "\n";
  for (std::size_t r = 0; r < ds.size(); ++r) {
    std::string line;
    for (double v : ds.inputs[r]) line += (line.empty() ? "" : ",") + format_scalar(v);
    for (double v : ds.targets[r]) line += "," + format_scalar(v);
    s += line + "\n";
  }
  return s;
}

// ---------------------------------------------------------------------------
// Translation specs (JSON):
//   maxout  {"units": [{"weights": [[...], ...], "bias": [...]}, ...]}
//   relu    {"weights": [[...], ...], "bias": [...]}
//   leaky   {"weights": [[...], ...], "bias": [...], "slope": 0.1}
//   lse     {"weights": [[...], ...], "bias": [...]}   rows a_i, offsets b_i

namespace detail {

inline RealMatrix json_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(ErrorCode::ParseError, where + ": expected a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  std::vector<double> e;
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols || cols == 0) {
      fail(ErrorCode::ParseError, where + "[" + std::to_string(r) + "]: ragged or empty row");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& v = j[r][c];
      if (!v.is_number()) fail(ErrorCode::ParseError, where + ": entries must be numbers");
      e.push_back(v.get<double>());
    }
  }
  return RealMatrix(j.size(), cols, std::move(e));
}

inline Vector json_vector(const json& j, const std::string& where) {
  if (!j.is_array()) fail(ErrorCode::ParseError, where + ": expected an array");
  Vector v;
  for (const auto& x : j) {
    if (!x.is_number()) fail(ErrorCode::ParseError, where + ": entries must be numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

inline json parse_json(std::string_view text, const std::string& origin) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, origin + ": " + e.what());
  }
}

}  // namespace detail

enum class TranslationKind { maxout, relu, leaky, lse };

// Builds the Type I network for a translation spec document.
inline Network translate_spec(TranslationKind kind, std::string_view text,
                              const std::string& origin = "spec") {
  const auto j = detail::parse_json(text, origin);
  auto weights = [&](const detail::json& obj, const std::string& where) {
    return detail::json_matrix(detail::member(obj, "weights", where), where + ".weights");
  };
  auto bias = [&](const detail::json& obj, const std::string& where) {
    return detail::json_vector(detail::member(obj, "bias", where), where + ".bias");
  };
  switch (kind) {
    case TranslationKind::maxout: {
      MaxoutSpec spec;
      const auto& units = detail::member(j, "units", origin);
      if (!units.is_array()) fail(ErrorCode::ParseError, origin + ".units: expected an array");
      for (std::size_t u = 0; u < units.size(); ++u) {
        const std::string where = origin + ".units[" + std::to_string(u) + "]";
        spec.units.push_back({weights(units[u], where), bias(units[u], where)});
      }
      return from_maxout(spec);
    }
    case TranslationKind::relu: return from_relu({weights(j, origin), bias(j, origin)});
    case TranslationKind::leaky: {
      const auto& s = detail::member(j, "slope", origin);
      if (!s.is_number()) fail(ErrorCode::ParseError, origin + ".slope: expected a number");
      return from_leaky_relu({weights(j, origin), bias(j, origin), s.get<double>()});
    }
    case TranslationKind::lse: return from_lse_dequantized({weights(j, origin), bias(j, origin)});
  }
  fail(ErrorCode::InvalidConfig, "unknown translation kind");
}

}  // namespace mmpnn

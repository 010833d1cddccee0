// Copyright 2026 The Script Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SCRIPT_TENSOR_IO_HPP_
#define SCRIPT_TENSOR_IO_HPP_

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "script/common.hpp"

namespace script {

// EMB1 layout (all little-endian):
//   bytes 0..3   "EMB1"
//   bytes 4..7   rows (uint32)
//   bytes 8..11  cols (uint32)
//   then rows*cols IEEE-754 binary32 values, row-major.
enum class MatrixFormat { kEmb1, kCsv };

inline constexpr std::array<char, 4> kEmb1Magic = {'E', 'M', 'B', '1'};
inline constexpr std::size_t kEmb1HeaderBytes = 12;

/// ".csv" (any case) selects CSV; everything else is EMB1.
inline MatrixFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(c));
  return ext == ".csv" ? MatrixFormat::kCsv : MatrixFormat::kEmb1;
}

namespace detail {

inline std::uint32_t load_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void store_u32le(std::uint32_t v, unsigned char* p) {
  p[0] = static_cast<unsigned char>(v);
  p[1] = static_cast<unsigned char>(v >> 8);
  p[2] = static_cast<unsigned char>(v >> 16);
  p[3] = static_cast<unsigned char>(v >> 24);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path,
                       std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIo, "cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::kIo, "write failed for '" + path.string() + "'");
}

inline void check_finite(const Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (!std::isfinite(m(r, c)))
        throw Error(Errc::kFormat, "non-finite entry at row " +
                                       std::to_string(r) + ", col " +
                                       std::to_string(c));
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline std::string encode_emb1(const Matrix& m) {
  static_assert(std::endian::native == std::endian::little ||
                    std::endian::native == std::endian::big,
                "mixed-endian platforms are not supported");
  std::string out(kEmb1HeaderBytes + 4 * m.rows() * m.cols(), '\0');
  auto* p = reinterpret_cast<unsigned char*>(out.data());
  std::memcpy(p, kEmb1Magic.data(), 4);
  detail::store_u32le(static_cast<std::uint32_t>(m.rows()), p + 4);
  detail::store_u32le(static_cast<std::uint32_t>(m.cols()), p + 8);
  p += kEmb1HeaderBytes;
  for (double v : m.data()) {
    detail::store_u32le(std::bit_cast<std::uint32_t>(static_cast<float>(v)), p);
    p += 4;
  }
  return out;
}

inline Matrix decode_emb1(std::string_view bytes) {
  if (bytes.size() < kEmb1HeaderBytes ||
      std::memcmp(bytes.data(), kEmb1Magic.data(), 4) != 0) {
    throw Error(Errc::kFormat, "malformed EMB1 header");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint64_t rows = detail::load_u32le(p + 4);
  const std::uint64_t cols = detail::load_u32le(p + 8);
  if (rows == 0 || cols == 0) {
    throw Error(Errc::kFormat, "malformed EMB1 header: zero dimension (" +
                                   std::to_string(rows) + "x" +
                                   std::to_string(cols) + ")");
  }
  const std::uint64_t payload = bytes.size() - kEmb1HeaderBytes;
  if (payload != rows * cols * 4) {
    throw Error(Errc::kFormat,
                "EMB1 size mismatch: header declares " + std::to_string(rows) +
                    "x" + std::to_string(cols) + " = " +
                    std::to_string(rows * cols) + " values, payload holds " +
                    std::to_string(payload / 4) +
                    (payload % 4 ? " values plus trailing bytes" : " values"));
  }
  Matrix m(rows, cols);
  p += kEmb1HeaderBytes;
  for (auto& v : m.data()) {
    v = std::bit_cast<float>(detail::load_u32le(p));
    p += 4;
  }
  detail::check_finite(m);
  return m;
}

inline std::string encode_csv(const Matrix& m) {
  std::string out;
  char buf[32];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      std::snprintf(buf, sizeof buf, "%.9g", m(r, c));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

inline Matrix decode_csv(std::string_view text) {
  std::vector<double> values;
  std::size_t rows = 0, cols = 0;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = detail::trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    std::size_t fields = 0;
    while (true) {
      const auto comma = line.find(',');
      std::string_view field = detail::trim(line.substr(0, comma));
      double v = 0.0;
      const auto [ptr, ec] =
          std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc{} ||
          ptr != field.data() + field.size()) {
        throw Error(Errc::kFormat, "CSV line " + std::to_string(line_no) +
                                       ": cannot parse '" + std::string(field) +
                                       "'");
      }
      values.push_back(v);
      ++fields;
      if (comma == std::string_view::npos) break;
      line = line.substr(comma + 1);
    }
    if (rows == 0) {
      cols = fields;
    } else if (fields != cols) {
      throw Error(Errc::kFormat, "CSV line " + std::to_string(line_no) +
                                     " has " + std::to_string(fields) +
                                     " fields, expected " +
                                     std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) throw Error(Errc::kFormat, "CSV contains no rows");
  Matrix m(rows, cols, std::move(values));
  detail::check_finite(m);
  return m;
}

inline Matrix read_matrix(const std::filesystem::path& path,
                          MatrixFormat format) {
  const std::string bytes = detail::read_file(path);
  return format == MatrixFormat::kEmb1 ? decode_emb1(bytes) : decode_csv(bytes);
}

inline Matrix read_matrix(const std::filesystem::path& path) {
  return read_matrix(path, format_from_path(path));
}

inline void write_matrix(const Matrix& m, const std::filesystem::path& path,
                         MatrixFormat format) {
  require(m.rows() <= UINT32_MAX && m.cols() <= UINT32_MAX, Errc::kTooLarge,
          "matrix dimensions exceed the EMB1 32-bit header");
  detail::write_file(path, format == MatrixFormat::kEmb1 ? encode_emb1(m)
                                                         : encode_csv(m));
}

inline void write_matrix(const Matrix& m, const std::filesystem::path& path) {
  write_matrix(m, path, format_from_path(path));
}

// ---------------------------------------------------------------------------
// Selection

/// Which stage of the pipeline contributed a kept index.
enum class StageTag { kIntersection, kQcspFill, kGspOnly, kQcspOnly, kBaseline };

inline std::string_view to_string(StageTag t) {
  switch (t) {
    case StageTag::kIntersection: return "intersection";
    case StageTag::kQcspFill: return "qcsp-fill";
    case StageTag::kGspOnly: return "gsp-only";
    case StageTag::kQcspOnly: return "qcsp-only";
    case StageTag::kBaseline: return "baseline";
  }
  return "?";
}

inline StageTag stage_tag_from_string(std::string_view s) {
  for (auto t : {StageTag::kIntersection, StageTag::kQcspFill,
                 StageTag::kGspOnly, StageTag::kQcspOnly, StageTag::kBaseline})
    if (to_string(t) == s) return t;
  throw Error(Errc::kFormat, "unknown stage tag '" + std::string(s) + "'");
}

/// Ordered retained-token indices with per-index provenance.
struct Selection {
  std::vector<std::size_t> kept;
  std::vector<StageTag> stage_tags;
  std::size_t n_original = 0;
  std::size_t budget = 0;
  std::string mode;
  std::map<std::string, double> params;

  friend bool operator==(const Selection&, const Selection&) = default;
};

/// Throws unless indices are distinct, in range, and tags line up.
inline void validate(const Selection& s) {
  require(s.stage_tags.size() == s.kept.size(), Errc::kFormat,
          "selection has " + std::to_string(s.kept.size()) + " indices but " +
              std::to_string(s.stage_tags.size()) + " stage tags");
  std::vector<bool> seen(s.n_original, false);
  for (std::size_t idx : s.kept) {
    require(idx < s.n_original, Errc::kOutOfRange,
            "selection index " + std::to_string(idx) + " >= n_original " +
                std::to_string(s.n_original));
    require(!seen[idx], Errc::kFormat,
            "duplicate selection index " + std::to_string(idx));
    seen[idx] = true;
  }
}

inline constexpr std::string_view kSelectionFormat = "script-selection/1";

inline std::string encode_selection(const Selection& s) {
  validate(s);
  nlohmann::ordered_json doc;
  doc["format"] = kSelectionFormat;
  doc["n_original"] = s.n_original;
  doc["budget"] = s.budget;
  doc["mode"] = s.mode;
  doc["params"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : s.params) doc["params"][k] = v;
  doc["indices"] = s.kept;
  auto tags = nlohmann::ordered_json::array();
  for (auto t : s.stage_tags) tags.push_back(to_string(t));
  doc["stage_tags"] = std::move(tags);
  return doc.dump(2) + "\n";
}

inline Selection decode_selection(std::string_view text) {
  Selection s;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("format").get<std::string>() != kSelectionFormat)
      throw Error(Errc::kFormat, "unsupported selection format");
    s.n_original = doc.at("n_original").get<std::size_t>();
    s.budget = doc.at("budget").get<std::size_t>();
    s.mode = doc.at("mode").get<std::string>();
    for (const auto& [k, v] : doc.at("params").items())
      s.params[k] = v.get<double>();
    s.kept = doc.at("indices").get<std::vector<std::size_t>>();
    for (const auto& t : doc.at("stage_tags"))
      s.stage_tags.push_back(stage_tag_from_string(t.get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kFormat, std::string("malformed selection: ") + e.what());
  }
  validate(s);
  return s;
}

inline void write_selection(const Selection& s,
                            const std::filesystem::path& path) {
  detail::write_file(path, encode_selection(s));
}

inline Selection read_selection(const std::filesystem::path& path) {
  return decode_selection(detail::read_file(path));
}

}  // namespace script

#endif  // SCRIPT_TENSOR_IO_HPP_

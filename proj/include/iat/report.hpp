#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "iat/operator.hpp"

namespace iat {

// One result cell. Absent values ("-" in the serialized form) mean the cell
// was not produced: alpha/rel_err when a selection rule declined, h_ell when
// no gap estimate was needed, ell when no projection level matched.
struct ReportRow {
  std::string problem;
  long long n = 0;
  double xi = 0.0;
  std::uint64_t seed = 0;
  std::optional<int> ell;
  std::optional<double> d_ell;
  int i = 0;
  std::string rule;
  std::optional<double> alpha;
  std::optional<double> rel_err;
  std::optional<double> h_ell;
  std::string reason;  // empty when the cell succeeded
  double wall_ms = 0.0;
  // Rate reports append the fitted and theoretical slopes to every row.
  std::optional<double> slope_fit;
  std::optional<double> slope_theory;
};

struct ReportMeta {
  std::string generator;  // PRNG identifier
  std::uint64_t seed = 0;
  std::string version;
};

struct ExperimentReport {
  ReportMeta meta;
  std::vector<ReportRow> rows;
  bool rate_columns = false;
};

inline constexpr const char* bench_csv_header =
    "problem,n,xi,seed,ell,d_ell,i,rule,alpha,rel_err,h_ell,reason,wall_ms";
inline constexpr const char* rate_csv_header =
    "problem,n,xi,seed,ell,d_ell,i,rule,alpha,rel_err,h_ell,reason,wall_ms,"
    "slope_fit,slope_theory";

// Six significant digits, scientific. Reparsing a formatted value and
// formatting it again reproduces the same bytes, which is what makes the
// CSV round-trip exact.
inline std::string format_sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.5e", v);
  return std::string(buf);
}

namespace detail {

inline std::string opt_cell(const std::optional<double>& v) {
  return v ? format_sci(*v) : std::string("-");
}

inline std::string opt_cell(const std::optional<int>& v) {
  return v ? std::to_string(*v) : std::string("-");
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string::size_type start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline double parse_double(const std::string& cell) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0')
    throw std::runtime_error("report: unparsable numeric cell '" + cell + "'");
  return v;
}

inline std::optional<double> parse_opt_double(const std::string& cell) {
  if (cell == "-") return std::nullopt;
  return parse_double(cell);
}

inline std::optional<int> parse_opt_int(const std::string& cell) {
  if (cell == "-") return std::nullopt;
  return static_cast<int>(std::strtoll(cell.c_str(), nullptr, 10));
}

inline std::vector<std::string> row_cells(const ReportRow& r, bool rate_columns) {
  std::vector<std::string> c = {r.problem,
                                std::to_string(r.n),
                                format_sci(r.xi),
                                std::to_string(r.seed),
                                opt_cell(r.ell),
                                opt_cell(r.d_ell),
                                std::to_string(r.i),
                                r.rule,
                                opt_cell(r.alpha),
                                opt_cell(r.rel_err),
                                opt_cell(r.h_ell),
                                r.reason,
                                format_sci(r.wall_ms)};
  if (rate_columns) {
    c.push_back(opt_cell(r.slope_fit));
    c.push_back(opt_cell(r.slope_theory));
  }
  return c;
}

}  // namespace detail

inline std::string to_csv(const ExperimentReport& rep) {
  std::string out;
  out += "# generator: " + rep.meta.generator + "\n";
  out += "# seed: " + std::to_string(rep.meta.seed) + "\n";
  out += "# version: " + rep.meta.version + "\n";
  out += rep.rate_columns ? rate_csv_header : bench_csv_header;
  out += "\n";
  for (const ReportRow& r : rep.rows) {
    const auto cells = detail::row_cells(r, rep.rate_columns);
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j) out += ',';
      out += cells[j];
    }
    out += '\n';
  }
  return out;
}

inline ExperimentReport parse_csv(const std::string& text) {
  ExperimentReport rep;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string key = line.substr(1, colon - 1);
      std::string value = line.substr(colon + 1);
      auto trim = [](std::string& s) {
        while (!s.empty() && s.front() == ' ') s.erase(s.begin());
        while (!s.empty() && s.back() == ' ') s.pop_back();
      };
      trim(key);
      trim(value);
      if (key == "generator") rep.meta.generator = value;
      else if (key == "seed") rep.meta.seed = std::strtoull(value.c_str(), nullptr, 10);
      else if (key == "version") rep.meta.version = value;
      continue;
    }
    if (!header_seen) {
      if (line == bench_csv_header) rep.rate_columns = false;
      else if (line == rate_csv_header) rep.rate_columns = true;
      else throw std::runtime_error("report: unrecognized CSV header");
      header_seen = true;
      continue;
    }
    const auto cells = detail::split(line, ',');
    const std::size_t expect = rep.rate_columns ? 15 : 13;
    if (cells.size() != expect)
      throw std::runtime_error("report: row has wrong number of cells");
    ReportRow r;
    r.problem = cells[0];
    r.n = std::strtoll(cells[1].c_str(), nullptr, 10);
    r.xi = detail::parse_double(cells[2]);
    r.seed = std::strtoull(cells[3].c_str(), nullptr, 10);
    r.ell = detail::parse_opt_int(cells[4]);
    r.d_ell = detail::parse_opt_double(cells[5]);
    r.i = static_cast<int>(std::strtoll(cells[6].c_str(), nullptr, 10));
    r.rule = cells[7];
    r.alpha = detail::parse_opt_double(cells[8]);
    r.rel_err = detail::parse_opt_double(cells[9]);
    r.h_ell = detail::parse_opt_double(cells[10]);
    r.reason = cells[11];
    r.wall_ms = detail::parse_double(cells[12]);
    if (rep.rate_columns) {
      r.slope_fit = detail::parse_opt_double(cells[13]);
      r.slope_theory = detail::parse_opt_double(cells[14]);
    }
    rep.rows.push_back(std::move(r));
  }
  if (!header_seen) throw std::runtime_error("report: missing CSV header");
  return rep;
}

inline std::string to_markdown(const ExperimentReport& rep) {
  const auto header_cells =
      detail::split(rep.rate_columns ? rate_csv_header : bench_csv_header, ',');
  std::string out;
  out += "generator: " + rep.meta.generator + "\n";
  out += "seed: " + std::to_string(rep.meta.seed) + "\n";
  out += "version: " + rep.meta.version + "\n\n";
  auto emit = [&out](const std::vector<std::string>& cells) {
    out += '|';
    for (const auto& c : cells) {
      out += ' ';
      out += c.empty() ? std::string(" ") : c;
      out += " |";
    }
    out += '\n';
  };
  emit(header_cells);
  out += '|';
  for (std::size_t j = 0; j < header_cells.size(); ++j) out += " --- |";
  out += '\n';
  for (const ReportRow& r : rep.rows) emit(detail::row_cells(r, rep.rate_columns));
  return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Plain-text grayscale image (PGM, "P2"), row-major, values rescaled
// linearly from [min, max] to 0..255. A constant image maps to 0.
inline std::string to_pgm(const Vector& x, int side) {
  if (static_cast<Eigen::Index>(side) * side != x.size())
    throw std::invalid_argument("to_pgm: size is not side^2");
  const double lo = x.minCoeff();
  const double hi = x.maxCoeff();
  const double span = hi - lo;
  std::string out = "P2\n" + std::to_string(side) + " " + std::to_string(side) + "\n255\n";
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      const double v = x[row + static_cast<Eigen::Index>(col) * side];
      int g = span > 0.0 ? static_cast<int>(std::lround((v - lo) / span * 255.0)) : 0;
      if (g < 0) g = 0;
      if (g > 255) g = 255;
      if (col) out += ' ';
      out += std::to_string(g);
    }
    out += '\n';
  }
  return out;
}

inline void write_pgm(const std::string& path, const Vector& x, int side) {
  write_text_file(path, to_pgm(x, side));
}

}  // namespace iat

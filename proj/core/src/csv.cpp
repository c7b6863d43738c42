#include "pgnn/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <unordered_map>

#include "pgnn/error.hpp"

namespace pgnn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, std::size_t line, const std::string& column) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ParseError("column '" + column + "': not a finite number: '" + s + "'", line);
  }
  return v;
}

std::int64_t parse_count(const std::string& s, std::size_t line) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && ptr == s.data() + s.size()) {
    if (v < 0) throw ParseError("y must be a non-negative integer, got '" + s + "'", line);
    return v;
  }
  // Accept integral values written as floating point, e.g. "3.0".
  double d = 0.0;
  auto [p2, ec2] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (ec2 == std::errc() && p2 == s.data() + s.size() && std::isfinite(d) && d >= 0.0 &&
      d == std::floor(d) && d < 9.0e15) {
    return static_cast<std::int64_t>(d);
  }
  throw ParseError("y must be a non-negative integer, got '" + s + "'", line);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buf, ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

ClusteredDataset read_csv(std::istream& in, bool require_y) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
      line.erase(0, 3);
    }
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.empty()) throw ParseError("empty file: missing header", std::max<std::size_t>(line_no, 1));

  std::optional<std::size_t> id_col;
  std::optional<std::size_t> y_col;
  std::optional<std::size_t> u_col;
  std::vector<std::size_t> feature_cols;
  std::vector<std::string> feature_names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (h == "cluster_id") {
      id_col = c;
    } else if (h == "y") {
      y_col = c;
    } else if (h == "true_u") {
      u_col = c;
    } else if (h.empty()) {
      throw ParseError("empty column name in header", line_no);
    } else {
      feature_cols.push_back(c);
      feature_names.push_back(h);
    }
  }
  if (!id_col) throw ParseError("missing column 'cluster_id'", line_no);
  if (require_y && !y_col) throw ParseError("missing column 'y'", line_no);
  if (feature_cols.empty()) throw ParseError("no feature columns", line_no);

  std::unordered_map<std::string, std::size_t> index_of;
  std::vector<std::string> labels;
  std::vector<std::size_t> cluster;
  std::vector<std::int64_t> counts;
  std::vector<double> values;
  std::map<std::size_t, double> truth;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    const std::string& id = fields[*id_col];
    if (id.empty()) throw ParseError("empty cluster_id", line_no);
    auto [it, inserted] = index_of.try_emplace(id, labels.size());
    if (inserted) labels.push_back(id);
    cluster.push_back(it->second);
    counts.push_back(y_col ? parse_count(fields[*y_col], line_no) : 0);
    for (std::size_t c : feature_cols) values.push_back(parse_double(fields[c], line_no, header[c]));
    if (u_col) truth[it->second] = parse_double(fields[*u_col], line_no, "true_u");
  }
  if (counts.empty()) throw ParseError("no data rows", line_no);

  Matrix x(counts.size(), feature_cols.size());
  std::copy(values.begin(), values.end(), x.flat().begin());
  const std::size_t n = labels.size();
  ClusteredDataset ds(std::move(x), std::move(cluster), std::move(counts), n, std::move(labels),
                      std::move(feature_names));
  if (u_col) {
    std::vector<double> u(n);
    for (const auto& [i, value] : truth) u[i] = value;
    ds.set_true_u(std::move(u));
  }
  return ds;
}

ClusteredDataset load_csv(const std::string& path, bool require_y) {
  std::ifstream in(path);
  if (!in) throw Error("load_csv: cannot open '" + path + "'");
  return read_csv(in, require_y);
}

void write_csv(const ClusteredDataset& ds, std::ostream& out, bool with_true_u) {
  if (with_true_u && !ds.true_u()) throw UsageError("write_csv: dataset has no true_u");
  out << "cluster_id,y";
  for (const auto& name : ds.feature_names()) out << ',' << name;
  if (with_true_u) out << ",true_u";
  out << '\n';
  const auto& labels = ds.cluster_labels();
  for (std::size_t r = 0; r < ds.size(); ++r) {
    out << labels[ds.cluster(r)] << ',' << ds.y(r);
    for (double v : ds.x(r)) out << ',' << format_double(v);
    if (with_true_u) out << ',' << format_double((*ds.true_u())[ds.cluster(r)]);
    out << '\n';
  }
}

void write_csv(const ClusteredDataset& ds, const std::string& path, bool with_true_u) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_csv: cannot open '" + path + "' for writing");
  write_csv(ds, out, with_true_u);
}

void write_true_u_csv(const ClusteredDataset& ds, const std::string& path) {
  if (!ds.true_u()) throw UsageError("write_true_u_csv: dataset has no true_u");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_true_u_csv: cannot open '" + path + "' for writing");
  out << "cluster_id,true_u\n";
  const auto& labels = ds.cluster_labels();
  for (std::size_t i = 0; i < ds.cluster_count(); ++i) {
    out << labels[i] << ',' << format_double((*ds.true_u())[i]) << '\n';
  }
}

}  // namespace pgnn

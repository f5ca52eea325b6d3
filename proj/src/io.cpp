#include "normex/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace normex {

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::string csv_escape(const std::string& field) {
  const bool needs_quotes =
      field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quotes) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    out += csv_escape(fields[i]);
  }
  out += '\n';
  return out;
}

void atomic_write_file(const std::filesystem::path& path,
                       const std::string& content) {
  const std::filesystem::path dir =
      path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::filesystem::create_directories(dir);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string sample_matrix_csv(const SampleMatrix& sample) {
  std::string out;
  std::vector<std::string> header;
  for (std::size_t j = 0; j < sample.cols(); ++j) {
    header.push_back("x" + std::to_string(j));
  }
  out += csv_line(header);
  std::vector<std::string> fields(sample.cols());
  for (std::size_t i = 0; i < sample.rows(); ++i) {
    for (std::size_t j = 0; j < sample.cols(); ++j) {
      fields[j] = format_double(sample(i, j));
    }
    out += csv_line(fields);
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto result = std::from_chars(s.data(), s.data() + s.size(), v);
  if (result.ec != std::errc() || result.ptr != s.data() + s.size()) {
    throw std::runtime_error("invalid number in CSV: '" + s + "'");
  }
  return v;
}

}  // namespace

SampleMatrix read_sample_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path.string());
  const std::size_t cols = split_csv_line(line).size();
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != cols) {
      throw std::runtime_error("ragged CSV row in " + path.string());
    }
    for (const auto& f : fields) values.push_back(parse_double(f));
    ++rows;
  }
  if (rows == 0) throw std::runtime_error("no rows in " + path.string());
  SampleMatrix out(rows, cols);
  out.data() = std::move(values);
  return out;
}

std::string qq_table_csv(const QQTable& table) {
  std::string out = csv_line(
      {"level_index", "level_norm", "is_extreme", "component", "q_ref", "q_cmp"});
  for (const QQRow& row : table.rows) {
    out += csv_line({std::to_string(row.level_index), format_double(row.level_norm),
                     row.extreme ? "1" : "0", std::to_string(row.component),
                     format_double(row.q_ref), format_double(row.q_cmp)});
  }
  return out;
}

QQTable read_qq_table_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path.string());
  QQTable table;
  int max_component = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 6) throw std::runtime_error("bad QQ CSV row in " + path.string());
    QQRow row;
    row.level_index = static_cast<int>(parse_double(fields[0]));
    row.level_norm = parse_double(fields[1]);
    row.extreme = fields[2] == "1";
    row.component = static_cast<int>(parse_double(fields[3]));
    row.q_ref = parse_double(fields[4]);
    row.q_cmp = parse_double(fields[5]);
    max_component = std::max(max_component, row.component);
    table.rows.push_back(row);
  }
  table.d = max_component + 1;
  return table;
}

std::string qq_scatter_svg(const QQTable& table, int component,
                           const std::string& title) {
  std::vector<const QQRow*> rows;
  for (const QQRow& row : table.rows) {
    if (row.component == component) rows.push_back(&row);
  }
  if (rows.empty()) throw std::invalid_argument("qq_scatter_svg: no rows");

  double lo = rows[0]->q_ref, hi = rows[0]->q_ref;
  for (const QQRow* row : rows) {
    lo = std::min({lo, row->q_ref, row->q_cmp});
    hi = std::max({hi, row->q_ref, row->q_cmp});
  }
  if (hi <= lo) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const double size = 480.0;
  const double margin = 50.0;
  const double span = size - 2.0 * margin;
  auto sx = [&](double v) { return margin + (v - lo) / (hi - lo) * span; };
  auto sy = [&](double v) { return size - margin - (v - lo) / (hi - lo) * span; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
      << "width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
      << size << " " << size << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << size / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n"
      << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << span
      << "\" height=\"" << span << "\" fill=\"none\" stroke=\"#888\"/>\n"
      << "<line x1=\"" << sx(lo) << "\" y1=\"" << sy(lo) << "\" x2=\"" << sx(hi)
      << "\" y2=\"" << sy(hi) << "\" stroke=\"#444\" stroke-dasharray=\"4 3\"/>\n";
  svg << "<text x=\"" << size / 2 << "\" y=\"" << size - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
      << "reference quantile</text>\n";
  for (const QQRow* row : rows) {
    if (row->extreme) continue;
    svg << "<circle cx=\"" << sx(row->q_ref) << "\" cy=\"" << sy(row->q_cmp)
        << "\" r=\"2.4\" fill=\"#1f77b4\" fill-opacity=\"0.8\"/>\n";
  }
  for (const QQRow* row : rows) {
    if (!row->extreme) continue;
    svg << "<circle cx=\"" << sx(row->q_ref) << "\" cy=\"" << sy(row->q_cmp)
        << "\" r=\"2.8\" fill=\"#d62728\" fill-opacity=\"0.9\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace normex

#ifndef NORMEX_IO_HPP
#define NORMEX_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "normex/common.hpp"
#include "normex/compare.hpp"

namespace normex {

/// Shortest decimal string that round-trips the double ('.' separator).
std::string format_double(double value);

/// RFC-4180 field quoting: fields containing commas, quotes or newlines are
/// quoted, embedded quotes doubled.
std::string csv_escape(const std::string& field);

std::string csv_line(const std::vector<std::string>& fields);

/// Writes content to a temporary file in the target directory, then renames
/// it into place, so readers never observe partial artifacts.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

std::string sample_matrix_csv(const SampleMatrix& sample);
SampleMatrix read_sample_matrix_csv(const std::filesystem::path& path);

std::string qq_table_csv(const QQTable& table);
QQTable read_qq_table_csv(const std::filesystem::path& path);

/// Scatter of (q_ref, q_cmp) for one component with the y = x reference
/// line; extreme levels drawn in red, the rest in blue.
std::string qq_scatter_svg(const QQTable& table, int component,
                           const std::string& title);

}  // namespace normex

#endif  // NORMEX_IO_HPP

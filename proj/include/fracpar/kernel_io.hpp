#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "fracpar/kernels.hpp"

namespace fracpar {

/// Writes to a sibling temporary file and renames it over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest round-trip decimal form ("%.17g"; "nan" for NaN).
std::string format_number(double v);

/// KernelField CSV: a comment line carrying the digest, the column header
/// `t,x1..xn,i,j,re,im`, then one row per (time, point, i, j) in storage order.
/// Singular points are written with re = im = nan.
std::string field_csv(const kernel_field& f, const std::string& digest);

/// JSON header describing grid, times, kind and derivative of a field.
nlohmann::json field_header(const kernel_field& f, const std::string& digest);

/// Writes <stem>.csv and <stem>.json atomically.
void write_field(const std::filesystem::path& stem, const kernel_field& f, const std::string& digest);

/// Parses the CSV written by field_csv against a header (the grid and times come from the header).
kernel_field read_field(const std::filesystem::path& stem);

}  // namespace fracpar

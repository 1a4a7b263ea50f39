#pragma once

#include <array>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "superlens/measurement.hpp"
#include "superlens/profile.hpp"
#include "superlens/spectral.hpp"

namespace superlens {

/// RFC-4180 CSV with a header row. Numbers are written with 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  CsvWriter& cell(const std::string& v);
  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  void end_row();

 private:
  std::ofstream os_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
};

/// Columns i1, i2, re_u, im_u, re_delta, im_delta; re_u/im_u hold the noisy data u^delta.
void write_measurement_csv(const std::string& path, const Measurement& m);
/// Reads what write_measurement_csv writes; sigma/seed are not stored and come back as 0.
/// Throws GridMismatch if the indices do not form a full rows x cols grid.
[[nodiscard]] Measurement read_measurement_csv(const std::string& path);

/// Plain (P2) or raw (P5) PGM, scaled to [0, 1].
[[nodiscard]] GrayImage read_pgm(const std::string& path);

/// Plain PGM of values mapped linearly from [min, max] to 0..255.
void write_pgm(const std::string& path, const std::vector<double>& v, int width, int height);

/// Plain PPM through the fixed "jet" colormap (blue -> cyan -> yellow -> red) over [min, max] of the
/// data, plus a sidecar `<path>.json` with min, max and the colormap name.
/// The grid (rows = x index, cols = y index) is drawn with x to the right and y upward.
void write_pseudocolor(const std::string& path, const GridField& g, bool use_abs = false);
void write_pseudocolor(const std::string& path, const std::vector<double>& v, int rows, int cols);

/// RGB of the jet colormap at t in [0, 1].
[[nodiscard]] std::array<int, 3> jet_color(double t);

/// Flat key = value text; '#' starts a comment; blank lines are skipped.
/// Throws InvalidConfig on malformed lines or duplicate keys.
[[nodiscard]] std::map<std::string, std::string> parse_key_values(const std::string& text);
[[nodiscard]] std::map<std::string, std::string> read_key_value_file(const std::string& path);

[[nodiscard]] std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace superlens

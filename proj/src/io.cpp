#include "superlens/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "superlens/errors.hpp"

namespace superlens {

namespace {

std::string csv_escape(const std::string& v) {
  if (v.find_first_of(",\"\r\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw InvariantError("cannot open " + path + " for writing");
  return os;
}

}  // namespace

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : os_(open_out(path)), columns_(header.size()) {
  for (const auto& h : header) cell(h);
  end_row();
}

CsvWriter& CsvWriter::cell(const std::string& v) {
  if (in_row_ > 0) os_ << ',';
  os_ << csv_escape(v);
  ++in_row_;
  return *this;
}

CsvWriter& CsvWriter::cell(double v) {
  std::ostringstream s;
  if (std::isnan(v))
    s << "nan";
  else if (std::isinf(v))
    s << (v > 0 ? "inf" : "-inf");
  else
    s << std::setprecision(17) << v;
  return cell(s.str());
}

CsvWriter& CsvWriter::cell(long long v) { return cell(std::to_string(v)); }

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw InvariantError("CSV row has the wrong number of cells");
  os_ << "\r\n";
  in_row_ = 0;
  if (!os_) throw InvariantError("CSV write failed");
}

void write_measurement_csv(const std::string& path, const Measurement& m) {
  CsvWriter w(path, {"i1", "i2", "re_u", "im_u", "re_delta", "im_delta"});
  for (int i1 = 0; i1 < m.u_delta.rows(); ++i1)
    for (int i2 = 0; i2 < m.u_delta.cols(); ++i2) {
      const cplx u = m.u_delta(i1, i2), d = m.delta(i1, i2);
      w.cell(i1).cell(i2).cell(u.real()).cell(u.imag()).cell(d.real()).cell(d.imag());
      w.end_row();
    }
}

Measurement read_measurement_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || trim(line) != "i1,i2,re_u,im_u,re_delta,im_delta")
    throw GridMismatch(path + ": unexpected measurement header");
  struct Row {
    int i1, i2;
    cplx u, d;
  };
  std::vector<Row> rows;
  int r = 0, c = 0;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    Row row{};
    double a, b, e, f;
    if (!(ls >> row.i1 >> row.i2 >> a >> b >> e >> f)) throw GridMismatch(path + ": malformed row '" + line + "'");
    if (row.i1 < 0 || row.i2 < 0) throw GridMismatch(path + ": negative grid index");
    row.u = {a, b};
    row.d = {e, f};
    r = std::max(r, row.i1 + 1);
    c = std::max(c, row.i2 + 1);
    rows.push_back(row);
  }
  if (rows.empty() || rows.size() != static_cast<std::size_t>(r) * c)
    throw GridMismatch(path + ": rows do not cover a full grid");
  Measurement m;
  m.u_delta = GridField(r, c);
  m.delta = GridField(r, c);
  std::vector<char> seen(rows.size(), 0);
  for (const auto& row : rows) {
    const std::size_t k = static_cast<std::size_t>(row.i1) * c + row.i2;
    if (seen[k]) throw GridMismatch(path + ": duplicate grid index");
    seen[k] = 1;
    m.u_delta(row.i1, row.i2) = row.u;
    m.delta(row.i1, row.i2) = row.d;
  }
  const double dn = grid_l2_norm(m.delta);
  m.snr = dn == 0.0 ? kInfiniteSnr : snr_of(m.clean(), m.delta);
  return m;
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw EmptyImage("cannot open image " + path);
  auto token = [&]() {
    std::string t;
    while (is >> t) {
      if (t[0] == '#') {
        std::string rest;
        std::getline(is, rest);
        continue;
      }
      return t;
    }
    throw EmptyImage(path + ": truncated PGM header");
  };
  const std::string magic = token();
  if (magic != "P2" && magic != "P5") throw EmptyImage(path + ": not a PGM (P2/P5) file");
  GrayImage img;
  img.width = std::stoi(token());
  img.height = std::stoi(token());
  const int maxval = std::stoi(token());
  if (img.width <= 0 || img.height <= 0 || maxval <= 0 || maxval > 65535) throw EmptyImage(path + ": bad PGM header");
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  img.pixels.resize(n);
  if (magic == "P2") {
    for (auto& p : img.pixels) p = std::stod(token()) / maxval;
  } else {
    is.get();
    const int bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> raw(n * bytes);
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!is) throw EmptyImage(path + ": truncated PGM data");
    for (std::size_t i = 0; i < n; ++i)
      img.pixels[i] = (bytes == 1 ? raw[i] : (raw[2 * i] << 8 | raw[2 * i + 1])) / static_cast<double>(maxval);
  }
  return img;
}

void write_pgm(const std::string& path, const std::vector<double>& v, int width, int height) {
  if (v.size() != static_cast<std::size_t>(width) * height) throw GridMismatch("write_pgm: size mismatch");
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double span = *hi - *lo;
  auto os = open_out(path);
  os << "P2\n" << width << ' ' << height << "\n255\n";
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double t = span > 0 ? (v[static_cast<std::size_t>(r) * width + c] - *lo) / span : 0.5;
      os << static_cast<int>(std::lround(255 * t)) << (c + 1 < width ? ' ' : '\n');
    }
  }
}

std::array<int, 3> jet_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  auto ch = [&](double center) {
    return static_cast<int>(std::lround(255.0 * std::clamp(1.5 - std::abs(4.0 * t - center), 0.0, 1.0)));
  };
  return {ch(3.0), ch(2.0), ch(1.0)};
}

void write_pseudocolor(const std::string& path, const std::vector<double>& v, int rows, int cols) {
  if (v.size() != static_cast<std::size_t>(rows) * cols) throw GridMismatch("write_pseudocolor: size mismatch");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const double span = hi - lo;
  auto os = open_out(path);
  // image width runs along x (grid rows), height along y with y = max at the top
  os << "P3\n" << rows << ' ' << cols << "\n255\n";
  for (int r = 0; r < cols; ++r) {
    const int i2 = cols - 1 - r;
    for (int i1 = 0; i1 < rows; ++i1) {
      const double x = v[static_cast<std::size_t>(i1) * cols + i2];
      const auto rgb = jet_color(span > 0 ? (x - lo) / span : 0.5);
      os << rgb[0] << ' ' << rgb[1] << ' ' << rgb[2] << (i1 + 1 < rows ? ' ' : '\n');
    }
  }
  nlohmann::json side{{"min", lo}, {"max", hi}, {"colormap", "jet"}, {"width", rows}, {"height", cols}};
  write_text_file(path + ".json", side.dump(2) + "\n");
}

void write_pseudocolor(const std::string& path, const GridField& g, bool use_abs) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = use_abs ? std::abs(g.values()[i]) : g.values()[i].real();
  write_pseudocolor(path, v, g.rows(), g.cols());
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidConfig("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw InvalidConfig("config line " + std::to_string(lineno) + ": empty key");
    if (!out.emplace(key, value).second)
      throw InvalidConfig("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return out;
}

std::map<std::string, std::string> read_key_value_file(const std::string& path) {
  return parse_key_values(read_text_file(path));
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidConfig("cannot read " + path);
  std::ostringstream s;
  s << is.rdbuf();
  return s.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  auto os = open_out(path);
  os << text;
  if (!os) throw InvariantError("write failed for " + path);
}

}  // namespace superlens

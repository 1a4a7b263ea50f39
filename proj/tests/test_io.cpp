#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "superlens/errors.hpp"
#include "superlens/io.hpp"

using namespace superlens;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("superlens_io_" + std::to_string(std::rand()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  [[nodiscard]] std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("measurement csv round trip") {
  TempDir dir;
  GridField u(5, 7);
  for (std::size_t i = 0; i < u.size(); ++i) u.values()[i] = cplx(std::sin(0.3 * i) / 3.0, 1e-17 * i - 0.1);
  const Measurement m = add_noise(u, {0.01, 4});
  write_measurement_csv(dir.file("m.csv"), m);

  const std::string text = read_text_file(dir.file("m.csv"));
  CHECK(text.rfind("i1,i2,re_u,im_u,re_delta,im_delta\r\n", 0) == 0);

  const Measurement back = read_measurement_csv(dir.file("m.csv"));
  CHECK(back.u_delta == m.u_delta);
  CHECK(back.delta == m.delta);
  CHECK(back.u_delta.rows() == 5);
  CHECK(back.u_delta.cols() == 7);

  write_text_file(dir.file("bad.csv"), "i1,i2,re_u,im_u,re_delta,im_delta\n0,0,1,0,0,0\n0,1,1,0,0,0\n1,1,1,0,0,0\n");
  CHECK_THROWS_AS((void)read_measurement_csv(dir.file("bad.csv")), GridMismatch);
  write_text_file(dir.file("hdr.csv"), "a,b\n");
  CHECK_THROWS_AS((void)read_measurement_csv(dir.file("hdr.csv")), GridMismatch);
}

TEST_CASE("csv writer quoting and special values") {
  TempDir dir;
  {
    CsvWriter w(dir.file("w.csv"), {"name", "value"});
    w.cell("a,\"b\"").cell(0.1).end_row();
    w.cell("inf").cell(std::numeric_limits<double>::infinity()).end_row();
    w.cell("n").cell(3).end_row();
    CHECK_THROWS_AS(w.cell("only").end_row(), InvariantError);
  }
  const std::string text = read_text_file(dir.file("w.csv"));
  CHECK(text.find("\"a,\"\"b\"\"\",0.10000000000000001\r\n") != std::string::npos);
  CHECK(text.find("inf,inf\r\n") != std::string::npos);
  CHECK(text.find("n,3\r\n") != std::string::npos);
}

TEST_CASE("pgm read and write") {
  TempDir dir;
  write_text_file(dir.file("p2.pgm"), "P2\n# comment\n3 2\n4\n0 1 2\n3 4 0\n");
  const GrayImage a = read_pgm(dir.file("p2.pgm"));
  CHECK(a.width == 3);
  CHECK(a.height == 2);
  CHECK(a.at(0, 1) == doctest::Approx(0.25));
  CHECK(a.at(1, 1) == doctest::Approx(1.0));

  {
    std::ofstream os(dir.file("p5.pgm"), std::ios::binary);
    os << "P5 2 2 255\n";
    const unsigned char px[4] = {0, 255, 51, 102};
    os.write(reinterpret_cast<const char*>(px), 4);
  }
  const GrayImage b = read_pgm(dir.file("p5.pgm"));
  CHECK(b.at(0, 1) == doctest::Approx(1.0));
  CHECK(b.at(1, 0) == doctest::Approx(0.2));

  write_pgm(dir.file("out.pgm"), {0.0, 0.5, 1.0, 2.0}, 2, 2);
  const GrayImage c = read_pgm(dir.file("out.pgm"));
  CHECK(c.at(0, 0) == 0.0);
  CHECK(c.at(1, 1) == 1.0);
  CHECK(c.at(1, 0) == doctest::Approx(0.5).epsilon(0.01));

  write_text_file(dir.file("bad.pgm"), "P3\n1 1\n255\n0 0 0\n");
  CHECK_THROWS_AS((void)read_pgm(dir.file("bad.pgm")), EmptyImage);
  write_text_file(dir.file("short.pgm"), "P2\n2 2\n255\n0 0 0\n");
  CHECK_THROWS_AS((void)read_pgm(dir.file("short.pgm")), EmptyImage);
  CHECK_THROWS_AS((void)read_pgm(dir.file("missing.pgm")), EmptyImage);
  CHECK_THROWS_AS(write_pgm(dir.file("x.pgm"), {1.0}, 2, 2), GridMismatch);
}

TEST_CASE("jet colormap") {
  CHECK(jet_color(0.0)[2] > 0);
  CHECK(jet_color(0.0)[0] == 0);
  CHECK(jet_color(1.0)[0] > 0);
  CHECK(jet_color(1.0)[2] == 0);
  const auto mid = jet_color(0.5);
  CHECK(mid[1] == 255);
  for (double t = 0; t <= 1.0; t += 0.01)
    for (int c : jet_color(t)) {
      CHECK(c >= 0);
      CHECK(c <= 255);
    }
  CHECK(jet_color(-1.0) == jet_color(0.0));
  CHECK(jet_color(2.0) == jet_color(1.0));
}

TEST_CASE("pseudocolor orientation and sidecar") {
  TempDir dir;
  // value grows with x only; rows index x
  std::vector<double> v(3 * 2);
  for (int i1 = 0; i1 < 3; ++i1)
    for (int i2 = 0; i2 < 2; ++i2) v[i1 * 2 + i2] = i1 + 10.0 * i2;
  write_pseudocolor(dir.file("p.ppm"), v, 3, 2);
  std::istringstream in(read_text_file(dir.file("p.ppm")));
  std::string magic;
  int w, h, maxv;
  in >> magic >> w >> h >> maxv;
  CHECK(magic == "P3");
  CHECK(w == 3);
  CHECK(h == 2);
  std::vector<std::array<int, 3>> px(6);
  for (auto& p : px) in >> p[0] >> p[1] >> p[2];
  // first image row is y = max: i2 = 1, i1 = 0..2; the last pixel is the maximum
  CHECK(px[2] == jet_color(1.0));
  CHECK(px[3] == jet_color(0.0));
  const auto side = nlohmann::json::parse(read_text_file(dir.file("p.ppm.json")));
  CHECK(side["min"].get<double>() == 0.0);
  CHECK(side["max"].get<double>() == 12.0);
  CHECK(side["colormap"] == "jet");
}

TEST_CASE("key value parsing") {
  const auto kv = parse_key_values("# header\n a = 1 \n\nb=x y # trailing\n");
  CHECK(kv.size() == 2u);
  CHECK(kv.at("a") == "1");
  CHECK(kv.at("b") == "x y");
  CHECK_THROWS_AS((void)parse_key_values("a = 1\na = 2\n"), InvalidConfig);
  CHECK_THROWS_AS((void)parse_key_values("no equals\n"), InvalidConfig);
  CHECK_THROWS_AS((void)parse_key_values(" = 3\n"), InvalidConfig);
  CHECK_THROWS_AS((void)read_key_value_file("/nonexistent/superlens.cfg"), InvalidConfig);
}

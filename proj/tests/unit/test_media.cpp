// Image/density conversions, PNG and CSV round trips, levels files, and the
// mask rasterizer.

#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "media.hpp"
#include "sphere_geometry.hpp"
#include "test_util.hpp"

using namespace fpmorph;

namespace {

std::string tmp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

ImageField random_image(int w, int h, int channels, std::uint64_t seed) {
  testutil::Uniform u(seed);
  ImageField img;
  img.width = w;
  img.height = h;
  img.channels = channels;
  img.data.assign(std::size_t(channels), std::vector<double>(std::size_t(w) * std::size_t(h)));
  for (auto& ch : img.data) {
    // quantized values so a PNG round trip is exact
    for (auto& v : ch) v = double(int(u(0, 255.999))) / 255.0;
  }
  return img;
}

}  // namespace

TEST_CASE("PNG write/read round trip, grayscale and RGB") {
  for (int channels : {1, 3}) {
    const auto img = random_image(17, 9, channels, 7);
    const std::string path = tmp_path("fpm_png_test.png");
    write_png(path, img);
    const auto back = read_png(path);
    std::remove(path.c_str());
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    REQUIRE(back.channels == img.channels);
    for (int c = 0; c < channels; ++c) {
      for (std::size_t p = 0; p < img.data[std::size_t(c)].size(); ++p) {
        CHECK(back.data[std::size_t(c)][p] ==
              doctest::Approx(img.data[std::size_t(c)][p]).epsilon(1e-12));
      }
    }
  }
  CHECK_THROWS_AS(read_png("/nonexistent/image.png"), std::runtime_error);
}

TEST_CASE("image_to_density: floor, orientation, and the paper-sized shape") {
  ImageField img;
  img.width = 2;
  img.height = 2;
  img.channels = 1;
  // top row: 1.0, 0.0 / bottom row: 0.5, 0.25
  img.data = {{1.0, 0.0, 0.5, 0.25}};
  const auto fields = image_to_density(img, 1e-3);
  REQUIRE(fields.size() == 1);
  // grid row 0 is the bottom image row
  CHECK(fields[0][0] == 0.5);
  CHECK(fields[0][1] == 0.25);
  CHECK(fields[0][2] == 1.0);
  CHECK(fields[0][3] == 1e-3);  // floored zero
  for (double v : fields[0]) CHECK(v > 0.0);

  // all-white image maps to a uniform field of 1
  ImageField white;
  white.width = 3;
  white.height = 2;
  white.channels = 1;
  white.data = {std::vector<double>(6, 1.0)};
  for (double v : image_to_density(white, 1e-3)[0]) CHECK(v == 1.0);

  // an RGB image of the size used in the reference experiments
  ImageField big;
  big.width = 355;
  big.height = 575;
  big.channels = 3;
  big.data.assign(3, std::vector<double>(355 * 575, 0.5));
  const auto three = image_to_density(big, 1e-3);
  REQUIRE(three.size() == 3);
  for (const auto& f : three) CHECK(f.size() == 204125);

  CHECK_THROWS_AS(image_to_density(ImageField{}, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(image_to_density(white, 0.7), std::invalid_argument);
}

TEST_CASE("density_to_image: clipping and the round trip") {
  const GridShape shape{4, 3, 1.0, 1.0};
  std::vector<double> field(12, 0.5);
  field[0] = 1.7;  // above display range
  const auto img = density_to_image(shape, {std::span<const double>(field)}, true);
  CHECK(img.data[0][std::size_t(2 * 4 + 0)] == 1.0);  // grid (0,0) is the bottom-left pixel

  // round trip through both mappings for values above the floor
  const auto src = random_image(6, 5, 3, 11);
  const auto fields = image_to_density(src, 1e-3);
  std::vector<std::span<const double>> views(fields.begin(), fields.end());
  const auto back = density_to_image({6, 5, 1.0, 1.0}, views, true);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t p = 0; p < src.data[std::size_t(c)].size(); ++p) {
      if (src.data[std::size_t(c)][p] >= 1e-3) {
        CHECK(back.data[std::size_t(c)][p] == src.data[std::size_t(c)][p]);
      }
    }
  }
}

TEST_CASE("error log: header, row counts, and exact parse-back") {
  ConvergenceReport report;
  const std::string path = tmp_path("fpm_errors_test.csv");

  // empty series: header only
  write_error_log(report, path);
  CHECK(read_error_log(path).empty());

  // three channels, two recorded steps -> six data rows
  report.steps = {0, 1};
  report.times = {0.0, 0.25};
  testutil::Uniform u(13);
  for (const char* tag : {"r", "g", "b"}) {
    ChannelSeries ch;
    ch.tag = tag;
    ch.errors = {u(0, 1), u(0, 1) * 1e-7};
    ch.mass = {1.0, 1.0};
    report.channels.push_back(ch);
  }
  write_error_log(report, path);
  const auto rows = read_error_log(path);
  std::remove(path.c_str());
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].channel == "r");
  CHECK(rows[1].channel == "g");
  CHECK(rows[2].channel == "b");
  CHECK(rows[3].step == 1);
  for (int c = 0; c < 3; ++c) {
    // 17 significant digits reproduce the doubles bit for bit
    CHECK(rows[std::size_t(c)].error == report.channels[std::size_t(c)].errors[0]);
    CHECK(rows[std::size_t(3 + c)].error == report.channels[std::size_t(c)].errors[1]);
    CHECK(rows[std::size_t(3 + c)].time == 0.25);
  }
}

TEST_CASE("metadata sidecar is ordered key=value text") {
  const std::string path = tmp_path("fpm_meta_test.txt");
  write_metadata({{"mode", "grid"}, {"dt", "0.01"}}, path);
  std::FILE* fp = std::fopen(path.c_str(), "r");
  REQUIRE(fp);
  char buf[64];
  REQUIRE(std::fgets(buf, sizeof buf, fp));
  CHECK(std::string(buf) == "mode=grid\n");
  REQUIRE(std::fgets(buf, sizeof buf, fp));
  CHECK(std::string(buf) == "dt=0.01\n");
  std::fclose(fp);
  std::remove(path.c_str());
}

TEST_CASE("levels files round-trip and validate") {
  const std::string path = tmp_path("fpm_levels_test.txt");
  const std::vector<char> levels{'s', 'b', 'b', 's', 'b'};
  write_levels(path, levels);
  const auto back = read_levels(path, 5);
  CHECK(back == levels);
  CHECK_THROWS_AS(read_levels(path, 6), std::runtime_error);  // missing assignment
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_levels(path, 5), std::runtime_error);  // gone
}

TEST_CASE("rasterize_levels samples an equirectangular mask at the generators") {
  // northern hemisphere white, southern black
  ImageField mask;
  mask.width = 64;
  mask.height = 32;
  mask.channels = 1;
  mask.data.assign(1, std::vector<double>(64 * 32, 0.0));
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 64; ++x) mask.data[0][std::size_t(y) * 64 + std::size_t(x)] = 1.0;
  }
  const auto tess = sphere_voronoi_geometry(testutil::random_sphere_points(60, 17));
  const auto levels = rasterize_levels(tess, mask, 0.5);
  for (int i = 0; i < tess.size(); ++i) {
    if (std::abs(tess.points[std::size_t(i)].z) > 0.1) {
      CHECK(levels[std::size_t(i)] == (tess.points[std::size_t(i)].z > 0 ? 'b' : 's'));
    }
  }
}

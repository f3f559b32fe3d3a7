#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "grid.hpp"
#include "report.hpp"
#include "sphere_geometry.hpp"

namespace fpmorph {

// 8-bit raster decoded to [0,1] doubles; data[c][y*width + x] with y = 0 at
// the top row. channels is 1 (grayscale) or 3 (RGB).
struct ImageField {
  int width = 0, height = 0;
  int channels = 0;
  std::vector<std::vector<double>> data;

  void validate() const;
};

ImageField read_png(const std::string& path);
void write_png(const std::string& path, const ImageField& img);

// Pixel values clamped from below by eps_floor so every density and
// equilibrium stays strictly positive. Image row 0 (top) maps to the top
// grid row: grid row j increases upward.
std::vector<std::vector<double>> image_to_density(const ImageField& img, double eps_floor);

// Inverse mapping; clip squashes values into [0,1] for display.
ImageField density_to_image(const GridShape& shape,
                            const std::vector<std::span<const double>>& fields, bool clip);

// CSV: header step,time,channel,rel_rms_error; one row per recorded step per
// channel, step-major; 17 significant digits.
void write_error_log(const ConvergenceReport& report, const std::string& path);

struct ErrorLogRow {
  long long step = 0;
  double time = 0.0;
  std::string channel;
  double error = 0.0;
};
std::vector<ErrorLogRow> read_error_log(const std::string& path);

// key=value sidecar.
void write_metadata(const std::vector<std::pair<std::string, std::string>>& kv,
                    const std::string& path);

// Human-readable run summary.
void write_report_text(const ConvergenceReport& report, const std::string& path);

// Level assignments for sphere runs: lines of "<cell index> <s|b>". Reading
// requires every cell in [0, n) to be assigned exactly once.
std::vector<char> read_levels(const std::string& path, int n);
void write_levels(const std::string& path, std::span<const char> levels);

// Samples an equirectangular mask at each generator; mask values >= threshold
// become 'b', the rest 's'.
std::vector<char> rasterize_levels(const SphereTessellation& tess, const ImageField& mask,
                                   double threshold);

// Writes frame_<step>.png per emission, plus the sidecar-compatible layout
// used by the pipelines.
class PngGridFrameSink final : public FrameSink {
 public:
  PngGridFrameSink(GridShape shape, std::string dir);
  void emit(long long step, double time,
            const std::vector<std::span<const double>>& channels) override;

 private:
  GridShape shape_;
  std::string dir_;
};

// Renders cloud values to equirectangular grayscale frames through a
// pixel-to-cell map computed once per tessellation.
class PngSphereFrameSink final : public FrameSink {
 public:
  PngSphereFrameSink(const SphereTessellation& tess, int width, int height, std::string dir);
  void emit(long long step, double time,
            const std::vector<std::span<const double>>& channels) override;
  // Renders one cell-value array to dir/<name> through the pixel map.
  void write_named(const std::string& name, std::span<const double> values) const;

 private:
  int width_, height_;
  std::string dir_;
  std::vector<int> cell_of_pixel_;
};

std::string frame_filename(long long step);

}  // namespace fpmorph

#include "media.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fpmorph {

void ImageField::validate() const {
  if (width < 1 || height < 1) throw std::invalid_argument("empty image");
  if (channels != 1 && channels != 3) {
    throw std::invalid_argument("image must have 1 or 3 channels");
  }
  if (int(data.size()) != channels) throw std::invalid_argument("channel count mismatch");
  for (const auto& ch : data) {
    if (ch.size() != std::size_t(width) * std::size_t(height)) {
      throw std::invalid_argument("channel size mismatch");
    }
    for (double v : ch) {
      if (!(v >= 0.0) || !(v <= 1.0)) throw std::invalid_argument("pixel value outside [0,1]");
    }
  }
}

ImageField read_png(const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw std::runtime_error("cannot open image: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw std::runtime_error("libpng initialization failed");
  }

  ImageField img;
  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw std::runtime_error("failed to decode PNG: " + path);
  }

  png_init_io(png, fp);
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (depth == 16) png_set_strip_16(png);
  png_set_strip_alpha(png);  // drops native alpha and alpha introduced by tRNS expansion
  png_read_update_info(png, info);

  const int width = int(png_get_image_width(png, info));
  const int height = int(png_get_image_height(png, info));
  const int nch = int(png_get_channels(png, info));
  if (width < 1 || height < 1 || (nch != 1 && nch != 3)) {
    longjmp(png_jmpbuf(png), 1);
  }

  pixels.resize(std::size_t(width) * std::size_t(height) * std::size_t(nch));
  rows.resize(std::size_t(height));
  for (int y = 0; y < height; ++y) {
    rows[std::size_t(y)] = pixels.data() + std::size_t(y) * std::size_t(width) * std::size_t(nch);
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);

  img.width = width;
  img.height = height;
  img.channels = nch;
  img.data.assign(std::size_t(nch), std::vector<double>(std::size_t(width) * std::size_t(height)));
  for (std::size_t p = 0; p < std::size_t(width) * std::size_t(height); ++p) {
    for (int c = 0; c < nch; ++c) {
      img.data[std::size_t(c)][p] = double(pixels[p * std::size_t(nch) + std::size_t(c)]) / 255.0;
    }
  }
  return img;
}

void write_png(const std::string& path, const ImageField& img) {
  img.validate();
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw std::runtime_error("cannot open image for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw std::runtime_error("libpng initialization failed");
  }

  std::vector<unsigned char> pixels(std::size_t(img.width) * std::size_t(img.height) *
                                    std::size_t(img.channels));
  std::vector<png_bytep> rows(std::size_t(img.height));
  for (std::size_t p = 0; p < std::size_t(img.width) * std::size_t(img.height); ++p) {
    for (int c = 0; c < img.channels; ++c) {
      const double v = img.data[std::size_t(c)][p];
      pixels[p * std::size_t(img.channels) + std::size_t(c)] =
          (unsigned char)(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    }
  }
  for (int y = 0; y < img.height; ++y) {
    rows[std::size_t(y)] =
        pixels.data() + std::size_t(y) * std::size_t(img.width) * std::size_t(img.channels);
  }

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw std::runtime_error("failed to encode PNG: " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fclose(fp) != 0) throw std::runtime_error("failed to write PNG: " + path);
}

std::vector<std::vector<double>> image_to_density(const ImageField& img, double eps_floor) {
  img.validate();
  if (!(eps_floor > 0.0) || !(eps_floor < 0.5)) {
    throw std::invalid_argument("eps_floor must be in (0, 0.5)");
  }
  std::vector<std::vector<double>> fields(
      std::size_t(img.channels),
      std::vector<double>(std::size_t(img.width) * std::size_t(img.height)));
  for (int c = 0; c < img.channels; ++c) {
    for (int y = 0; y < img.height; ++y) {
      const int j = img.height - 1 - y;  // flip: grid row j increases upward
      for (int x = 0; x < img.width; ++x) {
        fields[std::size_t(c)][std::size_t(j) * std::size_t(img.width) + std::size_t(x)] =
            std::max(img.data[std::size_t(c)][std::size_t(y) * std::size_t(img.width) +
                                              std::size_t(x)],
                     eps_floor);
      }
    }
  }
  return fields;
}

ImageField density_to_image(const GridShape& shape,
                            const std::vector<std::span<const double>>& fields, bool clip) {
  if (fields.empty() || (fields.size() != 1 && fields.size() != 3)) {
    throw std::invalid_argument("need 1 or 3 fields");
  }
  ImageField img;
  img.width = shape.n_cols;
  img.height = shape.n_rows;
  img.channels = int(fields.size());
  img.data.assign(fields.size(),
                  std::vector<double>(std::size_t(shape.n_cols) * std::size_t(shape.n_rows)));
  for (std::size_t c = 0; c < fields.size(); ++c) {
    if (int(fields[c].size()) != shape.cell_count()) {
      throw std::invalid_argument("field size does not match shape");
    }
    for (int y = 0; y < shape.n_rows; ++y) {
      const int j = shape.n_rows - 1 - y;
      for (int x = 0; x < shape.n_cols; ++x) {
        double v = fields[c][std::size_t(j) * std::size_t(shape.n_cols) + std::size_t(x)];
        if (clip) v = std::clamp(v, 0.0, 1.0);
        img.data[c][std::size_t(y) * std::size_t(shape.n_cols) + std::size_t(x)] = v;
      }
    }
  }
  img.validate();
  return img;
}

void write_error_log(const ConvergenceReport& report, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot open error log for writing: " + path);
  std::fprintf(fp, "step,time,channel,rel_rms_error\n");
  for (std::size_t k = 0; k < report.steps.size(); ++k) {
    for (const auto& ch : report.channels) {
      std::fprintf(fp, "%lld,%.17g,%s,%.17g\n", report.steps[k], report.times[k], ch.tag.c_str(),
                   ch.errors[k]);
    }
  }
  if (std::fclose(fp) != 0) throw std::runtime_error("failed to write error log: " + path);
}

std::vector<ErrorLogRow> read_error_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open error log: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "step,time,channel,rel_rms_error") {
    throw std::runtime_error("error log has an unexpected header");
  }
  std::vector<ErrorLogRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    ErrorLogRow row;
    std::string tok;
    if (!std::getline(is, tok, ',')) throw std::runtime_error("bad error log row");
    row.step = std::stoll(tok);
    if (!std::getline(is, tok, ',')) throw std::runtime_error("bad error log row");
    row.time = std::strtod(tok.c_str(), nullptr);
    if (!std::getline(is, row.channel, ',')) throw std::runtime_error("bad error log row");
    if (!std::getline(is, tok)) throw std::runtime_error("bad error log row");
    row.error = std::strtod(tok.c_str(), nullptr);
    rows.push_back(row);
  }
  return rows;
}

void write_metadata(const std::vector<std::pair<std::string, std::string>>& kv,
                    const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot open metadata file for writing: " + path);
  for (const auto& [k, v] : kv) std::fprintf(fp, "%s=%s\n", k.c_str(), v.c_str());
  if (std::fclose(fp) != 0) throw std::runtime_error("failed to write metadata: " + path);
}

void write_report_text(const ConvergenceReport& report, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot open report for writing: " + path);
  for (const auto& [k, v] : report.metadata) std::fprintf(fp, "%s = %s\n", k.c_str(), v.c_str());
  std::fprintf(fp, "total_steps = %lld\n", report.total_steps);
  if (report.sharp) {
    std::fprintf(fp, "converged = %s\n", report.converged ? "yes" : "no");
    if (report.converged) {
      std::fprintf(fp, "converged_round = %lld\n", report.converged_round);
      std::fprintf(fp, "converged_step = %lld\n", report.converged_step);
    }
    double worst = 0.0;
    for (double r : report.threshold_residuals) worst = std::max(worst, std::abs(r));
    std::fprintf(fp, "projections = %zu\n", report.threshold_residuals.size());
    std::fprintf(fp, "max_threshold_residual = %.17g\n", worst);
  }
  for (const auto& ch : report.channels) {
    std::fprintf(fp, "[channel %s]\n", ch.tag.c_str());
    std::fprintf(fp, "mass_scale = %.17g\n", ch.mass_scale);
    if (!ch.errors.empty()) {
      std::fprintf(fp, "initial_error = %.17g\n", ch.errors.front());
      std::fprintf(fp, "final_error = %.17g\n", ch.errors.back());
      std::fprintf(fp, "initial_mass = %.17g\n", ch.mass.front());
      std::fprintf(fp, "final_mass = %.17g\n", ch.mass.back());
    }
    if (ch.fit.valid) {
      std::fprintf(fp, "fitted_rate = %.17g\n", ch.fit.rate);
      std::fprintf(fp, "fit_r_squared = %.17g\n", ch.fit.r_squared);
      std::fprintf(fp, "fit_converged_series = %s\n", ch.fit.converged_series ? "yes" : "no");
    }
  }
  if (std::fclose(fp) != 0) throw std::runtime_error("failed to write report: " + path);
}

std::vector<char> read_levels(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open levels file: " + path);
  std::vector<char> levels(std::size_t(n), 0);
  std::string line;
  int assigned = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    int idx = -1;
    std::string tag;
    if (!(is >> idx >> tag) || (tag != "s" && tag != "b")) {
      throw std::runtime_error("levels file: expected '<index> <s|b>' lines");
    }
    if (idx < 0 || idx >= n) throw std::runtime_error("levels file: cell index out of range");
    if (levels[std::size_t(idx)] != 0) {
      throw std::runtime_error("levels file: duplicate cell assignment");
    }
    levels[std::size_t(idx)] = tag[0];
    ++assigned;
  }
  if (assigned != n) throw std::runtime_error("levels file: not every cell is assigned");
  return levels;
}

void write_levels(const std::string& path, std::span<const char> levels) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot open levels file for writing: " + path);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    std::fprintf(fp, "%zu %c\n", i, levels[i]);
  }
  if (std::fclose(fp) != 0) throw std::runtime_error("failed to write levels: " + path);
}

std::vector<char> rasterize_levels(const SphereTessellation& tess, const ImageField& mask,
                                   double threshold) {
  mask.validate();
  std::vector<char> levels(std::size_t(tess.size()));
  for (int i = 0; i < tess.size(); ++i) {
    const Vec3& p = tess.points[std::size_t(i)];
    const double lat = std::asin(std::clamp(p.z, -1.0, 1.0));
    const double lon = std::atan2(p.y, p.x);
    const int x = std::clamp(int((lon + std::numbers::pi) / (2.0 * std::numbers::pi) *
                                 double(mask.width)),
                             0, mask.width - 1);
    const int y = std::clamp(int((0.5 * std::numbers::pi - lat) / std::numbers::pi *
                                 double(mask.height)),
                             0, mask.height - 1);
    const double v = mask.data[0][std::size_t(y) * std::size_t(mask.width) + std::size_t(x)];
    levels[std::size_t(i)] = v >= threshold ? 'b' : 's';
  }
  return levels;
}

std::string frame_filename(long long step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%08lld.png", step);
  return buf;
}

PngGridFrameSink::PngGridFrameSink(GridShape shape, std::string dir)
    : shape_(shape), dir_(std::move(dir)) {}

void PngGridFrameSink::emit(long long step, double,
                            const std::vector<std::span<const double>>& channels) {
  write_png(dir_ + "/" + frame_filename(step), density_to_image(shape_, channels, true));
}

PngSphereFrameSink::PngSphereFrameSink(const SphereTessellation& tess, int width, int height,
                                       std::string dir)
    : width_(width), height_(height), dir_(std::move(dir)) {
  if (width_ < 1 || height_ < 1) throw std::invalid_argument("frame size must be positive");
  cell_of_pixel_.resize(std::size_t(width_) * std::size_t(height_));
  for (int y = 0; y < height_; ++y) {
    const double lat = 0.5 * std::numbers::pi - (double(y) + 0.5) / double(height_) *
                                                    std::numbers::pi;
    for (int x = 0; x < width_; ++x) {
      const double lon = (double(x) + 0.5) / double(width_) * 2.0 * std::numbers::pi -
                         std::numbers::pi;
      const Vec3 dir{std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
      int best = 0;
      double best_dot = -2.0;
      for (int i = 0; i < tess.size(); ++i) {
        const double d = dot(dir, tess.points[std::size_t(i)]);
        if (d > best_dot) {
          best_dot = d;
          best = i;
        }
      }
      cell_of_pixel_[std::size_t(y) * std::size_t(width_) + std::size_t(x)] = best;
    }
  }
}

void PngSphereFrameSink::write_named(const std::string& name,
                                     std::span<const double> values) const {
  ImageField img;
  img.width = width_;
  img.height = height_;
  img.channels = 1;
  img.data.assign(1, std::vector<double>(cell_of_pixel_.size()));
  for (std::size_t p = 0; p < cell_of_pixel_.size(); ++p) {
    img.data[0][p] = std::clamp(values[std::size_t(cell_of_pixel_[p])], 0.0, 1.0);
  }
  write_png(dir_ + "/" + name, img);
}

void PngSphereFrameSink::emit(long long step, double,
                              const std::vector<std::span<const double>>& channels) {
  write_named(frame_filename(step), channels.front());
}

}  // namespace fpmorph

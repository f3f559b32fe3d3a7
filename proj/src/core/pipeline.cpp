#include "pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "diagnostics.hpp"
#include "grid.hpp"
#include "markov.hpp"
#include "media.hpp"
#include "thresholding.hpp"

namespace fpmorph {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string channel_tag(int channels, int c) {
  if (channels == 1) return "gray";
  return c == 0 ? "r" : (c == 1 ? "g" : "b");
}

void prepare_output_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory: " + dir);
}

void write_outputs(const ConvergenceReport& report, const std::string& dir) {
  write_error_log(report, dir + "/errors.csv");
  write_report_text(report, dir + "/report.txt");
  write_metadata(report.metadata, dir + "/run_meta.txt");
}

std::vector<double> levels_to_values(const std::vector<char>& levels, double pi_s, double pi_b) {
  std::vector<double> values(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    values[i] = levels[i] == 'b' ? pi_b : pi_s;
  }
  return values;
}

}  // namespace

ConvergenceReport run_grid_pipeline(const GridRunConfig& cfg) {
  const ImageField init = read_png(cfg.initial_png);
  const ImageField target = read_png(cfg.target_png);
  if (init.width != target.width || init.height != target.height ||
      init.channels != target.channels) {
    throw std::invalid_argument("initial and target images must have identical dimensions");
  }
  const GridShape shape{init.width, init.height, cfg.dx, cfg.dy};
  shape.validate();

  const auto rho_fields = image_to_density(init, cfg.eps_floor);
  const auto pi_fields = image_to_density(target, cfg.eps_floor);

  ChannelSet set;
  for (int c = 0; c < init.channels; ++c) {
    GridChannel ch{channel_tag(init.channels, c),
                   GridEquilibrium(shape, pi_fields[std::size_t(c)], cfg.dt),
                   rho_fields[std::size_t(c)], 1.0};
    ch.mass_scale = adjust_initial_mass(ch.eq, ch.rho);
    set.channels.push_back(std::move(ch));
  }

  prepare_output_dir(cfg.output_dir);
  {
    std::vector<std::span<const double>> pis;
    for (auto& ch : set.channels) pis.emplace_back(ch.eq.pi());
    write_png(cfg.output_dir + "/equilibrium.png", density_to_image(shape, pis, true));
  }
  PngGridFrameSink sink(shape, cfg.output_dir);
  ConvergenceReport report = run_grid(set, cfg.n_steps, cfg.frame_stride, sink);

  report.add_meta("mode", "grid");
  report.add_meta("initial", cfg.initial_png);
  report.add_meta("target", cfg.target_png);
  report.add_meta("width", std::to_string(shape.n_cols));
  report.add_meta("height", std::to_string(shape.n_rows));
  report.add_meta("channels", std::to_string(init.channels));
  report.add_meta("dt", fmt(cfg.dt));
  report.add_meta("dx", fmt(cfg.dx));
  report.add_meta("dy", fmt(cfg.dy));
  report.add_meta("eps_floor", fmt(cfg.eps_floor));
  report.add_meta("n_steps", std::to_string(cfg.n_steps));
  report.add_meta("frame_stride", std::to_string(cfg.frame_stride));
  for (const auto& ch : set.channels) {
    report.add_meta("mass_scale_" + ch.tag, fmt(ch.mass_scale));
  }
  report.add_meta("error_metric", "sqrt(mean((rho/pi - 1)^2))");
  write_outputs(report, cfg.output_dir);
  return report;
}

ConvergenceReport run_grid_sharp_pipeline(const GridRunConfig& cfg) {
  const ImageField init = read_png(cfg.initial_png);
  const ImageField target = read_png(cfg.target_png);
  if (init.width != target.width || init.height != target.height ||
      init.channels != target.channels) {
    throw std::invalid_argument("initial and target images must have identical dimensions");
  }
  const GridShape shape{init.width, init.height, cfg.dx, cfg.dy};
  shape.validate();

  SharpConfig sharp;
  sharp.pi_s = cfg.pi_s;
  sharp.pi_b = cfg.pi_b;
  sharp.bisection_tol = cfg.bisection_tol;
  sharp.max_rounds = cfg.max_rounds;
  sharp.schedule.kind = ThresholdSchedule::Kind::Constant;
  sharp.schedule.constant_steps = cfg.linear_steps_per_round;
  sharp.validate();

  // Binarize at mid-gray onto the configured levels; sharp dynamics are
  // defined for two-valued fields only.
  auto binarize = [&](const ImageField& img, int c) {
    std::vector<double> field(std::size_t(img.width) * std::size_t(img.height));
    for (int y = 0; y < img.height; ++y) {
      const int j = img.height - 1 - y;
      for (int x = 0; x < img.width; ++x) {
        const double v =
            img.data[std::size_t(c)][std::size_t(y) * std::size_t(img.width) + std::size_t(x)];
        field[std::size_t(j) * std::size_t(img.width) + std::size_t(x)] =
            v >= 0.5 ? cfg.pi_b : cfg.pi_s;
      }
    }
    return field;
  };

  std::vector<GridEquilibrium> eqs;
  std::vector<SharpChannel> channels;
  for (int c = 0; c < init.channels; ++c) {
    std::vector<double> pi = binarize(target, c);
    eqs.emplace_back(shape, pi, cfg.dt);
    SharpChannel ch;
    ch.tag = channel_tag(init.channels, c);
    ch.pi = std::move(pi);
    ch.rho = binarize(init, c);
    ch.weights.assign(eqs.back().weights().begin(), eqs.back().weights().end());
    channels.push_back(std::move(ch));
  }

  prepare_output_dir(cfg.output_dir);
  {
    std::vector<std::span<const double>> pis;
    for (auto& ch : channels) pis.emplace_back(ch.pi);
    write_png(cfg.output_dir + "/equilibrium.png", density_to_image(shape, pis, true));
  }
  PngGridFrameSink sink(shape, cfg.output_dir);
  LinearStep step = [&](int c, std::span<const double> in, std::span<double> out) {
    fp_step_grid(eqs[std::size_t(c)], in, out);
  };
  ConvergenceReport report =
      sharp_evolve(channels, sharp, step, cfg.dt, cfg.frame_stride, sink);

  report.add_meta("mode", "grid-sharp");
  report.add_meta("initial", cfg.initial_png);
  report.add_meta("target", cfg.target_png);
  report.add_meta("width", std::to_string(shape.n_cols));
  report.add_meta("height", std::to_string(shape.n_rows));
  report.add_meta("channels", std::to_string(init.channels));
  report.add_meta("dt", fmt(cfg.dt));
  report.add_meta("dx", fmt(cfg.dx));
  report.add_meta("dy", fmt(cfg.dy));
  report.add_meta("pi_s", fmt(cfg.pi_s));
  report.add_meta("pi_b", fmt(cfg.pi_b));
  report.add_meta("bisection_tol", fmt(cfg.bisection_tol));
  report.add_meta("linear_steps_per_round", std::to_string(cfg.linear_steps_per_round));
  report.add_meta("max_rounds", std::to_string(cfg.max_rounds));
  report.add_meta("frame_stride", std::to_string(cfg.frame_stride));
  report.add_meta("error_metric", "sqrt(mean((rho/pi - 1)^2))");
  write_outputs(report, cfg.output_dir);
  return report;
}

ConvergenceReport run_sphere_pipeline(const SphereTessellation& tess, const SphereRunConfig& cfg) {
  const auto init_levels = read_levels(cfg.initial_levels, tess.size());
  const auto target_levels = read_levels(cfg.target_levels, tess.size());

  CloudState state;
  state.pi = levels_to_values(target_levels, cfg.pi_s, cfg.pi_b);
  state.rho = levels_to_values(init_levels, cfg.pi_s, cfg.pi_b);
  const MarkovRates rates = build_rates(tess, state.pi, cfg.dt);
  state.mass_scale = adjust_initial_mass_cloud(rates, state.pi, state.rho);

  prepare_output_dir(cfg.output_dir);
  PngSphereFrameSink sink(tess, cfg.frame_width, cfg.frame_height, cfg.output_dir);
  sink.write_named("equilibrium.png", state.pi);
  ConvergenceReport report = run_cloud(state, rates, cfg.n_steps, cfg.frame_stride, sink);

  report.add_meta("mode", "sphere");
  report.add_meta("initial", cfg.initial_levels);
  report.add_meta("target", cfg.target_levels);
  report.add_meta("cells", std::to_string(tess.size()));
  report.add_meta("dt", fmt(cfg.dt));
  report.add_meta("pi_s", fmt(cfg.pi_s));
  report.add_meta("pi_b", fmt(cfg.pi_b));
  report.add_meta("n_steps", std::to_string(cfg.n_steps));
  report.add_meta("frame_stride", std::to_string(cfg.frame_stride));
  report.add_meta("mass_scale_gray", fmt(state.mass_scale));
  report.add_meta("error_metric", "sqrt(mean((rho/pi - 1)^2))");
  write_outputs(report, cfg.output_dir);
  return report;
}

ConvergenceReport run_sphere_sharp_pipeline(const SphereTessellation& tess,
                                            const SphereRunConfig& cfg) {
  const auto init_levels = read_levels(cfg.initial_levels, tess.size());
  const auto target_levels = read_levels(cfg.target_levels, tess.size());

  SharpConfig sharp;
  sharp.pi_s = cfg.pi_s;
  sharp.pi_b = cfg.pi_b;
  sharp.bisection_tol = cfg.bisection_tol;
  sharp.max_rounds = cfg.max_rounds;
  sharp.schedule.kind =
      cfg.ramp_schedule ? ThresholdSchedule::Kind::Ramp : ThresholdSchedule::Kind::Constant;
  sharp.schedule.constant_steps = cfg.linear_steps_per_round;
  sharp.validate();

  SharpChannel ch;
  ch.pi = levels_to_values(target_levels, cfg.pi_s, cfg.pi_b);
  ch.rho = levels_to_values(init_levels, cfg.pi_s, cfg.pi_b);
  const MarkovRates rates = build_rates(tess, ch.pi, cfg.dt);
  ch.weights = rates.mass_weight;
  std::vector<double> pi_copy = ch.pi;

  std::vector<SharpChannel> channels;
  channels.push_back(std::move(ch));

  prepare_output_dir(cfg.output_dir);
  PngSphereFrameSink sink(tess, cfg.frame_width, cfg.frame_height, cfg.output_dir);
  sink.write_named("equilibrium.png", pi_copy);
  LinearStep step = [&](int, std::span<const double> in, std::span<double> out) {
    fp_step_cloud(rates, pi_copy, in, out);
  };
  ConvergenceReport report =
      sharp_evolve(channels, sharp, step, cfg.dt, cfg.frame_stride, sink);

  report.add_meta("mode", "sphere-sharp");
  report.add_meta("initial", cfg.initial_levels);
  report.add_meta("target", cfg.target_levels);
  report.add_meta("cells", std::to_string(tess.size()));
  report.add_meta("dt", fmt(cfg.dt));
  report.add_meta("pi_s", fmt(cfg.pi_s));
  report.add_meta("pi_b", fmt(cfg.pi_b));
  report.add_meta("bisection_tol", fmt(cfg.bisection_tol));
  report.add_meta("schedule", cfg.ramp_schedule
                                  ? "ramp"
                                  : "constant:" + std::to_string(cfg.linear_steps_per_round));
  report.add_meta("max_rounds", std::to_string(cfg.max_rounds));
  report.add_meta("frame_stride", std::to_string(cfg.frame_stride));
  report.add_meta("error_metric", "sqrt(mean((rho/pi - 1)^2))");
  write_outputs(report, cfg.output_dir);
  return report;
}

double grid_mu2_from_png(const std::string& target_png, double dt, double dx, double dy,
                         double eps_floor) {
  const ImageField target = read_png(target_png);
  const auto pi_fields = image_to_density(target, eps_floor);
  return dense_operator_mu2_grid(target.width, target.height, dx, dy, pi_fields[0], dt);
}

double sphere_mu2_from_levels(const SphereTessellation& tess, const std::string& levels_path,
                              double pi_s, double pi_b, double dt) {
  const auto levels = read_levels(levels_path, tess.size());
  const auto pi = levels_to_values(levels, pi_s, pi_b);
  const MarkovRates rates = build_rates(tess, pi, dt);
  return dense_operator_mu2_cloud(rates, pi);
}

}  // namespace fpmorph

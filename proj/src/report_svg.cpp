#include "ntd/report_svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"
#include "ntd/io_util.hpp"

namespace ntd {

namespace {

struct Rgb {
  int r, g, b;
};

// Task colors, reused across every panel so a community keeps its color.
constexpr Rgb kPalette[] = {
    {214, 39, 40},  {31, 119, 180}, {44, 160, 44},  {255, 127, 14},
    {148, 103, 189}, {140, 86, 75},  {227, 119, 194}, {127, 127, 127},
};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

Rgb task_color(std::size_t c) { return kPalette[c % kPaletteSize]; }

/// Linear white -> color ramp; t in [0,1].
std::string ramp(Rgb color, double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255 + t * (color.r - 255)));
  const int g = static_cast<int>(std::lround(255 + t * (color.g - 255)));
  const int b = static_cast<int>(std::lround(255 + t * (color.b - 255)));
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string rgb_str(Rgb c) { return ramp(c, 1.0); }

double block_max(const Mat& U, std::size_t row, std::size_t from, std::size_t to) {
  double m = 0.0;
  for (std::size_t l = from; l < to; ++l) m = std::max(m, U(row, l));
  return m;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void validate(const ReportSpec& spec, std::size_t i0) {
  using L = ReportSpec::Layout;
  if (spec.layout == L::grid && spec.grid_w * spec.grid_h != i0)
    throw std::invalid_argument("report: grid " + std::to_string(spec.grid_w) +
                                "x" + std::to_string(spec.grid_h) +
                                " does not cover " + std::to_string(i0) +
                                " input dims");
  if (spec.layout == L::series && spec.series_count * spec.series_window != i0)
    throw std::invalid_argument("report: series " + std::to_string(spec.series_count) +
                                ":" + std::to_string(spec.series_window) +
                                " does not cover " + std::to_string(i0) +
                                " input dims");
}

}  // namespace

ReportSpec parse_report_layout(const std::string& text) {
  ReportSpec spec;
  if (text == "bar") {
    spec.layout = ReportSpec::Layout::bar;
    return spec;
  }
  if (text.rfind("grid:", 0) == 0) {
    unsigned w = 0, h = 0;
    if (std::sscanf(text.c_str(), "grid:%ux%u", &w, &h) == 2 && w > 0 && h > 0) {
      spec.layout = ReportSpec::Layout::grid;
      spec.grid_w = w;
      spec.grid_h = h;
      return spec;
    }
  }
  if (text.rfind("series:", 0) == 0) {
    unsigned s = 0, w = 0;
    if (std::sscanf(text.c_str(), "series:%u:%u", &s, &w) == 2 && s > 0 && w > 0) {
      spec.layout = ReportSpec::Layout::series;
      spec.series_count = s;
      spec.series_window = w;
      return spec;
    }
  }
  throw std::invalid_argument("report: bad layout '" + text +
                              "' (want bar, grid:WxH or series:S:W)");
}

std::string render_report_svg(const Mat& U, std::size_t input_block_width,
                              const ReportSpec& spec) {
  const std::size_t i0 = input_block_width;
  const std::size_t j0 = U.cols - i0;
  validate(spec, i0);
  using L = ReportSpec::Layout;

  const double margin = 18.0;
  const double title_h = 22.0;
  const double out_bar_w = 14.0;
  double in_w, in_h, cell = 0.0;
  if (spec.layout == L::bar) {
    const double bw = std::max(3.0, std::min(12.0, 560.0 / static_cast<double>(i0)));
    in_w = bw * static_cast<double>(i0);
    in_h = 80.0;
  } else {
    const std::size_t gw = spec.layout == L::grid ? spec.grid_w : spec.series_window;
    const std::size_t gh = spec.layout == L::grid ? spec.grid_h : spec.series_count;
    cell = std::max(3.0, std::min(14.0, 420.0 / static_cast<double>(gw)));
    in_w = cell * static_cast<double>(gw);
    in_h = std::max(80.0, cell * static_cast<double>(gh));
  }
  const double gap = 26.0;
  const double out_w = out_bar_w * static_cast<double>(j0);
  const double panel_w = margin * 2 + in_w + gap + out_w;
  const double panel_h = title_h + in_h + margin + 14.0;
  const double width = panel_w;
  const double height = panel_h * static_cast<double>(U.rows) + margin;

  std::string svg;
  char buf[512];
  auto add = [&](const char* fmt_str, auto first, auto... args) {
    std::snprintf(buf, sizeof(buf), fmt_str, first, args...);
    svg += buf;
  };
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  add("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
      "viewBox=\"0 0 %.0f %.0f\">\n", width, height, width, height);
  add("<rect x=\"0\" y=\"0\" width=\"%.0f\" height=\"%.0f\" fill=\"white\"/>\n",
      width, height);

  for (std::size_t c = 0; c < U.rows; ++c) {
    const double top = panel_h * static_cast<double>(c) + margin;
    const Rgb color = task_color(c);
    const double in_max = block_max(U, c, 0, i0);
    const double out_max = block_max(U, c, i0, U.cols);
    add("<text x=\"%.0f\" y=\"%.0f\" font-family=\"sans-serif\" font-size=\"13\" "
        "fill=\"%s\">Task %zu (input max %s, output max %s)</text>\n",
        margin, top + 13.0, rgb_str(color).c_str(), c, fmt(in_max).c_str(),
        fmt(out_max).c_str());
    const double y0 = top + title_h;

    if (spec.layout == L::bar) {
      const double bw = in_w / static_cast<double>(i0);
      for (std::size_t l = 0; l < i0; ++l) {
        const double t = in_max > 0.0 ? U(c, l) / in_max : 0.0;
        const double h = t * in_h;
        add("<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\"/>\n",
            margin + bw * static_cast<double>(l), y0 + in_h - h, bw * 0.9, h,
            rgb_str(color).c_str());
      }
    } else {
      const std::size_t gw = spec.layout == L::grid ? spec.grid_w : spec.series_window;
      const std::size_t gh = spec.layout == L::grid ? spec.grid_h : spec.series_count;
      for (std::size_t gy = 0; gy < gh; ++gy) {
        for (std::size_t gx = 0; gx < gw; ++gx) {
          const std::size_t l = gy * gw + gx;
          const double t = in_max > 0.0 ? U(c, l) / in_max : 0.0;
          add("<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
              "fill=\"%s\"/>\n",
              margin + cell * static_cast<double>(gx),
              y0 + cell * static_cast<double>(gy), cell, cell,
              ramp(color, t).c_str());
        }
      }
    }
    // Input/output separator.
    add("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#888\" "
        "stroke-dasharray=\"3,3\"/>\n",
        margin + in_w + gap / 2, y0, margin + in_w + gap / 2, y0 + in_h);
    // Output block: labeled bars.
    for (std::size_t j = 0; j < j0; ++j) {
      const double t = out_max > 0.0 ? U(c, i0 + j) / out_max : 0.0;
      const double h = t * in_h;
      const double x = margin + in_w + gap + out_bar_w * static_cast<double>(j);
      add("<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\"/>\n",
          x, y0 + in_h - h, out_bar_w * 0.85, h, rgb_str(color).c_str());
      add("<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"8\" "
          "fill=\"#444\">%zu</text>\n", x, y0 + in_h + 10.0, j);
    }
    add("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#444\"/>\n",
        margin, y0 + in_h, margin + in_w + gap + out_w, y0 + in_h);
  }
  svg += "</svg>\n";
  return svg;
}

std::string report_to_json(const Mat& U, std::size_t input_block_width,
                           const ReportSpec& spec) {
  validate(spec, input_block_width);
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  using L = ReportSpec::Layout;
  j["layout"] = spec.layout == L::bar ? "bar"
               : spec.layout == L::grid ? "grid" : "series";
  if (spec.layout == L::grid) {
    j["grid_w"] = spec.grid_w;
    j["grid_h"] = spec.grid_h;
  } else if (spec.layout == L::series) {
    j["series_count"] = spec.series_count;
    j["series_window"] = spec.series_window;
  }
  j["tasks"] = U.rows;
  j["input_block_width"] = input_block_width;
  auto tasks = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < U.rows; ++c) {
    nlohmann::ordered_json t;
    t["task"] = c;
    t["input_max"] = block_max(U, c, 0, input_block_width);
    t["output_max"] = block_max(U, c, input_block_width, U.cols);
    t["values"] = std::vector<double>(U.row(c), U.row(c) + U.cols);
    tasks.push_back(std::move(t));
  }
  j["task_vectors"] = std::move(tasks);
  return j.dump();
}

}  // namespace ntd

#pragma once

#include <string>

#include "ntd/matrix.hpp"

namespace ntd {

/// How the input block of each task vector is drawn:
///   bar           one bar per dimension, input/output blocks separated
///   grid WxH      input block as a WxH heatmap (image data)
///   series SxW    input block as an S-series x W-lags heatmap
/// Output blocks are always labeled bars. Values map linearly from 0
/// (white) to the block maximum (full task color).
struct ReportSpec {
  enum class Layout { bar, grid, series } layout = Layout::bar;
  std::size_t grid_w = 0, grid_h = 0;
  std::size_t series_count = 0, series_window = 0;
};

/// Parses "bar", "grid:WxH" or "series:S:W".
ReportSpec parse_report_layout(const std::string& text);

/// One panel per task (row of U). Returns a well-formed standalone SVG.
std::string render_report_svg(const Mat& U, std::size_t input_block_width,
                              const ReportSpec& spec);

/// Machine-readable companion: per-task block maxima and values.
std::string report_to_json(const Mat& U, std::size_t input_block_width,
                           const ReportSpec& spec);

}  // namespace ntd

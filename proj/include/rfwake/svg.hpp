#pragma once

// Self-contained SVG writers: ECDF step plots (one metric, all policies
// overlaid) and the learned-POD curve with its training data.

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rfwake/gpr.hpp"
#include "rfwake/metrics.hpp"
#include "rfwake/selftrain.hpp"
#include "rfwake/util.hpp"

namespace rfwake {

namespace svg_detail {

constexpr int kW = 640, kH = 440;
constexpr int kL = 70, kR = 30, kT = 46, kB = 56;  // margins

inline std::string color_for(const std::string& policy) {
  if (policy == "always") return "#d62728";
  if (policy == "rnd") return "#ff7f0e";
  if (policy == "gt") return "#2ca02c";
  if (policy == "s2gpr") return "#1f77b4";
  return "#7f7f7f";
}

struct Axes {
  double x0, x1, y0, y1;
  double px(double x) const { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); }
  double py(double y) const { return kH - kB - (y - y0) / (y1 - y0) * (kH - kT - kB); }
};

inline std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline void draw_frame(std::ostringstream& o, const Axes& a,
                       const std::string& title, const std::string& xlabel,
                       const std::string& ylabel) {
  o << "<rect x='" << kL << "' y='" << kT << "' width='" << (kW - kL - kR)
    << "' height='" << (kH - kT - kB)
    << "' fill='none' stroke='#333' stroke-width='1'/>\n";
  o << "<text x='" << kW / 2 << "' y='24' text-anchor='middle' "
       "font-size='15' font-family='sans-serif'>" << title << "</text>\n";
  o << "<text x='" << kW / 2 << "' y='" << (kH - 14)
    << "' text-anchor='middle' font-size='13' font-family='sans-serif'>"
    << xlabel << "</text>\n";
  o << "<text x='18' y='" << kH / 2
    << "' text-anchor='middle' font-size='13' font-family='sans-serif' "
       "transform='rotate(-90 18 " << kH / 2 << ")'>" << ylabel << "</text>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = a.x0 + (a.x1 - a.x0) * i / 5.0;
    const double yv = a.y0 + (a.y1 - a.y0) * i / 5.0;
    o << "<line x1='" << a.px(xv) << "' y1='" << (kH - kB) << "' x2='" << a.px(xv)
      << "' y2='" << (kH - kB + 5) << "' stroke='#333'/>\n";
    o << "<text x='" << a.px(xv) << "' y='" << (kH - kB + 18)
      << "' text-anchor='middle' font-size='11' font-family='sans-serif'>"
      << fmt_tick(xv) << "</text>\n";
    o << "<line x1='" << (kL - 5) << "' y1='" << a.py(yv) << "' x2='" << kL
      << "' y2='" << a.py(yv) << "' stroke='#333'/>\n";
    o << "<text x='" << (kL - 8) << "' y='" << (a.py(yv) + 4)
      << "' text-anchor='end' font-size='11' font-family='sans-serif'>"
      << fmt_tick(yv) << "</text>\n";
  }
}

}  // namespace svg_detail

// One metric, one ECDF step curve per policy.
inline std::string ecdf_plot_svg(
    const std::map<std::string, std::vector<double>>& samples_by_policy,
    const std::string& title, const std::string& xlabel) {
  using namespace svg_detail;
  double lo = 0.0, hi = 1.0;
  bool first = true;
  for (const auto& [policy, samples] : samples_by_policy)
    for (double v : samples) {
      if (first) { lo = hi = v; first = false; }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (hi - lo < 1e-12) { lo -= 0.5; hi += 0.5; }
  const double pad = 0.05 * (hi - lo);
  Axes a{lo - pad, hi + pad, 0.0, 1.0};

  std::ostringstream o;
  o << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='"
    << kH << "' viewBox='0 0 " << kW << " " << kH << "'>\n";
  o << "<rect width='100%' height='100%' fill='white'/>\n";
  draw_frame(o, a, title, xlabel, "empirical CDF");

  int legend_row = 0;
  for (const auto& [policy, samples] : samples_by_policy) {
    const EcdfCurve curve = ecdf(samples);
    const std::size_t n = curve.sorted.size();
    std::ostringstream pts;
    pts << a.px(a.x0) << ',' << a.py(0);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = a.px(curve.sorted[i]);
      pts << ' ' << x << ',' << a.py(static_cast<double>(i) / n);
      pts << ' ' << x << ',' << a.py(static_cast<double>(i + 1) / n);
    }
    pts << ' ' << a.px(a.x1) << ',' << a.py(1.0);
    o << "<polyline fill='none' stroke='" << color_for(policy)
      << "' stroke-width='2' points='" << pts.str() << "'/>\n";

    const int ly = kT + 16 + 18 * legend_row++;
    o << "<line x1='" << (kL + 12) << "' y1='" << ly << "' x2='" << (kL + 40)
      << "' y2='" << ly << "' stroke='" << color_for(policy)
      << "' stroke-width='2'/>\n";
    o << "<text x='" << (kL + 46) << "' y='" << (ly + 4)
      << "' font-size='12' font-family='sans-serif'>" << policy << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

// Learned POD over RSSI: GP mean with a +/-2 sigma band and the training data.
inline std::string pod_curve_svg(const GprModel& model,
                                 const TrainingDataset& dataset) {
  using namespace svg_detail;
  double rlo = model.inputs().front(), rhi = rlo;
  for (double r : model.inputs()) {
    rlo = std::min(rlo, r);
    rhi = std::max(rhi, r);
  }
  const double pad = 0.03 * (rhi - rlo);
  Axes a{rlo - pad, rhi + pad, -0.1, 1.15};

  std::ostringstream o;
  o << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='"
    << kH << "' viewBox='0 0 " << kW << " " << kH << "'>\n";
  o << "<rect width='100%' height='100%' fill='white'/>\n";
  draw_frame(o, a, "learned probability of detection", "RSSI [dBm]",
             "probability of detection");

  const int grid_n = 200;
  std::vector<double> grid(grid_n), mean(grid_n), sd(grid_n);
  for (int i = 0; i < grid_n; ++i) {
    grid[i] = a.x0 + (a.x1 - a.x0) * i / (grid_n - 1);
    const PodPrediction p = model.predict(grid[i]);
    mean[i] = p.mean;
    sd[i] = std::sqrt(p.variance);
  }

  std::ostringstream band;
  for (int i = 0; i < grid_n; ++i)
    band << (i ? " " : "") << a.px(grid[i]) << ',' << a.py(mean[i] + 2 * sd[i]);
  for (int i = grid_n - 1; i >= 0; --i)
    band << ' ' << a.px(grid[i]) << ',' << a.py(mean[i] - 2 * sd[i]);
  o << "<polygon fill='#2ca02c' fill-opacity='0.15' stroke='none' points='"
    << band.str() << "'/>\n";

  for (const auto& p : dataset.pairs)
    o << "<circle cx='" << a.px(p.rssi) << "' cy='" << a.py(p.label)
      << "' r='2' fill='black' fill-opacity='0.35'/>\n";

  std::ostringstream line;
  for (int i = 0; i < grid_n; ++i)
    line << (i ? " " : "") << a.px(grid[i]) << ',' << a.py(mean[i]);
  o << "<polyline fill='none' stroke='#2ca02c' stroke-width='2.5' points='"
    << line.str() << "'/>\n";
  o << "</svg>\n";
  return o.str();
}

}  // namespace rfwake

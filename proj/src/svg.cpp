#include "crackpath/svg.hpp"

#include <cstdio>

namespace crackpath::svg {

namespace {

// Fixed-precision coordinates keep the output byte-stable.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.7g", v);
  return buf;
}

void polyline(std::string& out, const std::vector<geometry::Point2>& pts, const char* style) {
  out += "  <polyline fill=\"none\" ";
  out += style;
  out += " points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i != 0) out += ' ';
    out += num(pts[i].x);
    out += ',';
    out += num(pts[i].y);
  }
  out += "\"/>\n";
}

}  // namespace

std::string render_overlay(const geometry::Microstructure& m,
                           const prediction::Ensemble* ensemble,
                           const analysis::EnsembleStatistics* stats) {
  const double w = m.width;
  const double h = m.height;
  const double stroke = 0.0015 * std::max(w, h);

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" viewBox=\"0 0 " + num(w) +
         " " + num(h) + "\">\n";
  // Flip the y axis so the origin sits at the bottom-left corner.
  out += "<g transform=\"translate(0," + num(h) + ") scale(1,-1)\">\n";
  out += "  <rect x=\"0\" y=\"0\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" fill=\"#ffffff\" stroke=\"#000000\" stroke-width=\"" + num(stroke) + "\"/>\n";

  for (const auto& a : m.aggregates) {
    out += "  <polygon fill=\"#c9c9c9\" stroke=\"#7a7a7a\" stroke-width=\"" +
           num(0.5 * stroke) + "\" points=\"";
    for (std::size_t i = 0; i < a.vertices.size(); ++i) {
      if (i != 0) out += ' ';
      out += num(a.vertices[i].x);
      out += ',';
      out += num(a.vertices[i].y);
    }
    out += "\"/>\n";
  }

  if (ensemble != nullptr) {
    const std::string path_style =
        "stroke=\"#8fb0dd\" stroke-opacity=\"0.55\" stroke-width=\"" + num(0.6 * stroke) + "\"";
    for (const auto& p : ensemble->paths) polyline(out, p.points, path_style.c_str());

    if (stats != nullptr) {
      if (stats->region) {
        std::vector<geometry::Point2> lower(stats->region->grid.size());
        std::vector<geometry::Point2> upper(stats->region->grid.size());
        for (std::size_t j = 0; j < stats->region->grid.size(); ++j) {
          lower[j] = {stats->region->grid[j], stats->region->lower[j]};
          upper[j] = {stats->region->grid[j], stats->region->upper[j]};
        }
        const std::string region_style = "stroke=\"#d03434\" stroke-dasharray=\"" +
                                         num(4.0 * stroke) + " " + num(2.5 * stroke) +
                                         "\" stroke-width=\"" + num(1.2 * stroke) + "\"";
        polyline(out, lower, region_style.c_str());
        polyline(out, upper, region_style.c_str());
      }
      const std::string median_style =
          "stroke=\"#2f9e44\" stroke-width=\"" + num(1.8 * stroke) + "\"";
      polyline(out, ensemble->paths[stats->median_index].points, median_style.c_str());
    }
  }

  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace crackpath::svg

#include "wmmzi/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace wmmzi {

namespace {

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void grow(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(hi > lo)) {
      lo -= 1.0;
      hi += 1.0;
    }
    const double margin = 0.06 * (hi - lo);
    lo -= margin;
    hi += margin;
  }
};

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

// Round tick step to 1/2/5 decades.
double tick_step(double span) {
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double mantissa = raw / mag;
  if (mantissa < 1.5) return mag;
  if (mantissa < 3.5) return 2.0 * mag;
  if (mantissa < 7.5) return 5.0 * mag;
  return 10.0 * mag;
}

}  // namespace

std::string render_chart(const PlotLayout& layout,
                         const std::vector<PlotSeries>& series) {
  Range xr, yr;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xr.grow(s.x[i]);
      const double e = i < s.yerr.size() ? s.yerr[i] : 0.0;
      yr.grow(s.y[i] - e);
      yr.grow(s.y[i] + e);
    }
  }
  yr.grow(0.0);  // rate plots read better anchored at zero
  xr.pad();
  yr.pad();

  const double left = 72, right = 24, top = 40, bottom = 56;
  const double pw = layout.width - left - right;
  const double ph = layout.height - top - bottom;
  const auto px = [&](double x) {
    return left + (x - xr.lo) / (xr.hi - xr.lo) * pw;
  };
  const auto py = [&](double y) {
    return top + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph;
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!layout.provenance.empty()) {
    svg << "<!-- " << layout.provenance << " -->\n";
  }
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << layout.width
      << "\" height=\"" << layout.height << "\" viewBox=\"0 0 " << layout.width
      << " " << layout.height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << layout.width / 2 << "\" y=\"24\" text-anchor=\"middle\""
      << " font-family=\"sans-serif\" font-size=\"16\">" << layout.title
      << "</text>\n";

  // Axes and ticks.
  svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  const double xstep = tick_step(xr.hi - xr.lo);
  for (double t = std::ceil(xr.lo / xstep) * xstep; t <= xr.hi; t += xstep) {
    svg << "<line x1=\"" << fmt(px(t)) << "\" y1=\"" << top << "\" x2=\""
        << fmt(px(t)) << "\" y2=\"" << top + ph
        << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << fmt(px(t)) << "\" y=\"" << top + ph + 16
        << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
  }
  const double ystep = tick_step(yr.hi - yr.lo);
  for (double t = std::ceil(yr.lo / ystep) * ystep; t <= yr.hi; t += ystep) {
    svg << "<line x1=\"" << left << "\" y1=\"" << fmt(py(t)) << "\" x2=\""
        << left + pw << "\" y2=\"" << fmt(py(t))
        << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << left - 6 << "\" y=\"" << fmt(py(t) + 4)
        << "\" text-anchor=\"end\">" << fmt(t) << "</text>\n";
  }
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#333\"/>\n";
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << layout.height - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">" << layout.x_label
      << "</text>\n";
  svg << "<text x=\"18\" y=\"" << top + ph / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
      << top + ph / 2 << ")\">" << layout.y_label << "</text>\n";
  svg << "</g>\n";

  double legend_y = top + 14;
  for (const auto& s : series) {
    if (s.line) {
      svg << "<polyline fill=\"none\" stroke=\"" << s.color
          << "\" stroke-width=\"1.6\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        svg << fmt(px(s.x[i])) << "," << fmt(py(s.y[i])) << " ";
      }
      svg << "\"/>\n";
    } else {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i < s.yerr.size() && s.yerr[i] > 0.0) {
          svg << "<line x1=\"" << fmt(px(s.x[i])) << "\" y1=\""
              << fmt(py(s.y[i] - s.yerr[i])) << "\" x2=\"" << fmt(px(s.x[i]))
              << "\" y2=\"" << fmt(py(s.y[i] + s.yerr[i])) << "\" stroke=\""
              << s.color << "\" stroke-width=\"1\"/>\n";
        }
        svg << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\""
            << fmt(py(s.y[i])) << "\" r=\"2.4\" fill=\"" << s.color
            << "\"/>\n";
      }
    }
    if (!s.label.empty()) {
      svg << "<circle cx=\"" << left + pw - 150 << "\" cy=\"" << legend_y - 4
          << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
      svg << "<text x=\"" << left + pw - 142 << "\" y=\"" << legend_y
          << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label
          << "</text>\n";
      legend_y += 16;
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_chart(const std::string& path, const PlotLayout& layout,
                 const std::vector<PlotSeries>& series) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << render_chart(layout, series);
}

}  // namespace wmmzi

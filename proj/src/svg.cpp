#include "roughscale/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace roughscale::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 110.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Blue-white-red diverging ramp on t in [-1, 1].
std::string diverging(double t) {
  t = std::clamp(t, -1.0, 1.0);
  int r = 255, g = 255, b = 255;
  if (t < 0) {
    r = static_cast<int>(std::lround(255 * (1 + t) + 33 * -t));
    g = static_cast<int>(std::lround(255 * (1 + t) + 102 * -t));
    b = static_cast<int>(std::lround(255 * (1 + t) + 172 * -t));
  } else {
    r = static_cast<int>(std::lround(255 * (1 - t) + 178 * t));
    g = static_cast<int>(std::lround(255 * (1 - t) + 24 * t));
    b = static_cast<int>(std::lround(255 * (1 - t) + 43 * t));
  }
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double m = 0.05 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

void header(std::ostringstream& os, const Axes& axes) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(axes.title)
     << "</text>\n";
  os << "<text x=\"" << kLeft + (kWidth - kLeft - kRight) / 2 << "\" y=\"" << kHeight - 15
     << "\" text-anchor=\"middle\">" << escape(axes.x_label) << "</text>\n";
  os << "<text x=\"18\" y=\"" << kTop + (kHeight - kTop - kBottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << kTop + (kHeight - kTop - kBottom) / 2 << ")\">" << escape(axes.y_label) << "</text>\n";
}

// Frame plus 5 ticks per axis.
void frame(std::ostringstream& os, const Range& xr, const Range& yr) {
  const double w = kWidth - kLeft - kRight;
  const double h = kHeight - kTop - kBottom;
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << w << "\" height=\"" << h
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = kLeft + w * k / 4.0;
    const double fy = kTop + h - h * k / 4.0;
    os << "<text x=\"" << fmt(fx) << "\" y=\"" << kTop + h + 16 << "\" text-anchor=\"middle\">"
       << fmt(xr.lo + (xr.hi - xr.lo) * k / 4.0) << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt(fy + 4) << "\" text-anchor=\"end\">"
       << fmt(yr.lo + (yr.hi - yr.lo) * k / 4.0) << "</text>\n";
  }
}

const char* kPalette[] = {"#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e"};

}  // namespace

std::string heatmap(const std::vector<std::vector<double>>& values, const std::vector<double>& row_coords,
                    const std::vector<double>& col_coords, const Axes& axes) {
  std::ostringstream os;
  header(os, axes);
  const std::size_t rows = values.size();
  const std::size_t cols = rows ? values[0].size() : 0;
  double vmax = 0.0;
  for (const auto& r : values)
    for (double v : r)
      if (std::isfinite(v)) vmax = std::max(vmax, std::abs(v));
  if (vmax == 0.0) vmax = 1.0;

  const double w = kWidth - kLeft - kRight;
  const double h = kHeight - kTop - kBottom;
  const double cw = cols ? w / static_cast<double>(cols) : w;
  const double ch = rows ? h / static_cast<double>(rows) : h;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = values[i][j];
      const std::string fill = std::isfinite(v) ? diverging(v / vmax) : std::string("#cccccc");
      os << "<rect x=\"" << fmt(kLeft + cw * j) << "\" y=\"" << fmt(kTop + h - ch * (i + 1)) << "\" width=\""
         << fmt(cw + 0.3) << "\" height=\"" << fmt(ch + 0.3) << "\" fill=\"" << fill << "\"><title>" << fmt(v)
         << "</title></rect>\n";
    }
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << w << "\" height=\"" << h
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  // Sparse tick labels at cell centres.
  const std::size_t col_step = std::max<std::size_t>(1, cols / 8);
  for (std::size_t j = 0; j < cols && j < col_coords.size(); j += col_step)
    os << "<text x=\"" << fmt(kLeft + cw * (j + 0.5)) << "\" y=\"" << kTop + h + 16 << "\" text-anchor=\"middle\">"
       << fmt(col_coords[j]) << "</text>\n";
  const std::size_t row_step = std::max<std::size_t>(1, rows / 10);
  for (std::size_t i = 0; i < rows && i < row_coords.size(); i += row_step)
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt(kTop + h - ch * (i + 0.5) + 4) << "\" text-anchor=\"end\">"
       << fmt(row_coords[i]) << "</text>\n";

  // Colour bar.
  const double bx = kWidth - kRight + 25;
  for (int k = 0; k < 50; ++k) {
    const double t = 1.0 - 2.0 * k / 49.0;
    os << "<rect x=\"" << bx << "\" y=\"" << fmt(kTop + h * k / 50.0) << "\" width=\"18\" height=\"" << fmt(h / 50.0 + 0.3)
       << "\" fill=\"" << diverging(t) << "\"/>\n";
  }
  os << "<text x=\"" << bx + 22 << "\" y=\"" << kTop + 8 << "\">" << fmt(vmax) << "</text>\n";
  os << "<text x=\"" << bx + 22 << "\" y=\"" << kTop + h / 2 + 4 << "\">0</text>\n";
  os << "<text x=\"" << bx + 22 << "\" y=\"" << kTop + h << "\">" << fmt(-vmax) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string line_plot(const std::vector<Series>& series, const Axes& axes) {
  Range xr, yr;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xr.add(s.x[i]);
      const double e = i < s.err.size() && std::isfinite(s.err[i]) ? s.err[i] : 0.0;
      yr.add(s.y[i] - e);
      yr.add(s.y[i] + e);
    }
  xr.pad();
  yr.pad();
  const double w = kWidth - kLeft - kRight;
  const double h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + w * (x - xr.lo) / (xr.hi - xr.lo); };
  auto py = [&](double y) { return kTop + h - h * (y - yr.lo) / (yr.hi - yr.lo); };

  std::ostringstream os;
  header(os, axes);
  frame(os, xr, yr);
  if (yr.lo < 0 && yr.hi > 0)
    os << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + w << "\" y1=\"" << fmt(py(0)) << "\" y2=\"" << fmt(py(0))
       << "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = kPalette[k % 6];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (std::isfinite(s.y[i])) pts += fmt(px(s.x[i])) + "," + fmt(py(s.y[i])) + " ";
    os << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      if (i < s.err.size() && std::isfinite(s.err[i]) && s.err[i] > 0)
        os << "<line x1=\"" << fmt(px(s.x[i])) << "\" x2=\"" << fmt(px(s.x[i])) << "\" y1=\""
           << fmt(py(s.y[i] - s.err[i])) << "\" y2=\"" << fmt(py(s.y[i] + s.err[i])) << "\" stroke=\"" << colour
           << "\"/>\n";
      os << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\"" << fmt(py(s.y[i])) << "\" r=\"3\" fill=\"" << colour
         << "\"/>\n";
    }
    os << "<text x=\"" << kWidth - kRight + 10 << "\" y=\"" << kTop + 16 * (k + 1) << "\" fill=\"" << colour << "\">"
       << escape(s.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string scatter(const std::vector<double>& x, const std::vector<double>& y, const std::vector<std::string>& labels,
                    const std::vector<int>& highlight, const Axes& axes) {
  Range xr, yr;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xr.add(x[i]);
    yr.add(y[i]);
  }
  xr.pad();
  yr.pad();
  const double w = kWidth - kLeft - kRight;
  const double h = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + w * (v - xr.lo) / (xr.hi - xr.lo); };
  auto py = [&](double v) { return kTop + h - h * (v - yr.lo) / (yr.hi - yr.lo); };

  std::ostringstream os;
  header(os, axes);
  frame(os, xr, yr);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    const bool hot = std::find(highlight.begin(), highlight.end(), static_cast<int>(i)) != highlight.end();
    os << "<circle cx=\"" << fmt(px(x[i])) << "\" cy=\"" << fmt(py(y[i])) << "\" r=\"4\" fill=\""
       << (hot ? "#d62728" : "#1f77b4") << "\"/>\n";
    if (i < labels.size())
      os << "<text x=\"" << fmt(px(x[i]) + 5) << "\" y=\"" << fmt(py(y[i]) - 5) << "\" font-size=\"9\">"
         << escape(labels[i]) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace roughscale::svg

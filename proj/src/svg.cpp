#include "krein/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace krein::svg {

namespace {

constexpr double kMarginLeft = 64;
constexpr double kMarginRight = 18;
constexpr double kMarginTop = 36;
constexpr double kMarginBottom = 48;

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  if (std::abs(v) < 1e-12) v = 0;  // avoid "-0"
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = 0;
  double hi = 1;
};

void absorb(Range& r, double v, bool& seen) {
  if (!std::isfinite(v)) return;
  if (!seen) {
    r.lo = r.hi = v;
    seen = true;
  } else {
    r.lo = std::min(r.lo, v);
    r.hi = std::max(r.hi, v);
  }
}

Range padded(Range r) {
  if (r.hi <= r.lo) {
    const double c = r.lo;
    const double w = std::max(1.0, std::abs(c));
    return {c - w, c + w};
  }
  const double pad = 0.05 * (r.hi - r.lo);
  return {r.lo - pad, r.hi + pad};
}

/// Tick spacing of the form {1,2,5} * 10^k giving roughly five intervals.
double nice_step(const Range& r) {
  const double raw = (r.hi - r.lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  double step;
  if (norm < 1.5)
    step = 1;
  else if (norm < 3.5)
    step = 2;
  else if (norm < 7.5)
    step = 5;
  else
    step = 10;
  return step * mag;
}

std::vector<double> ticks(const Range& r) {
  const double step = nice_step(r);
  std::vector<double> out;
  double t = std::ceil(r.lo / step - 1e-9) * step;
  for (; t <= r.hi + 1e-9 * step; t += step) out.push_back(t);
  return out;
}

class Mapper {
 public:
  Mapper(const Range& xr, const Range& yr, double width, double height)
      : xr_(xr), yr_(yr), width_(width), height_(height) {}
  double px(double x) const {
    return kMarginLeft + (x - xr_.lo) / (xr_.hi - xr_.lo) * (width_ - kMarginLeft - kMarginRight);
  }
  double py(double y) const {
    return height_ - kMarginBottom -
           (y - yr_.lo) / (yr_.hi - yr_.lo) * (height_ - kMarginTop - kMarginBottom);
  }

 private:
  Range xr_, yr_;
  double width_, height_;
};

void render_into(std::ostringstream& out, const Figure& fig, double y_offset) {
  Range xr, yr;
  bool x_seen = false, y_seen = false;
  for (const Series& s : fig.series) {
    for (double v : s.x) absorb(xr, v, x_seen);
    for (double v : s.y) absorb(yr, v, y_seen);
  }
  for (const Marker& m : fig.markers) {
    absorb(xr, m.x, x_seen);
    absorb(yr, m.y, y_seen);
  }
  if (fig.x_bounds)
    xr = {fig.x_bounds->lo, fig.x_bounds->hi};
  else
    xr = padded(xr);
  if (fig.y_bounds)
    yr = {fig.y_bounds->lo, fig.y_bounds->hi};
  else
    yr = padded(yr);

  const double w = fig.width, h = fig.height;
  const Mapper map(xr, yr, w, h);
  const double plot_x0 = kMarginLeft, plot_x1 = w - kMarginRight;
  const double plot_y0 = kMarginTop, plot_y1 = h - kMarginBottom;

  out << "<g transform=\"translate(0," << coord(y_offset) << ")\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h
      << "\" fill=\"#ffffff\"/>\n";

  // gridlines + ticks
  for (double t : ticks(xr)) {
    const double x = map.px(t);
    out << "<line x1=\"" << coord(x) << "\" y1=\"" << coord(plot_y0) << "\" x2=\"" << coord(x)
        << "\" y2=\"" << coord(plot_y1) << "\" stroke=\"#e6e8eb\" stroke-width=\"1\"/>\n";
    out << "<line x1=\"" << coord(x) << "\" y1=\"" << coord(plot_y1) << "\" x2=\"" << coord(x)
        << "\" y2=\"" << coord(plot_y1 + 5) << "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << coord(x) << "\" y=\"" << coord(plot_y1 + 18)
        << "\" font-family=\"monospace\" font-size=\"11\" fill=\"#333333\" "
           "text-anchor=\"middle\">"
        << tick_label(t) << "</text>\n";
  }
  for (double t : ticks(yr)) {
    const double y = map.py(t);
    out << "<line x1=\"" << coord(plot_x0) << "\" y1=\"" << coord(y) << "\" x2=\""
        << coord(plot_x1) << "\" y2=\"" << coord(y)
        << "\" stroke=\"#e6e8eb\" stroke-width=\"1\"/>\n";
    out << "<line x1=\"" << coord(plot_x0 - 5) << "\" y1=\"" << coord(y) << "\" x2=\""
        << coord(plot_x0) << "\" y2=\"" << coord(y)
        << "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << coord(plot_x0 - 8) << "\" y=\"" << coord(y + 4)
        << "\" font-family=\"monospace\" font-size=\"11\" fill=\"#333333\" "
           "text-anchor=\"end\">"
        << tick_label(t) << "</text>\n";
  }

  // frame
  out << "<rect x=\"" << coord(plot_x0) << "\" y=\"" << coord(plot_y0) << "\" width=\""
      << coord(plot_x1 - plot_x0) << "\" height=\"" << coord(plot_y1 - plot_y0)
      << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";

  // series: one path per contiguous finite run
  for (const Series& s : fig.series) {
    std::string d;
    bool pen_down = false;
    const size_t n = std::min(s.x.size(), s.y.size());
    for (size_t i = 0; i < n; ++i) {
      const double xv = s.x[i], yv = s.y[i];
      if (!std::isfinite(xv) || !std::isfinite(yv)) {
        pen_down = false;
        continue;
      }
      d += pen_down ? " L " : (d.empty() ? "M " : " M ");
      d += coord(map.px(xv)) + " " + coord(map.py(yv));
      pen_down = true;
    }
    if (d.empty()) continue;
    out << "<path d=\"" << d << "\" fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"1.5\"";
    if (s.dashed) out << " stroke-dasharray=\"6 4\"";
    out << "/>\n";
  }

  // markers
  for (const Marker& m : fig.markers) {
    if (!std::isfinite(m.x) || !std::isfinite(m.y)) continue;
    const double x = map.px(m.x), y = map.py(m.y);
    switch (m.shape) {
      case MarkerShape::Circle:
        out << "<circle cx=\"" << coord(x) << "\" cy=\"" << coord(y)
            << "\" r=\"4\" fill=\"none\" stroke=\"" << m.color << "\" stroke-width=\"1.5\"/>\n";
        break;
      case MarkerShape::Cross:
        out << "<path d=\"M " << coord(x - 4) << " " << coord(y - 4) << " L " << coord(x + 4)
            << " " << coord(y + 4) << " M " << coord(x - 4) << " " << coord(y + 4) << " L "
            << coord(x + 4) << " " << coord(y - 4) << "\" stroke=\"" << m.color
            << "\" stroke-width=\"1.5\" fill=\"none\"/>\n";
        break;
      case MarkerShape::Square:
        out << "<rect x=\"" << coord(x - 3.5) << "\" y=\"" << coord(y - 3.5)
            << "\" width=\"7\" height=\"7\" fill=\"none\" stroke=\"" << m.color
            << "\" stroke-width=\"1.5\"/>\n";
        break;
    }
  }

  // labels
  if (!fig.title.empty())
    out << "<text x=\"" << coord((plot_x0 + plot_x1) / 2) << "\" y=\"" << coord(plot_y0 - 12)
        << "\" font-family=\"sans-serif\" font-size=\"14\" fill=\"#111111\" "
           "text-anchor=\"middle\">"
        << escape(fig.title) << "</text>\n";
  if (!fig.xlabel.empty())
    out << "<text x=\"" << coord((plot_x0 + plot_x1) / 2) << "\" y=\"" << coord(h - 12)
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\" "
           "text-anchor=\"middle\">"
        << escape(fig.xlabel) << "</text>\n";
  if (!fig.ylabel.empty())
    out << "<text x=\"16\" y=\"" << coord((plot_y0 + plot_y1) / 2)
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\" "
           "text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << coord((plot_y0 + plot_y1) / 2) << ")\">" << escape(fig.ylabel) << "</text>\n";

  // legend (top-right, inside the frame)
  double ly = plot_y0 + 16;
  auto legend_row = [&](const std::string& color, bool dashed, bool marker_cross,
                        const std::string& label) {
    const double lx = plot_x1 - 150;
    if (marker_cross) {
      out << "<path d=\"M " << coord(lx + 8) << " " << coord(ly - 8) << " L " << coord(lx + 16)
          << " " << coord(ly) << " M " << coord(lx + 8) << " " << coord(ly) << " L "
          << coord(lx + 16) << " " << coord(ly - 8) << "\" stroke=\"" << color
          << "\" stroke-width=\"1.5\" fill=\"none\"/>\n";
    } else {
      out << "<line x1=\"" << coord(lx) << "\" y1=\"" << coord(ly - 4) << "\" x2=\""
          << coord(lx + 24) << "\" y2=\"" << coord(ly - 4) << "\" stroke=\"" << color
          << "\" stroke-width=\"1.5\"";
      if (dashed) out << " stroke-dasharray=\"6 4\"";
      out << "/>\n";
    }
    out << "<text x=\"" << coord(lx + 30) << "\" y=\"" << coord(ly)
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">" << escape(label)
        << "</text>\n";
    ly += 16;
  };
  for (const Series& s : fig.series)
    if (!s.label.empty()) legend_row(s.color, s.dashed, false, s.label);
  // deduplicate marker legend entries by label
  std::vector<std::string> seen_labels;
  for (const Marker& m : fig.markers) {
    if (m.label.empty()) continue;
    if (std::find(seen_labels.begin(), seen_labels.end(), m.label) != seen_labels.end()) continue;
    seen_labels.push_back(m.label);
    legend_row(m.color, false, m.shape == MarkerShape::Cross, m.label);
  }

  out << "</g>\n";
}

}  // namespace

std::string render(const Figure& figure) { return render_panels({figure}); }

std::string render_panels(const std::vector<Figure>& figures) {
  double width = 0, height = 0;
  for (const Figure& f : figures) {
    width = std::max(width, static_cast<double>(f.width));
    height += f.height;
  }
  if (figures.empty()) {
    width = 640;
    height = 420;
  }
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  double offset = 0;
  for (const Figure& f : figures) {
    render_into(out, f, offset);
    offset += f.height;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace krein::svg

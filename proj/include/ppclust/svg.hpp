#ifndef PPCLUST_SVG_HPP
#define PPCLUST_SVG_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace ppclust {

struct Series {
  std::string name;
  std::vector<double> x, y;
  bool markers = false;  ///< dots instead of a polyline
};

/// Minimal line plot: one polyline per series, axes with min/max tick
/// labels and a legend, on a fixed 800x600 viewbox.
struct LinePlot {
  std::string title, x_label, y_label;
  std::vector<Series> series;
  bool log_x = false, log_y = false;

  std::string render() const {
    constexpr double W = 800, H = 600, left = 80, right = 180, top = 50, bottom = 60;
    const double pw = W - left - right, ph = H - top - bottom;
    auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
    auto usable = [&](double x, double y) {
      return std::isfinite(tx(x)) && std::isfinite(ty(y)) && (!log_x || x > 0) && (!log_y || y > 0);
    };
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
      for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
        if (!usable(s.x[i], s.y[i])) continue;
        x0 = std::min(x0, tx(s.x[i])), x1 = std::max(x1, tx(s.x[i]));
        y0 = std::min(y0, ty(s.y[i])), y1 = std::max(y1, ty(s.y[i]));
      }
    if (!(x0 <= x1)) x0 = 0, x1 = 1;
    if (!(y0 <= y1)) y0 = 0, y1 = 1;
    if (x0 == x1) x0 -= 0.5, x1 += 0.5;
    if (y0 == y1) y0 -= 0.5, y1 += 0.5;
    auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return top + ph - (ty(v) - y0) / (y1 - y0) * ph; };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" height=\"600\">\n";
    out += "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
    out += text(W / 2, 28, title, "middle", 18);
    out += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    auto label = [&](double v, bool logged) { return num(logged ? std::pow(10.0, v) : v); };
    out += text(left, top + ph + 20, label(x0, log_x), "start", 12);
    out += text(left + pw, top + ph + 20, label(x1, log_x), "end", 12);
    out += text(left - 6, top + ph, label(y0, log_y), "end", 12);
    out += text(left - 6, top + 12, label(y1, log_y), "end", 12);
    out += text(left + pw / 2, H - 15, x_label + (log_x ? " (log)" : ""), "middle", 14);
    out += "<text x=\"20\" y=\"" + num(top + ph / 2) + "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
           num(top + ph / 2) + ")\">" + escape(y_label + (log_y ? " (log)" : "")) + "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
      const auto& s = series[k];
      const char* colour = palette[k % std::size(palette)];
      std::string pts;
      for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
        if (!usable(s.x[i], s.y[i])) continue;
        if (s.markers)
          out += "<circle cx=\"" + num(px(s.x[i])) + "\" cy=\"" + num(py(s.y[i])) + "\" r=\"2\" fill=\"" + colour + "\"/>\n";
        else
          pts += (pts.empty() ? "" : " ") + num(px(s.x[i])) + "," + num(py(s.y[i]));
      }
      if (!s.markers)
        out += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
      const double ly = top + 10 + 22 * static_cast<double>(k);
      out += "<line x1=\"" + num(left + pw + 15) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(left + pw + 40) + "\" y2=\"" +
             num(ly) + "\" stroke=\"" + colour + "\" stroke-width=\"2\"/>\n";
      out += text(left + pw + 45, ly + 4, s.name, "start", 12);
    }
    return out + "</svg>\n";
  }

 private:
  static std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
  }
  static std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
      if (c == '<') o += "&lt;";
      else if (c == '>') o += "&gt;";
      else if (c == '&') o += "&amp;";
      else o += c;
    }
    return o;
  }
  static std::string text(double x, double y, const std::string& s, const char* anchor, int size) {
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + std::to_string(size) + "\" text-anchor=\"" +
           anchor + "\">" + escape(s) + "</text>\n";
  }
};

}  // namespace ppclust

#endif  // PPCLUST_SVG_HPP

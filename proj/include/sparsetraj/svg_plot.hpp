#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparsetraj {

/// Minimal static line plot written as a standalone SVG document.
class SvgPlot {
 public:
  struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color;
    bool dashed = false;
    bool markers = false;
  };

  SvgPlot(std::string title, std::string x_label, std::string y_label)
      : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

  void set_log_y(bool on) { log_y_ = on; }

  void add(Series s) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("series x and y differ in length");
    if (s.color.empty()) s.color = palette(series_.size());
    series_.push_back(std::move(s));
  }

  static std::string palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return colors[i % 10];
  }

  std::string render() const {
    constexpr double W = 720, H = 480, L = 80, R = 190, T = 40, B = 60;
    double x0 = inf(), x1 = -inf(), y0 = inf(), y1 = -inf();
    for (const Series& s : series_)
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!usable(s.y[i]) || !std::isfinite(s.x[i])) continue;
        x0 = std::min(x0, s.x[i]);
        x1 = std::max(x1, s.x[i]);
        y0 = std::min(y0, ty(s.y[i]));
        y1 = std::max(y1, ty(s.y[i]));
      }
    if (x0 > x1) x0 = 0, x1 = 1;
    if (y0 > y1) y0 = 0, y1 = 1;
    if (x0 == x1) x0 -= 0.5, x1 += 0.5;
    if (y0 == y1) y0 -= 0.5, y1 += 0.5;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    std::ostringstream o;
    o.precision(6);
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title_) << "</text>\n";
    o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
      << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (double t : ticks(x0, x1)) {
      o << "<line x1=\"" << px(t) << "\" y1=\"" << H - B << "\" x2=\"" << px(t) << "\" y2=\"" << H - B + 5
        << "\" stroke=\"black\"/>";
      o << "<text x=\"" << px(t) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
    }
    for (double t : ticks(y0, y1)) {
      o << "<line x1=\"" << L - 5 << "\" y1=\"" << py(t) << "\" x2=\"" << L << "\" y2=\"" << py(t)
        << "\" stroke=\"black\"/>";
      o << "<line x1=\"" << L << "\" y1=\"" << py(t) << "\" x2=\"" << W - R << "\" y2=\"" << py(t)
        << "\" stroke=\"#e5e5e5\"/>";
      const std::string lab = log_y_ ? "1e" + fmt(t) : fmt(t);
      o << "<text x=\"" << L - 8 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">" << lab << "</text>\n";
    }
    o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">" << escape(x_label_)
      << "</text>\n";
    o << "<text transform=\"translate(20," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(y_label_) << (log_y_ ? " (log10)" : "") << "</text>\n";

    for (std::size_t k = 0; k < series_.size(); ++k) {
      const Series& s = series_[k];
      std::ostringstream pts;
      pts.precision(7);
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (usable(s.y[i])) pts << px(s.x[i]) << ',' << py(ty(s.y[i])) << ' ';
      o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\""
        << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"" << pts.str() << "\"/>\n";
      if (s.markers)
        for (std::size_t i = 0; i < s.x.size(); ++i)
          if (usable(s.y[i]))
            o << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(ty(s.y[i])) << "\" r=\"2.5\" fill=\"" << s.color
              << "\"/>\n";
      const double ly = T + 14 + 18 * static_cast<double>(k);
      o << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R + 40 << "\" y2=\"" << ly - 4
        << "\" stroke=\"" << s.color << "\" stroke-width=\"1.8\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
        << "/>";
      o << "<text x=\"" << W - R + 46 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << render();
    if (!f) throw std::runtime_error("write failed: " + path.string());
  }

 private:
  static double inf() { return std::numeric_limits<double>::infinity(); }

  bool usable(double y) const { return std::isfinite(y) && (!log_y_ || y > 0.0); }
  double ty(double y) const { return log_y_ ? std::log10(y) : y; }

  static std::vector<double> ticks(double lo, double hi) {
    const double raw = (hi - lo) / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    const double step = (norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0) * mag;
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step)
      out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return out;
  }

  static std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
  }

  static std::string escape(const std::string& in) {
    std::string out;
    for (char c : in) {
      switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
      }
    }
    return out;
  }

  std::string title_, x_label_, y_label_;
  bool log_y_ = false;
  std::vector<Series> series_;
};

}  // namespace sparsetraj

#include "fertbandit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fertbandit::svg {

namespace {

const char* kPalette[] = {"#1b6ca8", "#d1495b", "#66a182", "#edae49",
                          "#8d6a9f", "#3c3c3c", "#00798c", "#b9314f"};
constexpr int kPaletteSize = 8;

const char* color(std::size_t i) { return kPalette[i % kPaletteSize]; }

std::string escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
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

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void include(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (lo == hi) {
      lo -= 1.0;
      hi += 1.0;
    }
    const double margin = 0.05 * (hi - lo);
    lo -= margin;
    hi += margin;
  }
};

struct Frame {
  double width = 640.0, height = 420.0;
  double left = 70.0, right = 160.0, top = 42.0, bottom = 52.0;
  Range xr, yr;

  double plot_w() const { return width - left - right; }
  double plot_h() const { return height - top - bottom; }
  double px(double x) const {
    return left + (x - xr.lo) / (xr.hi - xr.lo) * plot_w();
  }
  double py(double y) const {
    return top + plot_h() - (y - yr.lo) / (yr.hi - yr.lo) * plot_h();
  }
};

void open_doc(std::ostringstream& out, double w, double h,
              const std::string& title) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w)
      << "\" height=\"" << num(h) << "\" viewBox=\"0 0 " << num(w) << " "
      << num(h) << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << num(w / 2)
      << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">"
      << escape(title) << "</text>\n";
}

void draw_axes(std::ostringstream& out, const Frame& f,
               const std::string& x_label, const std::string& y_label) {
  out << "<rect x=\"" << num(f.left) << "\" y=\"" << num(f.top) << "\" width=\""
      << num(f.plot_w()) << "\" height=\"" << num(f.plot_h())
      << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = f.xr.lo + (f.xr.hi - f.xr.lo) * i / 4.0;
    const double fy = f.yr.lo + (f.yr.hi - f.yr.lo) * i / 4.0;
    const double gx = f.px(fx);
    const double gy = f.py(fy);
    out << "<line x1=\"" << num(gx) << "\" y1=\"" << num(f.top + f.plot_h())
        << "\" x2=\"" << num(gx) << "\" y2=\""
        << num(f.top + f.plot_h() + 4.0)
        << "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << num(gx) << "\" y=\""
        << num(f.top + f.plot_h() + 18.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"10\">"
        << num(fx) << "</text>\n";
    out << "<line x1=\"" << num(f.left - 4.0) << "\" y1=\"" << num(gy)
        << "\" x2=\"" << num(f.left) << "\" y2=\"" << num(gy)
        << "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << num(f.left - 7.0) << "\" y=\"" << num(gy + 3.0)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"10\">"
        << num(fy) << "</text>\n";
  }
  out << "<text x=\"" << num(f.left + f.plot_w() / 2.0) << "\" y=\""
      << num(f.top + f.plot_h() + 36.0)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\">"
      << escape(x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << num(f.top + f.plot_h() / 2.0)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\" transform=\"rotate(-90 16 "
      << num(f.top + f.plot_h() / 2.0) << ")\">" << escape(y_label)
      << "</text>\n";
}

void draw_legend(std::ostringstream& out, const Frame& f,
                 const std::vector<std::string>& labels) {
  const double lx = f.width - f.right + 12.0;
  double ly = f.top + 8.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\""
        << num(lx + 18.0) << "\" y2=\"" << num(ly) << "\" stroke=\""
        << color(i) << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(lx + 23.0) << "\" y=\"" << num(ly + 3.5)
        << "\" font-family=\"sans-serif\" font-size=\"10\">"
        << escape(labels[i]) << "</text>\n";
    ly += 16.0;
  }
}

void save(const std::string& path, const std::ostringstream& out) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot write plot file '" + path + "'");
  file << out.str();
  if (!file) throw std::runtime_error("write failed for plot file '" + path + "'");
}

void polyline(std::ostringstream& out, const Frame& f, const Series& s,
              std::size_t color_index) {
  out << "<polyline fill=\"none\" stroke=\"" << color(color_index)
      << "\" stroke-width=\"1.8\" points=\"";
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (i > 0) out << ' ';
    out << num(f.px(s.x[i])) << ',' << num(f.py(s.y[i]));
  }
  out << "\"/>\n";
}

}  // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
  Frame f;
  for (const auto& s : series) {
    for (double v : s.x) f.xr.include(v);
    for (double v : s.y) f.yr.include(v);
  }
  f.xr.finish();
  f.yr.finish();
  std::ostringstream out;
  open_doc(out, f.width, f.height, title);
  draw_axes(out, f, x_label, y_label);
  for (std::size_t i = 0; i < series.size(); ++i) polyline(out, f, series[i], i);
  std::vector<std::string> labels;
  for (const auto& s : series) labels.push_back(s.label);
  draw_legend(out, f, labels);
  out << "</svg>\n";
  save(path, out);
}

void write_box_chart(const std::string& path, const std::string& title,
                     const std::string& y_label,
                     const std::vector<std::string>& series_labels,
                     const std::vector<BoxGroup>& groups) {
  Frame f;
  const std::size_t n_series = series_labels.size();
  const double slots =
      static_cast<double>(groups.size() * (n_series + 1));
  f.xr.include(0.0);
  f.xr.include(slots);
  for (const auto& g : groups) {
    for (const auto& b : g.boxes) {
      const double iqr = b.q3 - b.q1;
      f.yr.include(std::max(b.lo, b.q1 - 1.5 * iqr));
      f.yr.include(std::min(b.hi, b.q3 + 1.5 * iqr));
      f.yr.include(b.median);
    }
  }
  f.xr.finish();
  f.yr.finish();
  std::ostringstream out;
  open_doc(out, f.width, f.height, title);
  // Axes without x ticks; group labels land under each cluster.
  out << "<rect x=\"" << num(f.left) << "\" y=\"" << num(f.top) << "\" width=\""
      << num(f.plot_w()) << "\" height=\"" << num(f.plot_h())
      << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fy = f.yr.lo + (f.yr.hi - f.yr.lo) * i / 4.0;
    const double gy = f.py(fy);
    out << "<text x=\"" << num(f.left - 7.0) << "\" y=\"" << num(gy + 3.0)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"10\">"
        << num(fy) << "</text>\n";
  }
  out << "<text x=\"16\" y=\"" << num(f.top + f.plot_h() / 2.0)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\" transform=\"rotate(-90 16 "
      << num(f.top + f.plot_h() / 2.0) << ")\">" << escape(y_label)
      << "</text>\n";
  const double box_w = f.plot_w() / slots * 0.7;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& g = groups[gi];
    const double base = static_cast<double>(gi * (n_series + 1));
    for (std::size_t si = 0; si < g.boxes.size() && si < n_series; ++si) {
      const auto& b = g.boxes[si];
      const double cx = f.px(base + static_cast<double>(si) + 1.0);
      const double iqr = b.q3 - b.q1;
      const double lo_w = std::max(b.lo, b.q1 - 1.5 * iqr);
      const double hi_w = std::min(b.hi, b.q3 + 1.5 * iqr);
      out << "<line x1=\"" << num(cx) << "\" y1=\"" << num(f.py(lo_w))
          << "\" x2=\"" << num(cx) << "\" y2=\"" << num(f.py(hi_w))
          << "\" stroke=\"" << color(si) << "\" stroke-width=\"1\"/>\n";
      out << "<rect x=\"" << num(cx - box_w / 2.0) << "\" y=\""
          << num(f.py(b.q3)) << "\" width=\"" << num(box_w) << "\" height=\""
          << num(std::max(0.5, f.py(b.q1) - f.py(b.q3))) << "\" fill=\""
          << color(si) << "\" fill-opacity=\"0.35\" stroke=\"" << color(si)
          << "\"/>\n";
      out << "<line x1=\"" << num(cx - box_w / 2.0) << "\" y1=\""
          << num(f.py(b.median)) << "\" x2=\"" << num(cx + box_w / 2.0)
          << "\" y2=\"" << num(f.py(b.median)) << "\" stroke=\"" << color(si)
          << "\" stroke-width=\"2\"/>\n";
    }
    const double gx =
        f.px(base + static_cast<double>(n_series + 1) / 2.0);
    out << "<text x=\"" << num(gx) << "\" y=\""
        << num(f.top + f.plot_h() + 18.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"10\">"
        << escape(g.label) << "</text>\n";
  }
  draw_legend(out, f, series_labels);
  out << "</svg>\n";
  save(path, out);
}

void write_stacked_area(const std::string& path, const std::string& title,
                        const std::string& x_label,
                        const std::vector<std::string>& band_labels,
                        const std::vector<std::vector<double>>& values) {
  Frame f;
  const std::size_t steps = values.size();
  f.xr.include(1.0);
  f.xr.include(static_cast<double>(std::max<std::size_t>(steps, 2)));
  f.yr.include(0.0);
  f.yr.include(1.0);
  f.xr.finish();
  f.yr.finish();
  std::ostringstream out;
  open_doc(out, f.width, f.height, title);
  draw_axes(out, f, x_label, "share of pulls");
  const std::size_t bands = band_labels.size();
  std::vector<double> lower(steps, 0.0);
  for (std::size_t b = 0; b < bands; ++b) {
    std::vector<double> upper(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      upper[t] = lower[t] + (b < values[t].size() ? values[t][b] : 0.0);
    }
    out << "<polygon fill=\"" << color(b) << "\" fill-opacity=\"0.7\" "
        << "stroke=\"none\" points=\"";
    for (std::size_t t = 0; t < steps; ++t) {
      out << num(f.px(static_cast<double>(t + 1))) << ',' << num(f.py(lower[t]))
          << ' ';
    }
    for (std::size_t t = steps; t-- > 0;) {
      out << num(f.px(static_cast<double>(t + 1))) << ',' << num(f.py(upper[t]));
      if (t > 0) out << ' ';
    }
    out << "\"/>\n";
    lower = upper;
  }
  draw_legend(out, f, band_labels);
  out << "</svg>\n";
  save(path, out);
}

void write_panels(const std::string& path, const std::string& title,
                  const std::vector<Panel>& panels) {
  const std::size_t n = panels.size();
  const std::size_t cols = n <= 1 ? 1 : 2;
  const std::size_t rows = (n + cols - 1) / cols;
  const double cell_w = 360.0, cell_h = 260.0;
  const double width = cell_w * static_cast<double>(cols);
  const double height = 30.0 + cell_h * static_cast<double>(rows);
  std::ostringstream out;
  open_doc(out, width, height, title);
  for (std::size_t p = 0; p < n; ++p) {
    Frame f;
    f.width = cell_w;
    f.height = cell_h;
    f.left = 60.0;
    f.right = 18.0;
    f.top = 30.0;
    f.bottom = 40.0;
    for (const auto& s : panels[p].series) {
      for (double v : s.x) f.xr.include(v);
      for (double v : s.y) f.yr.include(v);
    }
    f.xr.finish();
    f.yr.finish();
    const double ox = static_cast<double>(p % cols) * cell_w;
    const double oy = 30.0 + static_cast<double>(p / cols) * cell_h;
    out << "<g transform=\"translate(" << num(ox) << ' ' << num(oy) << ")\">\n";
    out << "<text x=\"" << num(cell_w / 2.0)
        << "\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << escape(panels[p].title) << "</text>\n";
    draw_axes(out, f, "round", "");
    for (std::size_t i = 0; i < panels[p].series.size(); ++i) {
      polyline(out, f, panels[p].series[i], i);
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
  save(path, out);
}

}  // namespace fertbandit::svg

#include "storynet/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

namespace storynet::svg {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr const char* kTercilePalette[] = {"#3b4cc0", "#b0b0b0", "#b40426"};

std::string color(std::size_t k) { return kPalette[k % std::size(kPalette)]; }

std::string num(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.setf(std::ios::fixed);
  os.precision(2);
  os << (std::abs(v) < 0.005 ? 0.0 : v);
  return os.str();
}

std::string label(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::defaultfloat;
  os.precision(3);
  os << (std::abs(v) < 1e-12 ? 0.0 : v);
  return os.str();
}

std::string header(double w, double h, const std::string& title) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(w / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\" font-weight=\"bold\">"
     << escape(title) << "</text>\n";
  return os.str();
}

struct Range {
  double lo = 0, hi = 1;
};

// Axis range covering all values (and error bars), always including zero.
Range value_range(const std::vector<Series>& series) {
  Range r{0, 0};
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      const double e = i < s.errors.size() ? std::abs(s.errors[i]) : 0;
      r.lo = std::min(r.lo, s.values[i] - e);
      r.hi = std::max(r.hi, s.values[i] + e);
    }
  if (r.hi - r.lo < 1e-12) r.hi = r.lo + 1;
  const double pad = 0.05 * (r.hi - r.lo);
  if (r.hi > 0) r.hi += pad;
  if (r.lo < 0) r.lo -= pad;
  return r;
}

std::string legend(const std::vector<std::string>& names, double x, double y, bool terciles = false) {
  std::ostringstream os;
  for (std::size_t k = 0; k < names.size(); ++k) {
    const std::string fill = terciles ? kTercilePalette[k % 3] : color(k);
    os << "<rect x=\"" << num(x) << "\" y=\"" << num(y + 16.0 * static_cast<double>(k))
       << "\" width=\"10\" height=\"10\" fill=\"" << fill << "\"/>";
    os << "<text x=\"" << num(x + 14) << "\" y=\"" << num(y + 9 + 16.0 * static_cast<double>(k)) << "\">"
       << escape(names[k]) << "</text>\n";
  }
  return os.str();
}

}  // namespace

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

std::string grouped_bars(const std::string& title, const std::vector<std::string>& categories,
                         const std::vector<Series>& series, const std::string& y_label) {
  const double left = 70, right = 150, top = 40, bottom = 110;
  const double group_w = std::max(40.0, 18.0 * static_cast<double>(std::max<std::size_t>(series.size(), 1)) + 16);
  const double plot_w = group_w * static_cast<double>(std::max<std::size_t>(categories.size(), 1));
  const double plot_h = 300;
  const double w = left + plot_w + right, h = top + plot_h + bottom;
  const Range r = value_range(series);
  auto y_of = [&](double v) { return top + plot_h * (r.hi - v) / (r.hi - r.lo); };

  std::ostringstream os;
  os << header(w, h, title);
  for (int t = 0; t <= 4; ++t) {
    const double v = r.lo + (r.hi - r.lo) * t / 4.0;
    os << "<line x1=\"" << num(left) << "\" x2=\"" << num(left + plot_w) << "\" y1=\"" << num(y_of(v)) << "\" y2=\""
       << num(y_of(v)) << "\" stroke=\"#e0e0e0\"/>";
    os << "<text x=\"" << num(left - 6) << "\" y=\"" << num(y_of(v) + 4) << "\" text-anchor=\"end\">" << label(v)
       << "</text>\n";
  }
  os << "<line x1=\"" << num(left) << "\" x2=\"" << num(left + plot_w) << "\" y1=\"" << num(y_of(0)) << "\" y2=\""
     << num(y_of(0)) << "\" stroke=\"black\"/>\n";
  const double bar_w = (group_w - 16) / static_cast<double>(std::max<std::size_t>(series.size(), 1));
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double gx = left + group_w * static_cast<double>(c) + 8;
    for (std::size_t s = 0; s < series.size(); ++s) {
      if (c >= series[s].values.size()) continue;
      const double v = series[s].values[c];
      const double x = gx + bar_w * static_cast<double>(s);
      const double y0 = y_of(std::max(v, 0.0)), y1 = y_of(std::min(v, 0.0));
      os << "<rect x=\"" << num(x) << "\" y=\"" << num(y0) << "\" width=\"" << num(bar_w - 2) << "\" height=\""
         << num(y1 - y0) << "\" fill=\"" << color(s) << "\"><title>" << escape(series[s].name) << ", "
         << escape(categories[c]) << ": " << label(v) << "</title></rect>";
      if (c < series[s].errors.size()) {
        const double e = std::abs(series[s].errors[c]);
        const double cx = x + (bar_w - 2) / 2;
        os << "<line x1=\"" << num(cx) << "\" x2=\"" << num(cx) << "\" y1=\"" << num(y_of(v - e)) << "\" y2=\""
           << num(y_of(v + e)) << "\" stroke=\"black\"/>";
      }
      os << '\n';
    }
    const double lx = gx + (group_w - 16) / 2, ly = top + plot_h + 12;
    os << "<text x=\"" << num(lx) << "\" y=\"" << num(ly) << "\" text-anchor=\"end\" transform=\"rotate(-45 "
       << num(lx) << ' ' << num(ly) << ")\">" << escape(categories[c]) << "</text>\n";
  }
  os << "<text x=\"16\" y=\"" << num(top + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << num(top + plot_h / 2) << ")\">" << escape(y_label) << "</text>\n";
  std::vector<std::string> names;
  for (const auto& s : series) names.push_back(s.name);
  os << legend(names, left + plot_w + 16, top);
  os << "</svg>\n";
  return os.str();
}

std::string grouped_hbars(const std::string& title, const std::vector<std::string>& categories,
                          const std::vector<Series>& series, const std::string& x_label) {
  const double left = 170, right = 150, top = 40, bottom = 50;
  const double group_h = std::max(24.0, 10.0 * static_cast<double>(std::max<std::size_t>(series.size(), 1)) + 8);
  const double plot_h = group_h * static_cast<double>(std::max<std::size_t>(categories.size(), 1));
  const double plot_w = 360;
  const double w = left + plot_w + right, h = top + plot_h + bottom;
  const Range r = value_range(series);
  auto x_of = [&](double v) { return left + plot_w * (v - r.lo) / (r.hi - r.lo); };

  std::ostringstream os;
  os << header(w, h, title);
  for (int t = 0; t <= 4; ++t) {
    const double v = r.lo + (r.hi - r.lo) * t / 4.0;
    os << "<line x1=\"" << num(x_of(v)) << "\" x2=\"" << num(x_of(v)) << "\" y1=\"" << num(top) << "\" y2=\""
       << num(top + plot_h) << "\" stroke=\"#e0e0e0\"/>";
    os << "<text x=\"" << num(x_of(v)) << "\" y=\"" << num(top + plot_h + 16) << "\" text-anchor=\"middle\">"
       << label(v) << "</text>\n";
  }
  const double bar_h = (group_h - 8) / static_cast<double>(std::max<std::size_t>(series.size(), 1));
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double gy = top + group_h * static_cast<double>(c) + 4;
    for (std::size_t s = 0; s < series.size(); ++s) {
      if (c >= series[s].values.size()) continue;
      const double v = series[s].values[c];
      const double x0 = x_of(std::min(v, 0.0)), x1 = x_of(std::max(v, 0.0));
      os << "<rect x=\"" << num(x0) << "\" y=\"" << num(gy + bar_h * static_cast<double>(s)) << "\" width=\""
         << num(x1 - x0) << "\" height=\"" << num(bar_h - 1) << "\" fill=\"" << color(s) << "\"><title>"
         << escape(series[s].name) << ", " << escape(categories[c]) << ": " << label(v) << "</title></rect>\n";
    }
    os << "<text x=\"" << num(left - 6) << "\" y=\"" << num(gy + (group_h - 8) / 2 + 4) << "\" text-anchor=\"end\">"
       << escape(categories[c]) << "</text>\n";
  }
  os << "<line x1=\"" << num(x_of(0)) << "\" x2=\"" << num(x_of(0)) << "\" y1=\"" << num(top) << "\" y2=\""
     << num(top + plot_h) << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(h - 10) << "\" text-anchor=\"middle\">"
     << escape(x_label) << "</text>\n";
  std::vector<std::string> names;
  for (const auto& s : series) names.push_back(s.name);
  os << legend(names, left + plot_w + 16, top);
  os << "</svg>\n";
  return os.str();
}

std::string heatmap(const std::string& title, const std::vector<std::vector<double>>& cells,
                    const std::vector<std::string>& row_labels, const std::vector<std::string>& col_labels,
                    const std::string& row_axis, const std::string& col_axis) {
  const double left = 90, top = 50, cell = 70;
  const double w = left + cell * static_cast<double>(col_labels.size()) + 30;
  const double h = top + cell * static_cast<double>(row_labels.size()) + 60;
  double hi = 0;
  for (const auto& row : cells)
    for (double v : row) hi = std::max(hi, v);
  std::ostringstream os;
  os << header(w, h, title);
  for (std::size_t i = 0; i < row_labels.size(); ++i) {
    for (std::size_t j = 0; j < col_labels.size(); ++j) {
      const double v = i < cells.size() && j < cells[i].size() ? cells[i][j] : 0;
      const double t = hi > 0 ? v / hi : 0;
      const int shade = static_cast<int>(std::lround(255 - 200 * t));
      char fill[16];
      std::snprintf(fill, sizeof fill, "#%02x%02xff", shade, shade);
      const double x = left + cell * static_cast<double>(j), y = top + cell * static_cast<double>(i);
      os << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(cell) << "\" height=\"" << num(cell)
         << "\" fill=\"" << fill << "\" stroke=\"white\"/>";
      os << "<text x=\"" << num(x + cell / 2) << "\" y=\"" << num(y + cell / 2 + 4) << "\" text-anchor=\"middle\""
         << (t > 0.6 ? " fill=\"white\"" : "") << ">" << label(v) << "</text>\n";
    }
    os << "<text x=\"" << num(left - 8) << "\" y=\"" << num(top + cell * (static_cast<double>(i) + 0.5) + 4)
       << "\" text-anchor=\"end\">" << escape(row_labels[i]) << "</text>\n";
  }
  for (std::size_t j = 0; j < col_labels.size(); ++j)
    os << "<text x=\"" << num(left + cell * (static_cast<double>(j) + 0.5)) << "\" y=\""
       << num(top + cell * static_cast<double>(row_labels.size()) + 18) << "\" text-anchor=\"middle\">"
       << escape(col_labels[j]) << "</text>\n";
  os << "<text x=\"" << num(left + cell * static_cast<double>(col_labels.size()) / 2) << "\" y=\"" << num(h - 12)
     << "\" text-anchor=\"middle\">" << escape(col_axis) << "</text>\n";
  os << "<text x=\"16\" y=\"" << num(top + cell * static_cast<double>(row_labels.size()) / 2)
     << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << num(top + cell * static_cast<double>(row_labels.size()) / 2) << ")\">" << escape(row_axis) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string beeswarm(const std::string& title, const std::vector<std::string>& categories,
                     const std::vector<SwarmPoint>& points, const std::vector<std::string>& legend_names,
                     const std::string& x_label) {
  const double left = 170, right = 130, top = 40, bottom = 50, row_h = 28, plot_w = 400;
  const double h = top + row_h * static_cast<double>(std::max<std::size_t>(categories.size(), 1)) + bottom;
  const double w = left + plot_w + right;
  double lo = 0, hi = 0;
  for (const auto& p : points) {
    lo = std::min(lo, p.x);
    hi = std::max(hi, p.x);
  }
  if (hi - lo < 1e-12) {
    lo -= 1;
    hi += 1;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto x_of = [&](double v) { return left + plot_w * (v - lo) / (hi - lo); };

  std::ostringstream os;
  os << header(w, h, title);
  for (std::size_t c = 0; c < categories.size(); ++c)
    os << "<text x=\"" << num(left - 6) << "\" y=\"" << num(top + row_h * (static_cast<double>(c) + 0.5) + 4)
       << "\" text-anchor=\"end\">" << escape(categories[c]) << "</text>\n";
  os << "<line x1=\"" << num(x_of(0)) << "\" x2=\"" << num(x_of(0)) << "\" y1=\"" << num(top) << "\" y2=\""
     << num(h - bottom) << "\" stroke=\"#999999\"/>\n";
  std::uint64_t state = 0x2545F4914F6CDD1DULL;
  for (const auto& p : points) {
    // xorshift jitter keeps the output reproducible.
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    const double jitter = (static_cast<double>(state % 1000) / 1000.0 - 0.5) * row_h * 0.6;
    os << "<circle cx=\"" << num(x_of(p.x)) << "\" cy=\""
       << num(top + row_h * (static_cast<double>(p.row) + 0.5) + jitter) << "\" r=\"2.5\" fill=\""
       << kTercilePalette[static_cast<std::size_t>(std::clamp(p.color, 0, 2))] << "\" fill-opacity=\"0.7\"/>\n";
  }
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    os << "<text x=\"" << num(x_of(v)) << "\" y=\"" << num(h - bottom + 16) << "\" text-anchor=\"middle\">"
       << label(v) << "</text>\n";
  }
  os << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(h - 10) << "\" text-anchor=\"middle\">"
     << escape(x_label) << "</text>\n";
  os << legend(legend_names, left + plot_w + 16, top, true);
  os << "</svg>\n";
  return os.str();
}

}  // namespace storynet::svg

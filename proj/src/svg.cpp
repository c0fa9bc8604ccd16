#include "rum/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace rum {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 30, kBottom = 50;

struct Axes {
  double x0, x1, y0, y1;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void open_svg(std::ostream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\">" << title << "</text>\n";
}

void frame(std::ostream& out, const Axes& a, const std::string& xlabel, const std::string& ylabel,
           const std::vector<double>& xticks, const std::vector<std::pair<double, std::string>>& yticks) {
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
      << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : xticks) {
    out << "<text x=\"" << num(a.px(t)) << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\">"
        << label(t) << "</text>\n";
  }
  for (const auto& [t, text] : yticks) {
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(a.py(t) + 4) << "\" text-anchor=\"end\">" << text
        << "</text>\n";
  }
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">" << xlabel
      << "</text>\n"
      << "<text transform=\"translate(16," << kHeight / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << ylabel
      << "</text>\n";
}

std::vector<double> ticks(double lo, double hi, int count) {
  std::vector<double> t;
  for (int i = 0; i <= count; ++i) t.push_back(lo + (hi - lo) * i / count);
  return t;
}

void polyline(std::ostream& out, const Axes& a, const std::vector<std::pair<double, double>>& pts,
              const char* color, const char* dash = nullptr) {
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
  if (dash) out << " stroke-dasharray=\"" << dash << "\"";
  out << " points=\"";
  for (const auto& [x, y] : pts) out << num(a.px(x)) << ',' << num(a.py(y)) << ' ';
  out << "\"/>\n";
}

void legend(std::ostream& out, int row, const char* color, const std::string& text) {
  const double y = kTop + 16 + 16 * row;
  out << "<line x1=\"" << kWidth - 170 << "\" y1=\"" << y - 4 << "\" x2=\"" << kWidth - 150 << "\" y2=\"" << y - 4
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << kWidth - 144 << "\" y=\"" << y << "\">" << text << "</text>\n";
}

}  // namespace

void write_stress_svg(std::ostream& out, const StressReport& report) {
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"};
  double lo = 0, hi = 1, iters = 1;
  bool first = true;
  for (const auto& c : report.curves) {
    iters = std::max(iters, static_cast<double>(c.residual_history.size() - 1));
    for (double r : c.residual_history) {
      if (!(r > 0)) continue;
      const double l = std::log10(r);
      lo = first ? l : std::min(lo, l);
      hi = first ? l : std::max(hi, l);
      first = false;
    }
  }
  lo = std::floor(lo);
  hi = std::ceil(hi);
  if (hi <= lo) hi = lo + 1;
  const Axes a{0, iters, lo, hi};
  open_svg(out, "Stress test, n = " + std::to_string(report.n));
  std::vector<std::pair<double, std::string>> yt;
  const int step = std::max(1, static_cast<int>((hi - lo) / 8));
  for (int e = static_cast<int>(lo); e <= static_cast<int>(hi); e += step) yt.push_back({e, "1e" + std::to_string(e)});
  frame(out, a, "iteration", "residual norm", ticks(0, iters, 5), yt);
  for (std::size_t i = 0; i < report.curves.size(); ++i) {
    const auto& c = report.curves[i];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < c.residual_history.size(); ++k) {
      if (c.residual_history[k] > 0) pts.push_back({static_cast<double>(k), std::log10(c.residual_history[k])});
    }
    polyline(out, a, pts, colors[i % 4]);
    legend(out, static_cast<int>(i), colors[i % 4], c.method);
  }
  out << "</svg>\n";
}

void write_frozen_svg(std::ostream& out, const FrozenReport& report) {
  double rmax = 1, imax = 1;
  for (const auto& p : report.points) {
    rmax = std::max(rmax, static_cast<double>(p.rank));
    imax = std::max(imax, static_cast<double>(p.iterations));
  }
  const Axes a{0, rmax * 1.05, 0, imax * 1.15};
  open_svg(out, "Frozen barrier, n = " + std::to_string(report.n));
  std::vector<std::pair<double, std::string>> yt;
  for (double t : ticks(0, imax * 1.15, 5)) yt.push_back({t, label(std::round(t))});
  frame(out, a, "effective rank r", "PCG iterations", ticks(0, rmax * 1.05, 5), yt);
  // r + 1 clipped to the plotted range.
  const double r_clip = std::min(rmax * 1.05, imax * 1.15 - 1);
  polyline(out, a, {{0, 1}, {r_clip, r_clip + 1}}, "#999999", "4 3");
  polyline(out, a, {{0, report.intercept}, {rmax * 1.05, report.intercept + report.slope * rmax * 1.05}}, "#d62728");
  for (const auto& p : report.points) {
    out << "<circle cx=\"" << num(a.px(static_cast<double>(p.rank))) << "\" cy=\""
        << num(a.py(static_cast<double>(p.iterations))) << "\" r=\"4\" fill=\"#1f77b4\"/>\n";
  }
  legend(out, 0, "#d62728", "fit, slope " + label(report.slope));
  legend(out, 1, "#999999", "r + 1");
  out << "</svg>\n";
}

void write_bootstrap_svg(std::ostream& out, const TestReport& report) {
  std::vector<double> stats;
  for (double j : report.bootstrap_stats) {
    if (!std::isnan(j)) stats.push_back(j);
  }
  double hi = report.statistic;
  for (double j : stats) hi = std::max(hi, j);
  if (!(hi > 0)) hi = 1;
  hi *= 1.05;
  constexpr int kBins = 30;
  std::vector<int> counts(kBins, 0);
  for (double j : stats) counts[std::min(kBins - 1, static_cast<int>(j / hi * kBins))]++;
  const double cmax = std::max(1, *std::max_element(counts.begin(), counts.end()));
  const Axes a{0, hi, 0, cmax * 1.1};
  open_svg(out, "Bootstrap statistics, p = " + label(report.p_value));
  std::vector<std::pair<double, std::string>> yt;
  for (double t : ticks(0, cmax * 1.1, 5)) yt.push_back({t, label(std::round(t))});
  frame(out, a, "J*", "count", ticks(0, hi, 5), yt);
  for (int b = 0; b < kBins; ++b) {
    const double x0 = hi * b / kBins, x1 = hi * (b + 1) / kBins;
    out << "<rect x=\"" << num(a.px(x0)) << "\" y=\"" << num(a.py(counts[b])) << "\" width=\""
        << num(a.px(x1) - a.px(x0)) << "\" height=\"" << num(a.py(0) - a.py(counts[b]))
        << "\" fill=\"#1f77b4\" stroke=\"white\"/>\n";
  }
  polyline(out, a, {{report.statistic, 0}, {report.statistic, cmax * 1.1}}, "#d62728");
  legend(out, 0, "#d62728", "J_N = " + label(report.statistic));
  out << "</svg>\n";
}

}  // namespace rum

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "metareg/experiment.hpp"

namespace metareg {

namespace {

struct Panel {
  double x0, y0, w, h;  // plot area in svg coordinates
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void draw_series(std::ofstream& out, const Panel& p,
                 const std::vector<double>& ys, const std::string& color,
                 const std::string& title) {
  double lo = 0.0, hi = 1.0;
  bool any = false;
  for (double y : ys) {
    if (!std::isfinite(y)) continue;
    if (!any) {
      lo = hi = y;
      any = true;
    } else {
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
  }
  if (!any) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-300) hi = lo + 1.0;

  out << "<rect x='" << num(p.x0) << "' y='" << num(p.y0) << "' width='"
      << num(p.w) << "' height='" << num(p.h)
      << "' fill='none' stroke='#888'/>\n";
  out << "<text x='" << num(p.x0 + 4) << "' y='" << num(p.y0 - 6)
      << "' font-size='12' font-family='monospace'>" << title << "</text>\n";
  out << "<text x='" << num(p.x0 - 4) << "' y='" << num(p.y0 + 10)
      << "' font-size='10' text-anchor='end' font-family='monospace'>"
      << num(hi) << "</text>\n";
  out << "<text x='" << num(p.x0 - 4) << "' y='" << num(p.y0 + p.h)
      << "' font-size='10' text-anchor='end' font-family='monospace'>"
      << num(lo) << "</text>\n";
  out << "<text x='" << num(p.x0 + p.w) << "' y='" << num(p.y0 + p.h + 12)
      << "' font-size='10' text-anchor='end' font-family='monospace'>t="
      << ys.size() << "</text>\n";

  if (ys.empty()) return;
  out << "<polyline fill='none' stroke='" << color << "' stroke-width='1' points='";
  const size_t n = ys.size();
  const size_t step = std::max<size_t>(1, n / 2000);  // cap path size
  for (size_t i = 0; i < n; i += step) {
    double y = ys[i];
    if (!std::isfinite(y)) continue;
    double px = p.x0 + p.w * (n > 1 ? static_cast<double>(i) / (n - 1) : 0.0);
    double py = p.y0 + p.h * (1.0 - (y - lo) / (hi - lo));
    out << num(px) << "," << num(py) << " ";
  }
  out << "'/>\n";
}

}  // namespace

void write_run_svg(const RunRecord& rec, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_run_svg: cannot open " + path);

  const double W = 900, H = 300;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='"
      << H << "' viewBox='0 0 " << W << " " << H << "'>\n";
  out << "<rect width='" << W << "' height='" << H << "' fill='white'/>\n";
  std::string label = rec.method;
  if (rec.method == "meta") label += " " + rec.divergence + " " + rec.rule;
  out << "<text x='12' y='16' font-size='13' font-family='monospace'>" << label
      << "  alpha0=" << num(rec.alpha0) << "  seed=" << rec.seed << "</text>\n";

  Panel left{70, 50, 330, 210};
  Panel right{520, 50, 330, 210};
  draw_series(out, left, rec.loss, "#1f77b4", "loss");
  draw_series(out, right, regret_curve(rec), "#d62728", "regret");
  out << "</svg>\n";
}

}  // namespace metareg

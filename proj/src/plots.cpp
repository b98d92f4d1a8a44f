#include "blocklab/plots.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "blocklab/csv.hpp"

namespace blocklab {

namespace {

std::string fmt(double v) { return format_double(std::round(v * 100.0) / 100.0); }

void svg_open(std::ostringstream& os, int w, int h, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  os << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\""
     << " font-size=\"16\">" << title << "</text>\n";
}

std::string color_for(double t) {
  // blue (low) to orange (high)
  auto lerp = [](int a, int b, double u) { return static_cast<int>(std::lround(a + (b - a) * u)); };
  int r = lerp(59, 221, t), g = lerp(106, 126, t), b = lerp(176, 49, t);
  std::ostringstream os;
  os << "rgb(" << r << "," << g << "," << b << ")";
  return os.str();
}

}  // namespace

std::string curve_svg(const std::vector<IterationStats>& series, const std::string& title) {
  const int W = 800, H = 500, ml = 70, mr = 20, mt = 50, mb = 60;
  std::ostringstream os;
  svg_open(os, W, H, title);
  os << "<!-- data: iteration,mean_reward\n";
  std::vector<std::pair<int, double>> pts;
  for (const IterationStats& s : series)
    if (s.mean_reward) {
      pts.emplace_back(s.iteration, *s.mean_reward);
      os << s.iteration << "," << format_double(*s.mean_reward) << "\n";
    }
  os << "-->\n";
  double max_y = 1.0, max_x = 1.0;
  for (auto [it, r] : pts) {
    max_x = std::max(max_x, static_cast<double>(it));
    max_y = std::max(max_y, r);
  }
  auto px = [&](double it) { return ml + (it - 1.0) / std::max(1.0, max_x - 1.0) * (W - ml - mr); };
  auto py = [&](double r) { return H - mb - r / max_y * (H - mt - mb); };

  os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
     << H - mb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    double r = max_y * i / 5.0;
    os << "<text x=\"" << ml - 8 << "\" y=\"" << fmt(py(r) + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(r)
       << "</text>\n";
    double x = 1.0 + (max_x - 1.0) * i / 5.0;
    os << "<text x=\"" << fmt(px(x)) << "\" y=\"" << H - mb + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
       << fmt(x) << "</text>\n";
  }
  os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 16
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">iteration</text>\n";
  os << "<text x=\"18\" y=\"" << (mt + H - mb) / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 "
     << (mt + H - mb) / 2 << ")\">mean reward</text>\n";
  if (!pts.empty()) {
    os << "<polyline fill=\"none\" stroke=\"rgb(59,106,176)\" stroke-width=\"2\" points=\"";
    for (size_t i = 0; i < pts.size(); ++i) {
      if (i) os << " ";
      os << fmt(px(pts[i].first)) << "," << fmt(py(pts[i].second));
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string heatmap_svg(const std::vector<SweepResult>& results, const std::string& metric,
                        const std::string& title) {
  if (metric != "training_reward" && metric != "convergence_iteration")
    throw std::invalid_argument("heatmap metric must be training_reward or convergence_iteration");
  const bool reward = metric == "training_reward";

  std::set<int> hs, ps;
  for (const SweepResult& r : results) {
    hs.insert(r.h);
    ps.insert(r.p);
  }
  std::vector<int> h_list(hs.begin(), hs.end()), p_list(ps.begin(), ps.end());
  const int cell = 90, ml = 90, mt = 70;
  const int W = ml + cell * static_cast<int>(p_list.size()) + 30;
  const int H = mt + cell * static_cast<int>(h_list.size()) + 50;

  std::ostringstream os;
  svg_open(os, W, H, title);
  os << "<!-- data: h,p,extra_blocks,value\n";
  double lo = 0.0, hi = 1.0;
  bool first = true;
  auto value_of = [&](const SweepResult& r) -> std::optional<double> {
    if (r.failed()) return std::nullopt;
    if (reward) return r.training_reward;
    if (r.convergence_iteration) return static_cast<double>(*r.convergence_iteration);
    return std::nullopt;
  };
  for (const SweepResult& r : results) {
    auto v = value_of(r);
    os << r.h << "," << r.p << "," << r.extra.str() << ","
       << (r.failed() ? "ERROR" : (v ? format_double(*v) : "-")) << "\n";
    if (v) {
      if (first) {
        lo = hi = *v;
        first = false;
      } else {
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
      }
    }
  }
  os << "-->\n";

  for (size_t pi = 0; pi < p_list.size(); ++pi)
    os << "<text x=\"" << ml + cell * pi + cell / 2 << "\" y=\"" << mt - 12
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">p=" << p_list[pi]
       << "</text>\n";
  for (size_t hi_i = 0; hi_i < h_list.size(); ++hi_i)
    os << "<text x=\"" << ml - 12 << "\" y=\"" << mt + cell * hi_i + cell / 2 + 5
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"13\">h=" << h_list[hi_i]
       << "</text>\n";

  for (size_t hi_i = 0; hi_i < h_list.size(); ++hi_i) {
    for (size_t pi = 0; pi < p_list.size(); ++pi) {
      const SweepResult* found = nullptr;
      for (const SweepResult& r : results)
        if (r.h == h_list[hi_i] && r.p == p_list[pi]) {
          found = &r;
          break;
        }
      int x = ml + cell * static_cast<int>(pi), y = mt + cell * static_cast<int>(hi_i);
      std::string fill = "rgb(235,235,235)";
      std::string label;
      if (found) {
        auto v = value_of(*found);
        if (found->failed()) {
          label = "ERR";
        } else if (v) {
          double t = hi > lo ? (*v - lo) / (hi - lo) : 0.5;
          fill = color_for(t);
          label = fmt(*v);
        } else {
          label = "X";  // did not converge within training iterations
        }
      }
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
         << "\" fill=\"" << fill << "\" stroke=\"black\"/>\n";
      if (!label.empty())
        os << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 5
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\""
           << (label == "X" ? 22 : 13) << "\">" << label << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace blocklab

#include "confocal/cli/svg.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace confocal::cli {

namespace {

struct Frame {
  double scale, cx, cy;
  std::pair<double, double> map(double x, double y) const { return {cx + scale * x, cy - scale * y}; }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string path_data(const Frame& f, const Polyline& pts, bool close) {
  std::string d;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto [px, py] = f.map(pts[i].first, pts[i].second);
    d += (i ? " L" : "M") + fmt(px) + " " + fmt(py);
  }
  if (close && !pts.empty()) d += " Z";
  return d;
}

bool inside(double ax, double ay, double x, double y) { return x * x / ax + y * y / ay <= 1.0 + 1e-12; }

// Splits a sampled curve into runs that stay inside the boundary ellipse.
void clip_append(double ax, double ay, const Polyline& curve, std::vector<Polyline>& out) {
  Polyline run;
  for (const auto& p : curve) {
    if (inside(ax, ay, p.first, p.second)) {
      run.push_back(p);
    } else if (!run.empty()) {
      if (run.size() > 1) out.push_back(run);
      run.clear();
    }
  }
  if (run.size() > 1) out.push_back(run);
}

}  // namespace

std::vector<Polyline> confocal_conic(double ax, double ay, double eta, int samples) {
  std::vector<Polyline> out;
  const double p = ax - eta, q = ay - eta;
  if (p > 0.0 && q > 0.0) {
    Polyline e;
    for (int i = 0; i <= samples; ++i) {
      const double t = 2.0 * M_PI * i / samples;
      e.emplace_back(std::sqrt(p) * std::cos(t), std::sqrt(q) * std::sin(t));
    }
    clip_append(ax, ay, e, out);
  } else if (p > 0.0 || q > 0.0) {
    // Hyperbola; u runs far enough to leave the boundary ellipse.
    const double umax = std::acosh(std::max(1.0, 2.0 * std::sqrt(std::max(ax, ay) / std::abs(p > 0.0 ? p : q)))) + 1.0;
    for (double s : {-1.0, 1.0}) {
      Polyline h;
      for (int i = 0; i <= samples; ++i) {
        const double u = -umax + 2.0 * umax * i / samples;
        if (p > 0.0)
          h.emplace_back(s * std::sqrt(p) * std::cosh(u), std::sqrt(-q) * std::sinh(u));
        else
          h.emplace_back(std::sqrt(-p) * std::sinh(u), s * std::sqrt(q) * std::cosh(u));
      }
      clip_append(ax, ay, h, out);
    }
  }
  return out;
}

std::string render_svg(const PlotScene& scene, int size) {
  const double rx = std::sqrt(scene.ax), ry = std::sqrt(scene.ay);
  const double half = 1.1 * std::max(rx, ry);
  const Frame f{0.5 * size / half, 0.5 * size, 0.5 * size};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\" viewBox=\"0 0 " << size << " " << size << "\">\n";
  if (!scene.title.empty()) svg << "  <title>" << scene.title << "</title>\n";
  svg << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Coordinate axes.
  const auto [x0, yc] = f.map(-half, 0.0);
  const auto [x1, yc2] = f.map(half, 0.0);
  const auto [xc, y0] = f.map(0.0, -half);
  const auto [xc2, y1] = f.map(0.0, half);
  svg << "  <g stroke=\"#999999\" stroke-width=\"0.6\">\n"
      << "    <line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(yc) << "\" x2=\"" << fmt(x1) << "\" y2=\""
      << fmt(yc2) << "\"/>\n"
      << "    <line x1=\"" << fmt(xc) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(xc2) << "\" y2=\""
      << fmt(y1) << "\"/>\n"
      << "  </g>\n";

  // Boundary: the full ellipse, and the wall-clipped domain when mu is charged.
  Polyline ellipse;
  const int N = 720;
  for (int i = 0; i <= N; ++i) {
    const double t = 2.0 * M_PI * i / N;
    ellipse.emplace_back(rx * std::cos(t), ry * std::sin(t));
  }
  if (scene.wall_x || scene.wall_y) {
    svg << "  <path d=\"" << path_data(f, ellipse, true)
        << "\" fill=\"none\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n";
    double t0 = scene.wall_x ? -0.5 * M_PI : 0.0, t1 = scene.wall_x ? 0.5 * M_PI : M_PI;
    if (scene.wall_x && scene.wall_y) t0 = 0.0;
    Polyline dom;
    for (int i = 0; i <= N; ++i) {
      const double t = t0 + (t1 - t0) * i / N;
      dom.emplace_back(rx * std::cos(t), ry * std::sin(t));
    }
    dom.emplace_back(0.0, 0.0);
    svg << "  <path d=\"" << path_data(f, dom, true)
        << "\" fill=\"#f2f2f2\" stroke=\"black\" stroke-width=\"1.2\"/>\n";
  } else {
    svg << "  <path d=\"" << path_data(f, ellipse, true)
        << "\" fill=\"#f2f2f2\" stroke=\"black\" stroke-width=\"1.2\"/>\n";
  }

  if (!scene.caustics.empty()) {
    svg << "  <g fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"0.9\">\n";
    for (double eta : scene.caustics)
      for (const Polyline& c : confocal_conic(scene.ax, scene.ay, eta))
        svg << "    <path d=\"" << path_data(f, c, false) << "\"/>\n";
    svg << "  </g>\n";
  }

  if (!scene.paths.empty()) {
    svg << "  <g fill=\"none\" stroke=\"#c0392b\" stroke-width=\"0.7\">\n";
    for (const Polyline& p : scene.paths)
      if (p.size() > 1) svg << "    <path d=\"" << path_data(f, p, false) << "\"/>\n";
    svg << "  </g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace confocal::cli

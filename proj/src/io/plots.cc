#include "navsfm/io/plots.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace navsfm::io {
namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kMargin = 50.0;

// Maps north/east metres to SVG pixels with equal scale on both axes.
class TopView {
 public:
  explicit TopView(const std::vector<Eigen::Vector3d>& points) {
    double min_e = std::numeric_limits<double>::max(), max_e = -min_e;
    double min_n = min_e, max_n = -min_e;
    for (const auto& p : points) {
      min_n = std::min(min_n, p.x());
      max_n = std::max(max_n, p.x());
      min_e = std::min(min_e, p.y());
      max_e = std::max(max_e, p.y());
    }
    if (points.empty()) min_n = max_n = min_e = max_e = 0.0;
    const double span = std::max({max_n - min_n, max_e - min_e, 1e-9});
    scale_ = (std::min(kWidth, kHeight) - 2 * kMargin) / span;
    center_n_ = 0.5 * (min_n + max_n);
    center_e_ = 0.5 * (min_e + max_e);
  }

  double X(const Eigen::Vector3d& p) const { return kWidth / 2 + (p.y() - center_e_) * scale_; }
  double Y(const Eigen::Vector3d& p) const { return kHeight / 2 - (p.x() - center_n_) * scale_; }
  double scale() const { return scale_; }

 private:
  double scale_ = 1.0;
  double center_n_ = 0.0;
  double center_e_ = 0.0;
};

void Header(std::ostream& out, const std::string& title) {
  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
}

void ScaleBar(std::ostream& out, const TopView& view) {
  // Round length close to a fifth of the width.
  const double target = kWidth / 5 / view.scale();
  const double p = std::pow(10.0, std::floor(std::log10(target)));
  double len = p;
  for (const double m : {2.0, 5.0, 10.0}) {
    if (m * p <= target) len = m * p;
  }
  const double y = kHeight - 20;
  out << "<line x1=\"" << kMargin << "\" y1=\"" << y << "\" x2=\"" << kMargin + len * view.scale()
      << "\" y2=\"" << y << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
  out << "<text x=\"" << kMargin << "\" y=\"" << y - 6
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << std::setprecision(0) << len
      << " m</text>\n"
      << std::setprecision(2);
}

}  // namespace

void WriteTrajectorySvg(std::ostream& out, const std::vector<TrajectorySeries>& series) {
  std::vector<Eigen::Vector3d> all;
  for (const auto& s : series) {
    for (const auto& p : s.poses) all.push_back(p.Center());
  }
  const TopView view(all);
  Header(out, "Camera trajectory (top view, north up)");
  for (size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.poses.size(); ++i) {
      if (!s.mask.empty() && !s.mask[i]) continue;
      const Eigen::Vector3d c = s.poses[i].Center();
      out << view.X(c) << ',' << view.Y(c) << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << kWidth - 180 << "\" y=\"" << 50 + 18 * k << "\" fill=\"" << s.color
        << "\" font-family=\"sans-serif\" font-size=\"13\">" << s.label << "</text>\n";
  }
  ScaleBar(out, view);
  out << "</svg>\n";
}

void WriteViewGraphSvg(std::ostream& out, const ViewGraph& graph,
                       const std::vector<Pose>& camera_poses,
                       const std::vector<bool>& weak_edge_flags) {
  std::vector<Eigen::Vector3d> centers;
  for (const auto& p : camera_poses) centers.push_back(p.Center());
  const TopView view(centers);
  int max_matches = 1;
  for (const auto& e : graph.Edges()) max_matches = std::max(max_matches, e.num_matches);
  Header(out, "View graph (edge width by verified matches, weak pairs red)");
  const auto& edges = graph.Edges();
  for (size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    const bool weak = k < weak_edge_flags.size() && weak_edge_flags[k];
    const double w = static_cast<double>(e.num_matches) / max_matches;
    const auto& a = centers[e.image1];
    const auto& b = centers[e.image2];
    out << "<line x1=\"" << view.X(a) << "\" y1=\"" << view.Y(a) << "\" x2=\"" << view.X(b)
        << "\" y2=\"" << view.Y(b) << "\" stroke=\"" << (weak ? "red" : "steelblue")
        << "\" stroke-opacity=\"" << (weak ? 1.0 : 0.15 + 0.85 * w) << "\" stroke-width=\""
        << (weak ? 2.0 : 0.5 + 2.5 * w) << "\"/>\n";
  }
  for (const auto& c : centers) {
    out << "<circle cx=\"" << view.X(c) << "\" cy=\"" << view.Y(c)
        << "\" r=\"2\" fill=\"black\"/>\n";
  }
  ScaleBar(out, view);
  out << "</svg>\n";
}

void WriteConstraintHistogramSvg(std::ostream& out, const std::vector<int>& first_pass,
                                 const std::vector<int>& final_pass) {
  int max_value = 0;
  for (const int v : first_pass) max_value = std::max(max_value, v);
  for (const int v : final_pass) max_value = std::max(max_value, v);
  const int bins = max_value + 1;
  std::vector<int> h0(bins, 0), h1(bins, 0);
  for (const int v : first_pass) ++h0[v];
  for (const int v : final_pass) ++h1[v];
  int max_count = 1;
  for (int b = 0; b < bins; ++b) max_count = std::max({max_count, h0[b], h1[b]});

  Header(out, "Relative constraints per image");
  const double plot_w = kWidth - 2 * kMargin;
  const double plot_h = kHeight - 2 * kMargin - 20;
  const double base = kHeight - kMargin;
  const double bin_w = plot_w / bins;
  for (int b = 0; b < bins; ++b) {
    const double x = kMargin + b * bin_w;
    const double ha = plot_h * h0[b] / max_count;
    const double hb = plot_h * h1[b] / max_count;
    out << "<rect x=\"" << x + 0.05 * bin_w << "\" y=\"" << base - ha << "\" width=\""
        << 0.45 * bin_w << "\" height=\"" << ha << "\" fill=\"orange\"/>\n";
    out << "<rect x=\"" << x + 0.5 * bin_w << "\" y=\"" << base - hb << "\" width=\""
        << 0.45 * bin_w << "\" height=\"" << hb << "\" fill=\"seagreen\"/>\n";
  }
  out << "<line x1=\"" << kMargin << "\" y1=\"" << base << "\" x2=\"" << kWidth - kMargin
      << "\" y2=\"" << base << "\" stroke=\"black\"/>\n";
  const int label_step = std::max(1, bins / 10);
  for (int b = 0; b < bins; b += label_step) {
    out << "<text x=\"" << kMargin + (b + 0.5) * bin_w << "\" y=\"" << base + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << b
        << "</text>\n";
  }
  out << "<text x=\"" << kMargin << "\" y=\"" << kMargin
      << "\" font-family=\"sans-serif\" font-size=\"12\">max count " << max_count << "</text>\n";
  out << "<text x=\"" << kWidth - 200 << "\" y=\"50\" fill=\"orange\" font-family=\"sans-serif\" "
      << "font-size=\"13\">first pass</text>\n";
  out << "<text x=\"" << kWidth - 200 << "\" y=\"68\" fill=\"seagreen\" "
      << "font-family=\"sans-serif\" font-size=\"13\">after revisit</text>\n";
  out << "</svg>\n";
}

void WriteViewGraphSummary(std::ostream& out, const ViewGraph& graph) {
  out << "# image1 image2 num_matches num_shared_points\n";
  for (const auto& e : graph.Edges()) {
    out << e.image1 << ' ' << e.image2 << ' ' << e.num_matches << ' ' << e.num_shared_points
        << '\n';
  }
}

void WriteTextFile(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace navsfm::io

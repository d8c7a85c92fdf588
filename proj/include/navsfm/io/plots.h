#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "navsfm/geom/pose.h"
#include "navsfm/viewgraph/view_graph.h"

namespace navsfm::io {

// Top view (east to the right, north up) of camera centres.
struct TrajectorySeries {
  std::string label;
  std::string color;
  std::vector<Pose> poses;
  std::vector<bool> mask;  // empty: all drawn
};

void WriteTrajectorySvg(std::ostream& out, const std::vector<TrajectorySeries>& series);

// Edges drawn between prior camera centres, width and opacity by N_m; weak
// edges (per the given predicate flags) in red.
void WriteViewGraphSvg(std::ostream& out, const ViewGraph& graph,
                       const std::vector<Pose>& camera_poses,
                       const std::vector<bool>& weak_edge_flags);

// Histogram of relative constraints per image before and after the revisit.
void WriteConstraintHistogramSvg(std::ostream& out, const std::vector<int>& first_pass,
                                 const std::vector<int>& final_pass);

// "image1 image2 N_m N_p" per edge.
void WriteViewGraphSummary(std::ostream& out, const ViewGraph& graph);

void WriteTextFile(const std::string& path, const std::string& content);

}  // namespace navsfm::io

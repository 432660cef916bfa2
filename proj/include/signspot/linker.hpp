#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "signspot/core.hpp"
#include "signspot/tensor.hpp"

namespace signspot {

/// Scored boxes per frame, frames in temporal order.
using FrameBoxes = std::vector<std::vector<Box2D>>;

struct LinkConfig {
  double lambda_link = 0.3;  // 0.1 for attention tubes
  int smooth_half_window = 5;
  int top_k = 1;
  double zoom_ratio = 1.0;
};

/// Greedy per-frame NMS: keep the best remaining box, drop boxes whose IoU
/// with it exceeds `iou_threshold`, stop after `max_keep`. Score ties go to
/// the lower input index. Returns input indices of kept boxes, best first.
std::vector<std::size_t> frame_nms_indices(const std::vector<Box2D>& boxes, double iou_threshold,
                                           std::size_t max_keep);
std::vector<Box2D> frame_nms(const std::vector<Box2D>& boxes, double iou_threshold,
                             std::size_t max_keep = std::numeric_limits<std::size_t>::max());

struct Tube {
  std::vector<std::size_t> indices;  // chosen box per frame
  double score = 0.0;
};

/// Linking score of two boxes in consecutive frames.
double link_score(const Box2D& a, const Box2D& b, double lambda_link);

/// Maximizes (1/T) Σ_{t<T} link_score(b_t, b_{t+1}) by dynamic programming.
/// Among equally scored sequences the lexicographically smallest index
/// sequence wins. With a single frame the best-scoring box is chosen and the
/// tube score is that box's score. Throws ValidationError on an empty frame.
Tube link_tube(const FrameBoxes& frames, const LinkConfig& cfg);

/// Moving average over [n-a, n+a], window clipped to the sequence. Scores
/// are carried over unchanged.
std::vector<Box2D> smooth_tube(const std::vector<Box2D>& boxes, int half_window);

struct FrameSize {
  double width = 0, height = 0;
};

/// Boxes of size zoom_ratio * frame centred on the k largest attention cells
/// (row-major order on ties), clipped to the frame and scored by the cell
/// value. Cell (i, j) of an h x w map is centred at ((j+.5)W/w, (i+.5)H/h).
std::vector<Box2D> peaks_to_boxes(const Tensor2D& attention, int k, double zoom_ratio,
                                  FrameSize frame);

}  // namespace signspot

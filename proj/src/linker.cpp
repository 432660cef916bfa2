#include "signspot/linker.hpp"

#include <algorithm>
#include <numeric>

namespace signspot {

std::vector<std::size_t> frame_nms_indices(const std::vector<Box2D>& boxes, double iou_threshold,
                                           std::size_t max_keep) {
  if (iou_threshold < 0 || iou_threshold > 1)
    throw ValidationError("frame_nms: threshold must be in [0, 1]");
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return boxes[a].score > boxes[b].score; });
  std::vector<std::size_t> kept;
  std::vector<bool> suppressed(boxes.size(), false);
  for (std::size_t oi = 0; oi < order.size() && kept.size() < max_keep; ++oi) {
    const std::size_t i = order[oi];
    if (suppressed[i]) continue;
    kept.push_back(i);
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      const std::size_t j = order[oj];
      if (!suppressed[j] && box_iou(boxes[i], boxes[j]) > iou_threshold) suppressed[j] = true;
    }
  }
  return kept;
}

std::vector<Box2D> frame_nms(const std::vector<Box2D>& boxes, double iou_threshold,
                             std::size_t max_keep) {
  std::vector<Box2D> out;
  for (std::size_t i : frame_nms_indices(boxes, iou_threshold, max_keep)) out.push_back(boxes[i]);
  return out;
}

double link_score(const Box2D& a, const Box2D& b, double lambda_link) {
  return a.score + b.score + lambda_link * box_iou(a, b);
}

Tube link_tube(const FrameBoxes& frames, const LinkConfig& cfg) {
  const std::size_t T = frames.size();
  if (T == 0) throw ValidationError("link_tube: no frames");
  for (std::size_t t = 0; t < T; ++t)
    if (frames[t].empty()) throw ValidationError("link_tube: frame " + std::to_string(t) + " has no boxes");

  Tube tube;
  if (T == 1) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < frames[0].size(); ++i)
      if (frames[0][i].score > frames[0][best].score) best = i;
    tube.indices = {best};
    tube.score = frames[0][best].score;
    return tube;
  }

  // suffix[t][i]: best sum of link scores from frame t (box i) to the end.
  // Solving backwards lets a forward pass pick the smallest index on ties.
  std::vector<std::vector<double>> suffix(T);
  suffix[T - 1].assign(frames[T - 1].size(), 0.0);
  for (std::size_t t = T - 1; t-- > 0;) {
    suffix[t].assign(frames[t].size(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < frames[t].size(); ++i)
      for (std::size_t j = 0; j < frames[t + 1].size(); ++j)
        suffix[t][i] = std::max(suffix[t][i], link_score(frames[t][i], frames[t + 1][j],
                                                         cfg.lambda_link) +
                                                  suffix[t + 1][j]);
  }
  std::size_t cur = 0;
  for (std::size_t i = 1; i < frames[0].size(); ++i)
    if (suffix[0][i] > suffix[0][cur]) cur = i;
  tube.indices.push_back(cur);
  double total = 0;
  for (std::size_t t = 0; t + 1 < T; ++t) {
    std::size_t best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < frames[t + 1].size(); ++j) {
      const double v = link_score(frames[t][cur], frames[t + 1][j], cfg.lambda_link) + suffix[t + 1][j];
      if (v > best_val) {
        best_val = v;
        best = j;
      }
    }
    total += link_score(frames[t][cur], frames[t + 1][best], cfg.lambda_link);
    cur = best;
    tube.indices.push_back(cur);
  }
  // E(l) sums T-1 pairwise terms but normalizes by T.
  tube.score = total / static_cast<double>(T);
  return tube;
}

std::vector<Box2D> smooth_tube(const std::vector<Box2D>& boxes, int half_window) {
  if (half_window < 0) throw ValidationError("smooth_tube: half window must be >= 0");
  const int n = static_cast<int>(boxes.size());
  std::vector<Box2D> out(boxes.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half_window), hi = std::min(n - 1, i + half_window);
    Box2D b{0, 0, 0, 0, boxes[i].score};
    for (int j = lo; j <= hi; ++j) {
      b.x1 += boxes[j].x1;
      b.y1 += boxes[j].y1;
      b.x2 += boxes[j].x2;
      b.y2 += boxes[j].y2;
    }
    const double cnt = hi - lo + 1;
    b.x1 /= cnt;
    b.y1 /= cnt;
    b.x2 /= cnt;
    b.y2 /= cnt;
    out[i] = b;
  }
  return out;
}

std::vector<Box2D> peaks_to_boxes(const Tensor2D& attention, int k, double zoom_ratio,
                                  FrameSize frame) {
  if (k < 1) throw ValidationError("peaks_to_boxes: k must be >= 1");
  if (!(zoom_ratio > 0 && zoom_ratio <= 1)) throw ValidationError("peaks_to_boxes: zoom ratio must be in (0, 1]");
  if (!(frame.width > 0 && frame.height > 0)) throw ValidationError("peaks_to_boxes: empty frame");
  if (attention.size() == 0) throw ValidationError("peaks_to_boxes: empty attention map");
  const auto& a = attention.data();
  for (double v : a)
    if (v < 0) throw ValidationError("peaks_to_boxes: attention must be nonnegative");
  std::vector<std::size_t> cells(a.size());
  std::iota(cells.begin(), cells.end(), 0);
  const std::size_t take = std::min<std::size_t>(k, cells.size());
  std::partial_sort(cells.begin(), cells.begin() + take, cells.end(),
                    [&](std::size_t x, std::size_t y) { return a[x] > a[y] || (a[x] == a[y] && x < y); });
  const double bw = zoom_ratio * frame.width, bh = zoom_ratio * frame.height;
  std::vector<Box2D> out;
  for (std::size_t n = 0; n < take; ++n) {
    const std::size_t i = cells[n] / attention.cols(), j = cells[n] % attention.cols();
    const double cx = (j + 0.5) * frame.width / attention.cols();
    const double cy = (i + 0.5) * frame.height / attention.rows();
    out.push_back(Box2D{std::max(0.0, cx - bw / 2), std::max(0.0, cy - bh / 2),
                        std::min(frame.width, cx + bw / 2), std::min(frame.height, cy + bh / 2),
                        a[cells[n]]});
  }
  return out;
}

}  // namespace signspot

// Copyright 2026 The seedprop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "seedprop/segfit/segment_fit.h"

#include <algorithm>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "seedprop/core/error.h"

namespace seedprop {

void SegfitConfig::validate() const {
  if (batch_size < 1) throw ValidationError("segfit batch_size must be >= 1");
  if (min_mask_pixels < 1) throw ValidationError("segfit min_mask_pixels must be >= 1");
  if (!(simplify_tolerance_px >= 0.0)) {
    throw ValidationError("segfit simplify_tolerance_px must be >= 0");
  }
  if (workers < 1) throw ValidationError("segfit workers must be >= 1");
}

PolygonLabel box_polygon(const NormBox& box) {
  const NormBox b = clamp_to_image(box);
  const double x0 = b.cx - b.w / 2, x1 = b.cx + b.w / 2;
  const double y0 = b.cy - b.h / 2, y1 = b.cy + b.h / 2;
  auto unit = [](double v) { return std::clamp(v, 0.0, 1.0); };
  return PolygonLabel{b.class_id,
                      {{unit(x0), unit(y0)}, {unit(x1), unit(y0)},
                       {unit(x1), unit(y1)}, {unit(x0), unit(y1)}}};
}

namespace {

std::size_t distinct_count(const std::vector<PixelCoord>& ring) {
  std::vector<PixelCoord> sorted = ring;
  std::sort(sorted.begin(), sorted.end());
  return std::unique(sorted.begin(), sorted.end()) - sorted.begin();
}

}  // namespace

FittedInstance fit_mask(const MaskGrid& mask, int class_id, double simplify_tolerance_px,
                        std::size_t* fragments) {
  // Work on the foreground's bounding window; everything outside it is
  // background, so components and contours are unchanged.
  const PixelBox window = min_bounding_box(mask);
  const int x0 = static_cast<int>(window.x_min);
  const int y0 = static_cast<int>(window.y_min);
  MaskGrid crop(ImageGeometry{static_cast<int>(window.width()),
                              static_cast<int>(window.height())});
  for (int y = 0; y < crop.height(); ++y) {
    for (int x = 0; x < crop.width(); ++x) {
      if (mask.test(x0 + x, y0 + y)) crop.set(x, y);
    }
  }

  const ComponentInfo component = largest_component(crop);
  if (fragments != nullptr) *fragments = component.component_count - 1;

  FittedInstance out;
  PixelBox box = min_bounding_box(component.mask);
  box.x_min += x0;
  box.x_max += x0;
  box.y_min += y0;
  box.y_max += y0;
  out.box = pixel_to_norm(box, mask.geometry(), class_id);

  const std::vector<PixelCoord> ring = extract_contour(component.mask);
  std::vector<PixelCoord> vertices = simplify_ring(ring, simplify_tolerance_px);
  if (distinct_count(vertices) < 3) vertices = ring;
  if (distinct_count(vertices) < 3) {
    // Thin blobs (a line or a single pixel) have no area to trace.
    out.polygon = box_polygon(out.box);
    return out;
  }
  out.polygon.class_id = class_id;
  const double w = mask.width();
  const double h = mask.height();
  for (const PixelCoord& p : vertices) {
    out.polygon.vertices.push_back(Point2{(p.x + x0 + 0.5) / w, (p.y + y0 + 0.5) / h});
  }
  return out;
}

namespace {

Provenance frame_provenance(std::size_t position) {
  return position == 0 ? Provenance::kManual : Provenance::kPropagated;
}

class FrameFitter {
 public:
  FrameFitter(SegmenterBackend& backend, const SegfitConfig& config,
              const ImageGeometry& geometry, const FramePathFn& frame_path,
              const std::string& job_id, SegfitStats* stats, std::size_t batch)
      : backend_(backend),
        config_(config),
        geometry_(geometry),
        frame_path_(frame_path),
        job_id_(job_id),
        stats_(stats),
        batch_(batch) {}

  FrameLabels fit(const TrackFrame& frame, Provenance provenance) {
    FrameLabels labels{frame.frame_index, {}, {}, provenance};
    std::vector<const TrackPoint*> alive;
    for (const TrackPoint& p : frame.points) {
      if (p.alive()) alive.push_back(&p);
    }
    if (alive.empty()) return labels;

    SegmentRequest base;
    base.job_id = job_id_;
    base.frame_index = frame.frame_index;
    base.frame_path = frame_path_(frame.frame_index);
    base.geometry = geometry_;

    std::map<int, MaskGrid> masks;
    for (std::size_t offset = 0; offset < alive.size(); offset += batch_) {
      SegmentRequest request = base;
      const std::size_t stop = std::min(alive.size(), offset + batch_);
      for (std::size_t i = offset; i < stop; ++i) {
        request.boxes.push_back(
            SegmentPrompt{alive[i]->track_id, norm_to_pixel(alive[i]->box(), geometry_)});
      }
      SegmentResponse response = backend_.segment(request);
      if (stats_ != nullptr) ++stats_->backend_calls;
      collect(request, response, masks);
    }

    for (const TrackPoint* p : alive) {
      const MaskGrid& mask = masks.at(p->track_id);
      const NormBox prompt = p->box();
      if (mask.foreground_count() < static_cast<std::size_t>(config_.min_mask_pixels)) {
        spdlog::debug("frame {} track {}: mask below {} pixels, keeping the prompt box",
                     frame.frame_index, p->track_id, config_.min_mask_pixels);
        if (stats_ != nullptr) ++stats_->fallbacks;
        const NormBox kept = clamp_to_image(prompt);
        if (!(kept.w > 0.0 && kept.h > 0.0)) continue;  // prompt lies off-image
        labels.boxes.push_back(kept);
        labels.polygons.push_back(box_polygon(kept));
        continue;
      }
      std::size_t fragments = 0;
      FittedInstance fitted =
          fit_mask(mask, p->class_id, config_.simplify_tolerance_px, &fragments);
      if (fragments > 0) {
        spdlog::info("frame {} track {}: dropped {} mask fragment(s)", frame.frame_index,
                     p->track_id, fragments);
        if (stats_ != nullptr) ++stats_->fragment_losses;
      }
      labels.boxes.push_back(fitted.box);
      labels.polygons.push_back(std::move(fitted.polygon));
    }
    return labels;
  }

 private:
  void collect(const SegmentRequest& request, const SegmentResponse& response,
               std::map<int, MaskGrid>& masks) const {
    if (response.job_id != request.job_id) {
      throw BackendError("segmenter answered job '" + response.job_id + "', expected '" +
                         request.job_id + "'");
    }
    if (response.masks.size() != request.boxes.size()) {
      throw BackendError("segmenter returned " + std::to_string(response.masks.size()) +
                         " masks for " + std::to_string(request.boxes.size()) + " prompts");
    }
    std::map<int, bool> pending;
    for (const SegmentPrompt& prompt : request.boxes) pending[prompt.track_id] = true;
    for (const MaskResult& result : response.masks) {
      auto it = pending.find(result.track_id);
      if (it == pending.end() || !it->second) {
        throw BackendError("segmenter returned unexpected or duplicate track " +
                           std::to_string(result.track_id));
      }
      it->second = false;
      if (result.rows != geometry_.height_px || result.cols != geometry_.width_px) {
        throw BackendError("segmenter mask is " + std::to_string(result.cols) + "x" +
                           std::to_string(result.rows) + ", frame is " +
                           std::to_string(geometry_.width_px) + "x" +
                           std::to_string(geometry_.height_px));
      }
      try {
        masks.emplace(result.track_id, decode_rle(result.rle, result.rows, result.cols));
      } catch (const ValidationError& e) {
        throw BackendError(std::string("segmenter sent a bad mask: ") + e.what());
      }
    }
  }

  SegmenterBackend& backend_;
  const SegfitConfig& config_;
  const ImageGeometry& geometry_;
  const FramePathFn& frame_path_;
  const std::string& job_id_;
  SegfitStats* stats_;
  std::size_t batch_;
};

void warn_fallbacks(std::size_t count, int min_mask_pixels) {
  if (count == 0) return;
  spdlog::warn("{} instance(s) had a mask below {} pixels and kept the prompt box", count,
               min_mask_pixels);
}

}  // namespace

std::vector<FrameLabels> segment_and_fit(const TrackSet& tracks, SegmenterBackend* backend,
                                         const SegfitConfig& config,
                                         const ImageGeometry& geometry,
                                         const FramePathFn& frame_path,
                                         const std::string& job_id, SegfitStats* stats) {
  config.validate();
  geometry.validate();
  if (tracks.frames.empty()) throw ValidationError("segment_and_fit: empty TrackSet");

  std::vector<FrameLabels> out(tracks.frames.size());
  if (!config.enabled) {
    for (std::size_t i = 0; i < tracks.frames.size(); ++i) {
      out[i] = FrameLabels{tracks.frames[i].frame_index, tracks.frames[i].label_boxes(), {},
                           frame_provenance(i)};
    }
    return out;
  }
  if (backend == nullptr) throw ValidationError("segment_and_fit: no segmenter backend");

  SegfitStats local_stats;
  if (stats == nullptr) stats = &local_stats;
  const std::size_t fallbacks_before = stats->fallbacks;
  const BackendInfo info = backend->info();
  std::size_t batch = static_cast<std::size_t>(config.batch_size);
  if (info.max_prompts > 0) batch = std::min(batch, static_cast<std::size_t>(info.max_prompts));
  FrameFitter fitter(*backend, config, geometry, frame_path, job_id, stats, batch);

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(config.workers), tracks.frames.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < tracks.frames.size(); ++i) {
      out[i] = fitter.fit(tracks.frames[i], frame_provenance(i));
    }
    warn_fallbacks(stats->fallbacks - fallbacks_before, config.min_mask_pixels);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (std::size_t i = next++; i < tracks.frames.size(); i = next++) {
      try {
        out[i] = fitter.fit(tracks.frames[i], frame_provenance(i));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = tracks.frames.size();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  warn_fallbacks(stats->fallbacks - fallbacks_before, config.min_mask_pixels);
  return out;
}

}  // namespace seedprop

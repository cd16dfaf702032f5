/*
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "psf/pipeline.hpp"

namespace psf {

GrayImage align_and_crop(const GrayImage& capture, const NoteLayout& layout) {
  const MarkerPair found = detect_markers(capture, layout.marker_threshold, layout.marker_min_area);
  const double alpha = rotation_angle(found);
  if (alpha == 0.0) return crop_feature_area(capture, found, layout.feature);
  const GrayImage upright = rotate(capture, -alpha);
  const MarkerPair settled = detect_markers(upright, layout.marker_threshold, layout.marker_min_area);
  return crop_feature_area(upright, settled, layout.feature);
}

Extractor::Extractor(const GaborParams& params, const NoteLayout& layout)
    : params_(params), layout_(layout), kernel_(build_kernel(params)) {}

Fingerprint Extractor::from_capture(const GrayImage& capture) const {
  return from_crop(align_and_crop(capture, layout_));
}

Fingerprint Extractor::from_crop(const GrayImage& crop) const { return extract(crop, kernel_); }

}  // namespace psf

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

#pragma once

#include "psf/fingerprint.hpp"
#include "psf/gabor.hpp"
#include "psf/image.hpp"
#include "psf/synth.hpp"

namespace psf {

/// Locate markers, undo the tilt, re-locate, and cut the feature rectangle.
GrayImage align_and_crop(const GrayImage& capture, const NoteLayout& layout);

/// Capture-to-fingerprint pipeline with the kernel built once.
class Extractor {
 public:
  explicit Extractor(const GaborParams& params = {}, const NoteLayout& layout = {});

  /// Full capture: align and crop first.
  Fingerprint from_capture(const GrayImage& capture) const;
  /// Already-cropped 721x721 feature area.
  Fingerprint from_crop(const GrayImage& crop) const;

  const GaborParams& params() const { return params_; }
  const NoteLayout& layout() const { return layout_; }

 private:
  GaborParams params_;
  NoteLayout layout_;
  GaborKernel<double> kernel_;
};

}  // namespace psf

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nn/tensor.hpp"

namespace advkit::io {

// Images travel as [3, H, W] float tensors in [0, 1]; on disk they are 8-bit
// RGB PNGs. Values quantized to n/255 round-trip exactly.

nn::TensorF load_png(const std::string& path);
void save_png(const nn::TensorF& image, const std::string& path);

// All *.png in a directory, sorted by filename: (basename, image).
std::vector<std::pair<std::string, nn::TensorF>> load_png_dir(const std::string& dir);

// Stack rank-3 images into one [B, 3, H, W] batch.
nn::TensorF stack_images(const std::vector<nn::TensorF>& images);

// View image b of a [B, 3, H, W] batch as a rank-3 tensor.
nn::TensorF slice_image(const nn::TensorF& batch, int index);

// Quantize every value to the nearest n/255 (what saving then loading does).
nn::TensorF quantize_255(const nn::TensorF& image);

}  // namespace advkit::io

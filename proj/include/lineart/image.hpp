#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <utility>
#include <vector>

namespace lineart {

// Images are C×H×W float32 tensors with values in [-1, 1]; C is 1 (line drawing) or 3 (RGB).

// Reads a PNG/JPEG, converts to `channels` (luminance for 1), resizes bilinearly to
// size×size and maps [0,255] onto [-1,1]. Throws IoError / ValidationError.
torch::Tensor load_image(const std::filesystem::path& path, int channels, int size);

// Native (height, width) of an image file; throws IoError.
std::pair<int64_t, int64_t> image_dimensions(const std::filesystem::path& path);

// Writes a C×H×W [-1,1] tensor as an 8-bit PNG.
void save_image(const torch::Tensor& image, const std::filesystem::path& path);

// Bilinear resize of a C×H×W image to height×width.
torch::Tensor resize_image(const torch::Tensor& image, int64_t height, int64_t width);

// Throws ValidationError unless `image` is a finite C×H×W tensor with the given channel
// count (0 accepts any) and values in [-1, 1].
void check_image(const torch::Tensor& image, int64_t channels, const char* what);

// BT.601 luminance of a 3×H×W image, returned as 1×H×W.
torch::Tensor luminance(const torch::Tensor& rgb);

// *.png / *.jpg / *.jpeg files of a directory in sorted filename order.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

}  // namespace lineart

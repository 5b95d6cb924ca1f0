#include "lineart/image.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>

#include "lineart/errors.hpp"

namespace lineart {

namespace fs = std::filesystem;

torch::Tensor load_image(const fs::path& path, int channels, int size) {
  if (channels != 1 && channels != 3) {
    throw ValidationError("load_image: channels must be 1 or 3");
  }
  if (size <= 0) {
    throw ValidationError("load_image: size must be positive");
  }
  if (!fs::is_regular_file(path)) {
    throw IoError("cannot read image: " + path.string());
  }
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) {
    throw IoError("unreadable or corrupt image: " + path.string());
  }
  if (bgr.rows == 0 || bgr.cols == 0) {
    throw ValidationError("zero-dimension image: " + path.string());
  }

  cv::Mat converted;
  if (channels == 1) {
    cv::cvtColor(bgr, converted, cv::COLOR_BGR2GRAY);
  } else {
    cv::cvtColor(bgr, converted, cv::COLOR_BGR2RGB);
  }
  if (converted.rows != size || converted.cols != size) {
    cv::Mat resized;
    cv::resize(converted, resized, cv::Size(size, size), 0, 0, cv::INTER_LINEAR);
    converted = resized;
  }

  cv::Mat bytes = converted.isContinuous() ? converted : converted.clone();
  auto hwc = torch::from_blob(bytes.data, {size, size, channels}, torch::kUInt8);
  // 255 / 127.5 is exactly 2, so the end points map to exactly ±1.
  return hwc.permute({2, 0, 1}).to(torch::kFloat32).div(127.5).sub(1.0).contiguous();
}

std::pair<int64_t, int64_t> image_dimensions(const fs::path& path) {
  const cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (mat.empty()) throw IoError("unreadable or corrupt image: " + path.string());
  return {mat.rows, mat.cols};
}

void save_image(const torch::Tensor& image, const fs::path& path) {
  check_image(image, 0, "save_image");
  const auto channels = image.size(0);
  auto hwc = image.detach()
                 .to(torch::kFloat32)
                 .add(1.0)
                 .mul(127.5)
                 .round()
                 .clamp(0, 255)
                 .to(torch::kUInt8)
                 .permute({1, 2, 0})
                 .contiguous();
  cv::Mat mat(static_cast<int>(hwc.size(0)), static_cast<int>(hwc.size(1)),
              channels == 1 ? CV_8UC1 : CV_8UC3, hwc.data_ptr<uint8_t>());
  cv::Mat out;
  if (channels == 3) {
    cv::cvtColor(mat, out, cv::COLOR_RGB2BGR);
  } else {
    out = mat;
  }
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  if (!cv::imwrite(path.string(), out)) {
    throw IoError("cannot write image: " + path.string());
  }
}

torch::Tensor resize_image(const torch::Tensor& image, int64_t height, int64_t width) {
  if (image.size(1) == height && image.size(2) == width) {
    return image;
  }
  namespace F = torch::nn::functional;
  return F::interpolate(image.unsqueeze(0),
                        F::InterpolateFuncOptions()
                            .size(std::vector<int64_t>{height, width})
                            .mode(torch::kBilinear)
                            .align_corners(false))
      .squeeze(0);
}

void check_image(const torch::Tensor& image, int64_t channels, const char* what) {
  if (!image.defined() || image.dim() != 3) {
    throw ValidationError(std::string(what) + ": expected a C×H×W image tensor");
  }
  if (channels != 0 && image.size(0) != channels) {
    throw ValidationError(std::string(what) + ": expected " + std::to_string(channels) +
                          " channels, got " + std::to_string(image.size(0)));
  }
  if (image.size(0) != 1 && image.size(0) != 3) {
    throw ValidationError(std::string(what) + ": images have 1 or 3 channels");
  }
  if (image.size(1) == 0 || image.size(2) == 0) {
    throw ValidationError(std::string(what) + ": zero-dimension image");
  }
  if (!torch::isfinite(image).all().item<bool>()) {
    throw ValidationError(std::string(what) + ": non-finite values");
  }
  // Small slack for float round-off from interpolation.
  if (image.abs().max().item<double>() > 1.0 + 1e-5) {
    throw ValidationError(std::string(what) + ": values outside [-1, 1]");
  }
}

torch::Tensor luminance(const torch::Tensor& rgb) {
  if (rgb.dim() != 3 || rgb.size(0) != 3) {
    throw ValidationError("luminance: expected a 3×H×W image");
  }
  return (0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]).unsqueeze(0);
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw IoError("not a directory: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace lineart

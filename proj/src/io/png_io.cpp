#include "io/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>

#include "common/error.hpp"

namespace advkit::io {

namespace fs = std::filesystem;

nn::TensorF load_png(const std::string& path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        fail_io("cannot read png '" + path + "': " + image.message);
    image.format = PNG_FORMAT_RGB;
    std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        fail_io("cannot decode png '" + path + "': " + msg);
    }
    const int h = static_cast<int>(image.height), w = static_cast<int>(image.width);
    nn::TensorF out({3, h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                out.ptr()[(static_cast<std::int64_t>(c) * h + y) * w + x] =
                    static_cast<float>(buffer[(static_cast<std::size_t>(y) * w + x) * 3 + c]) / 255.0f;
    return out;
}

void save_png(const nn::TensorF& image, const std::string& path) {
    require(image.rank() == 3 && image.dim(0) == 3, ErrorCode::invalid_input, "save_png expects a [3, H, W] tensor");
    const int h = image.dim(1), w = image.dim(2);
    std::vector<unsigned char> buffer(static_cast<std::size_t>(h) * w * 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                float v = image.ptr()[(static_cast<std::int64_t>(c) * h + y) * w + x];
                v = std::min(1.0f, std::max(0.0f, v));
                buffer[(static_cast<std::size_t>(y) * w + x) * 3 + c] =
                    static_cast<unsigned char>(std::lround(v * 255.0f));
            }
    png_image out;
    std::memset(&out, 0, sizeof(out));
    out.version = PNG_IMAGE_VERSION;
    out.width = static_cast<png_uint_32>(w);
    out.height = static_cast<png_uint_32>(h);
    out.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&out, path.c_str(), 0, buffer.data(), 0, nullptr))
        fail_io("cannot write png '" + path + "': " + out.message);
}

std::vector<std::pair<std::string, nn::TensorF>> load_png_dir(const std::string& dir) {
    require(fs::is_directory(dir), ErrorCode::io, "not a directory: " + dir);
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png") names.push_back(entry.path().filename());
    std::sort(names.begin(), names.end());
    require(!names.empty(), ErrorCode::io, "no png files in " + dir);
    std::vector<std::pair<std::string, nn::TensorF>> out;
    out.reserve(names.size());
    for (const auto& n : names) out.emplace_back(n, load_png((fs::path(dir) / n).string()));
    return out;
}

nn::TensorF stack_images(const std::vector<nn::TensorF>& images) {
    require(!images.empty(), ErrorCode::invalid_input, "no images to stack");
    const int h = images[0].dim(1), w = images[0].dim(2);
    nn::TensorF batch({static_cast<int>(images.size()), 3, h, w});
    const std::int64_t per = static_cast<std::int64_t>(3) * h * w;
    for (std::size_t i = 0; i < images.size(); ++i) {
        require(images[i].rank() == 3 && images[i].dim(1) == h && images[i].dim(2) == w, ErrorCode::invalid_input,
                "images differ in shape");
        std::copy(images[i].data.begin(), images[i].data.end(), batch.data.begin() + static_cast<std::ptrdiff_t>(i * per));
    }
    return batch;
}

nn::TensorF slice_image(const nn::TensorF& batch, int index) {
    require(batch.rank() == 4, ErrorCode::invalid_input, "slice_image expects a batch");
    require(index >= 0 && index < batch.dim(0), ErrorCode::invalid_input, "image index out of range");
    const int c = batch.dim(1), h = batch.dim(2), w = batch.dim(3);
    nn::TensorF img({c, h, w});
    const std::int64_t per = static_cast<std::int64_t>(c) * h * w;
    std::copy(batch.data.begin() + static_cast<std::ptrdiff_t>(index * per),
              batch.data.begin() + static_cast<std::ptrdiff_t>((index + 1) * per), img.data.begin());
    return img;
}

nn::TensorF quantize_255(const nn::TensorF& image) {
    nn::TensorF out = image;
    for (auto& v : out.data) {
        const float c = std::min(1.0f, std::max(0.0f, v));
        v = static_cast<float>(std::lround(c * 255.0f)) / 255.0f;
    }
    return out;
}

}  // namespace advkit::io

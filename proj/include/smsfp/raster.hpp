#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace smsfp {

// Row-major 2-D grid. (x, y) = (column, row), data()[y * width + x].
template <typename T>
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, T fill = T{})
        : width_(width), height_(height),
          data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
        if (width <= 0 || height <= 0)
            throw std::invalid_argument("Raster: dimensions must be positive");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& at(int x, int y) { return data_[idx(x, y)]; }
    const T& at(int x, int y) const { return data_[idx(x, y)]; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }
    std::size_t idx(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    template <typename U>
    bool same_size(const Raster<U>& other) const {
        return width_ == other.width() && height_ == other.height();
    }

    void fill(T value) { data_.assign(data_.size(), value); }

    friend bool operator==(const Raster& a, const Raster& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using RasterF = Raster<double>;
using MaskRaster = Raster<std::uint8_t>;
using LabelRaster = Raster<std::int32_t>;

inline std::size_t count_mask(const MaskRaster& mask) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) ++n;
    return n;
}

template <typename A, typename B>
void require_same_size(const Raster<A>& a, const Raster<B>& b, const std::string& what) {
    if (!a.same_size(b))
        throw std::invalid_argument(what + ": raster dimensions differ (" +
                                    std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                                    " vs " + std::to_string(b.width()) + "x" +
                                    std::to_string(b.height()) + ")");
}

}  // namespace smsfp

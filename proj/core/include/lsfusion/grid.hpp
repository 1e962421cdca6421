#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace lsfusion {

// Row-major 2-D array. Indexed (y, x) with y in [0, height) and x in [0, width).
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int height, int width, T fill = T{})
        : h_(height), w_(width), data_(static_cast<size_t>(height) * static_cast<size_t>(width), fill) {
        assert(height >= 0 && width >= 0);
    }

    int height() const { return h_; }
    int width() const { return w_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& at(int y, int x) {
        assert(y >= 0 && y < h_ && x >= 0 && x < w_);
        return data_[static_cast<size_t>(y) * w_ + x];
    }
    const T& at(int y, int x) const {
        assert(y >= 0 && y < h_ && x >= 0 && x < w_);
        return data_[static_cast<size_t>(y) * w_ + x];
    }

    T& operator[](size_t i) { return data_[i]; }
    const T& operator[](size_t i) const { return data_[i]; }

    T* row(int y) { return data_.data() + static_cast<size_t>(y) * w_; }
    const T* row(int y) const { return data_.data() + static_cast<size_t>(y) * w_; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    bool in_bounds(int y, int x) const { return y >= 0 && y < h_ && x >= 0 && x < w_; }

    template <typename U>
    bool same_shape(const Grid<U>& other) const {
        return h_ == other.height() && w_ == other.width();
    }

    bool operator==(const Grid& other) const {
        return h_ == other.h_ && w_ == other.w_ && data_ == other.data_;
    }

private:
    int h_ = 0;
    int w_ = 0;
    std::vector<T> data_;
};

}  // namespace lsfusion

#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ladderdet {

/// Dense NCHW tensor. T is float for training, double for gradient checks.
template <typename T>
struct Tensor4 {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<T> data;

    Tensor4() = default;
    Tensor4(int n_, int c_, int h_, int w_, T fill = T(0))
        : n(n_), c(c_), h(h_), w(w_),
          data(static_cast<size_t>(n_) * c_ * h_ * w_, fill) {}

    size_t size() const { return data.size(); }

    T& operator()(int i, int j, int y, int x) {
        return data[((static_cast<size_t>(i) * c + j) * h + y) * w + x];
    }
    T operator()(int i, int j, int y, int x) const {
        return data[((static_cast<size_t>(i) * c + j) * h + y) * w + x];
    }

    T* plane(int i, int j) { return data.data() + (static_cast<size_t>(i) * c + j) * h * w; }
    const T* plane(int i, int j) const {
        return data.data() + (static_cast<size_t>(i) * c + j) * h * w;
    }

    bool same_shape(const Tensor4& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }

    /// View of the same data as (n, c*h*w, 1, 1); used between conv and FC.
    Tensor4 flattened() const {
        Tensor4 out = *this;
        out.c = c * h * w;
        out.h = 1;
        out.w = 1;
        return out;
    }

    template <typename U>
    Tensor4<U> cast() const {
        Tensor4<U> out;
        out.n = n;
        out.c = c;
        out.h = h;
        out.w = w;
        out.data.assign(data.begin(), data.end());
        return out;
    }
};

} // namespace ladderdet

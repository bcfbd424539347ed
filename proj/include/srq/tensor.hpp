#ifndef SRQ_TENSOR_HPP
#define SRQ_TENSOR_HPP

#include <array>
#include <cassert>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace srq {

// Dense row-major tensor of doubles. Images are (H, W, C); batches are
// (N, H, W, C).
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape, double fill = 0.0)
        : shape_(std::move(shape)), data_(numel_of(shape_), fill) {}

    Tensor(std::vector<int> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (static_cast<std::size_t>(numel_of(shape_)) != data_.size())
            throw std::invalid_argument("tensor shape/data size mismatch");
    }

    static Tensor image(int h, int w, int c, double fill = 0.0) {
        return Tensor({h, w, c}, fill);
    }

    const std::vector<int>& shape() const { return shape_; }
    int dim(int i) const { return shape_.at(static_cast<std::size_t>(i)); }
    int rank() const { return static_cast<int>(shape_.size()); }
    std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& flat() { return data_; }
    const std::vector<double>& flat() const { return data_; }

    double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
    double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

    // (h, w, c) access for rank-3 tensors
    double& at(int h, int w, int c) {
        return data_[static_cast<std::size_t>((static_cast<std::int64_t>(h) * shape_[1] + w) * shape_[2] + c)];
    }
    double at(int h, int w, int c) const {
        return data_[static_cast<std::size_t>((static_cast<std::int64_t>(h) * shape_[1] + w) * shape_[2] + c)];
    }

    // (n, h, w, c) access for rank-4 tensors
    double& at(int n, int h, int w, int c) {
        return data_[idx4(n, h, w, c)];
    }
    double at(int n, int h, int w, int c) const {
        return data_[idx4(n, h, w, c)];
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    std::string shape_str() const {
        std::string s = "(";
        for (std::size_t i = 0; i < shape_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape_[i]);
        }
        return s + ")";
    }

    static std::int64_t numel_of(const std::vector<int>& shape) {
        std::int64_t n = 1;
        for (int d : shape) {
            if (d < 0) throw std::invalid_argument("negative tensor dimension");
            n *= d;
        }
        return n;
    }

private:
    std::size_t idx4(int n, int h, int w, int c) const {
        std::int64_t i = ((static_cast<std::int64_t>(n) * shape_[1] + h) * shape_[2] + w) * shape_[3] + c;
        return static_cast<std::size_t>(i);
    }

    std::vector<int> shape_;
    std::vector<double> data_;
};

using ImagePatch = Tensor;  // rank-3 (H, W, C), intensities in [0,1]

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": shape mismatch " +
                                    a.shape_str() + " vs " + b.shape_str());
}

}  // namespace srq

#endif

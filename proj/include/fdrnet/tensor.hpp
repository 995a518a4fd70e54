#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdrnet {

// Dense double-precision array. Rank-3 tensors (C, H, W) carry feature maps;
// conv weights are rank-4, vectors rank-1, scalars rank-1 of size 1.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> dims, double fill = 0.0);

    static Tensor scalar(double v);
    static Tensor zeros_like(const Tensor& t);
    static Tensor uniform(std::vector<int> dims, double lo, double hi, std::mt19937_64& rng);

    int rank() const { return static_cast<int>(dims_.size()); }
    int dim(int i) const { return dims_[static_cast<size_t>(i)]; }
    const std::vector<int>& dims() const { return dims_; }
    int size() const { return static_cast<int>(data_.size()); }
    bool empty() const { return data_.empty(); }
    bool same_shape(const Tensor& o) const { return dims_ == o.dims_; }
    std::string shape_str() const;

    // rank-3 accessors
    int channels() const { return dims_[0]; }
    int height() const { return dims_[1]; }
    int width() const { return dims_[2]; }
    double& at(int c, int y, int x) { return data_[static_cast<size_t>((c * dims_[1] + y) * dims_[2] + x)]; }
    double at(int c, int y, int x) const { return data_[static_cast<size_t>((c * dims_[1] + y) * dims_[2] + x)]; }

    double& operator[](int i) { return data_[static_cast<size_t>(i)]; }
    double operator[](int i) const { return data_[static_cast<size_t>(i)]; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool all_finite() const;
    double max_abs() const;
    void fill(double v);

private:
    std::vector<int> dims_;
    std::vector<double> data_;
};

// A feature map is a rank-3 tensor indexed (channel, y, x).
using FeatureMap = Tensor;

// Per-pixel 2-vector offset grid, stored as a rank-3 tensor with
// channel 0 = dx (columns) and channel 1 = dy (rows), pixel units.
struct FlowField {
    Tensor data;  // (2, H, W)

    FlowField() = default;
    explicit FlowField(int h, int w) : data({2, h, w}) {}
    explicit FlowField(Tensor t);

    int height() const { return data.dim(1); }
    int width() const { return data.dim(2); }
    double& dx(int y, int x) { return data.at(0, y, x); }
    double& dy(int y, int x) { return data.at(1, y, x); }
    double dx(int y, int x) const { return data.at(0, y, x); }
    double dy(int y, int x) const { return data.at(1, y, x); }
};

void check_shape(bool cond, const std::string& msg);

}  // namespace fdrnet

#include "fdrnet/tensor.hpp"

#include <cmath>
#include <sstream>

namespace fdrnet {

Tensor::Tensor(std::vector<int> dims, double fill) : dims_(std::move(dims)) {
    size_t n = 1;
    for (int d : dims_) {
        if (d <= 0) throw std::invalid_argument("Tensor: non-positive dimension");
        n *= static_cast<size_t>(d);
    }
    data_.assign(n, fill);
}

Tensor Tensor::scalar(double v) {
    Tensor t({1});
    t.data_[0] = v;
    return t;
}

Tensor Tensor::zeros_like(const Tensor& t) { return Tensor(t.dims_); }

Tensor Tensor::uniform(std::vector<int> dims, double lo, double hi, std::mt19937_64& rng) {
    Tensor t(std::move(dims));
    std::uniform_real_distribution<double> dist(lo, hi);
    for (auto& v : t.data_) v = dist(rng);
    return t;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < dims_.size(); ++i) os << (i ? "," : "") << dims_[i];
    os << ")";
    return os.str();
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

double Tensor::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
}

void Tensor::fill(double v) { data_.assign(data_.size(), v); }

FlowField::FlowField(Tensor t) : data(std::move(t)) {
    check_shape(data.rank() == 3 && data.dim(0) == 2, "FlowField: expected (2,H,W) tensor");
}

void check_shape(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace fdrnet

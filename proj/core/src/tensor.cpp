#include "repsim/tensor.hpp"

#include "repsim/error.hpp"

#include <cmath>
#include <string>

namespace repsim {

std::size_t Tensor::element_count(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t axis : shape) n *= axis;
    return n;
}

Tensor::Tensor(std::vector<std::size_t> shape, Dtype dtype)
    : shape_(std::move(shape)), values_(element_count(shape_), 0.0), dtype_(dtype) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values, Dtype dtype)
    : shape_(std::move(shape)), values_(std::move(values)), dtype_(dtype) {
    if (values_.size() != element_count(shape_)) {
        raise(ErrorKind::shape, "value count " + std::to_string(values_.size()) +
                                    " does not match shape product " +
                                    std::to_string(element_count(shape_)));
    }
}

bool Tensor::all_finite() const {
    for (double v : values_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Eigen::MatrixXd flatten_layer(const Tensor& t, FlattenMode mode) {
    if (t.rank() < 2) {
        raise(ErrorKind::shape, "flatten_layer needs rank >= 2, got rank " +
                                    std::to_string(t.rank()));
    }
    const auto n = static_cast<Eigen::Index>(t.shape()[0]);
    const std::size_t per_example = t.size() / t.shape()[0];

    if (mode == FlattenMode::flatten_all) {
        // Row-major copy: feature order is the C order of the remaining axes.
        Eigen::MatrixXd out(n, static_cast<Eigen::Index>(per_example));
        const double* src = t.data();
        for (Eigen::Index i = 0; i < n; ++i) {
            for (std::size_t f = 0; f < per_example; ++f) {
                out(i, static_cast<Eigen::Index>(f)) = src[i * per_example + f];
            }
        }
        return out;
    }

    const std::size_t channels = t.shape()[1];
    const std::size_t spatial = per_example / channels;  // everything past the channel axis
    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(channels));
    const double* src = t.data();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < channels; ++c) {
            const double* cell = src + (static_cast<std::size_t>(i) * channels + c) * spatial;
            double sum = 0.0;
            for (std::size_t s = 0; s < spatial; ++s) sum += cell[s];
            out(i, static_cast<Eigen::Index>(c)) = sum / static_cast<double>(spatial);
        }
    }
    return out;
}

}  // namespace repsim

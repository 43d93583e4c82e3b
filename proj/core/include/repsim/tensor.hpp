#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace repsim {

/// Element type recorded for array files. Values are held as doubles in
/// memory; the tag controls the on-disk element width.
enum class Dtype { f32, f64 };

/// Dense C-order tensor, 1 to 5 axes.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::vector<std::size_t> shape, Dtype dtype = Dtype::f64);
    Tensor(std::vector<std::size_t> shape, std::vector<double> values,
           Dtype dtype = Dtype::f64);

    std::size_t rank() const { return shape_.size(); }
    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t size() const { return values_.size(); }
    Dtype dtype() const { return dtype_; }

    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    bool all_finite() const;

    static std::size_t element_count(const std::vector<std::size_t>& shape);

private:
    std::vector<std::size_t> shape_;
    std::vector<double> values_;
    Dtype dtype_ = Dtype::f64;
};

enum class FlattenMode { flatten_all, spatial_mean };

/// Reduce a tensor whose first axis indexes examples to an n-by-p matrix.
/// flatten_all keeps every value (p = product of the remaining axes, C
/// order); spatial_mean averages everything past the channel axis (p =
/// shape[1]). Rank must be at least 2.
Eigen::MatrixXd flatten_layer(const Tensor& t, FlattenMode mode);

}  // namespace repsim

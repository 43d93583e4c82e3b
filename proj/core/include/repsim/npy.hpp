#pragma once

#include "repsim/tensor.hpp"

#include <filesystem>

namespace repsim {

/// Read an NPY v1.0 array file. Supported payloads: little-endian f32/f64,
/// C order, 1 to 5 axes, all values finite.
Tensor read_array(const std::filesystem::path& path);

/// Write an NPY v1.0 file in the tensor's recorded dtype.
/// read_array(write_array(t)) reproduces t bit for bit.
void write_array(const Tensor& t, const std::filesystem::path& path);

}  // namespace repsim

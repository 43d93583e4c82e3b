#pragma once

#include "repsim/activation_set.hpp"

#include <cstdint>
#include <vector>

namespace repsim {

/// Frame sequence, T x C x H x W, values in [0,1].
struct Clip {
    int frames = 0;
    int channels = 0;
    int height = 0;
    int width = 0;
    double frame_rate = 30.0;
    std::vector<double> values;  // C order over (t, c, y, x)

    Clip() = default;
    Clip(int t, int c, int h, int w, double fps);

    double& at(int t, int c, int y, int x) {
        return values[((static_cast<std::size_t>(t) * channels + c) * height + y) * width + x];
    }
    double at(int t, int c, int y, int x) const {
        return values[((static_cast<std::size_t>(t) * channels + c) * height + y) * width + x];
    }

    void check() const;  // raises on empty/short/malformed clips
};

/// Parameters for one transformation set. The exact numeric values behind
/// each set are not pinned anywhere authoritative; these defaults are
/// placeholders and every one of them is exposed.
struct TransformSpec {
    TransformTag set = TransformTag::none;
    std::uint64_t seed = 0;
    double flip_prob = 0.5;
    double illum_amplitude = 0.1;
    double blur_sigma = 1.0;
    double speed_base = 1.0;
    double speed_mod_amplitude = 0.0;
    double speed_mod_freq = 0.0;  // Hz

    void check() const;  // probabilities in [0,1], speeds positive
};

/// Horizontal mirror of every frame when apply is set, identity otherwise.
Clip spatial_flip(const Clip& clip, bool apply);

/// One global offset per clip, uniform in [-amplitude, amplitude] from the
/// seed, added to every value, then clamped to [0,1].
Clip illumination_noise(const Clip& clip, double amplitude, std::uint64_t seed);

/// Per-frame separable Gaussian blur, kernel truncated at radius
/// ceil(3 sigma) and normalized to sum 1, mirrored edges.
Clip gaussian_blur(const Clip& clip, double sigma);

/// Resample along time with a sinusoidally modulated playback speed
///   v(u) = speed_base + speed_mod_amplitude * sin(2 pi f u / fps).
/// Output frame t interpolates the input at s(t), the integral of v,
/// clamped to the valid source range. Output length equals input length.
Clip temporal_resample(const Clip& clip, const TransformSpec& spec);

/// Unclamped source positions s(0..frame_count-1) for a spec.
std::vector<double> resample_positions(const TransformSpec& spec, int frame_count,
                                       double frame_rate);

/// The full transformation set: none is the identity; spatial applies
/// flip, illumination noise, then blur; temporal resamples playback;
/// all runs spatial then temporal. Order is fixed.
Clip apply_set(const Clip& clip, const TransformSpec& spec);

/// JSON text for the manifest "transform_spec" extension block;
/// parse(serialize(s)) == s.
std::string serialize_transform_spec(const TransformSpec& spec);
TransformSpec parse_transform_spec(const std::string& json_text);

}  // namespace repsim

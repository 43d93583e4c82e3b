#include "repsim/transforms.hpp"

#include "repsim/error.hpp"
#include "repsim/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace repsim {

Clip::Clip(int t, int c, int h, int w, double fps)
    : frames(t), channels(c), height(h), width(w), frame_rate(fps),
      values(static_cast<std::size_t>(t) * c * h * w, 0.0) {}

void Clip::check() const {
    if (frames < 2) raise(ErrorKind::argument, "clip needs at least 2 frames");
    if (channels < 1 || height < 1 || width < 1) {
        raise(ErrorKind::argument, "clip axes must be positive");
    }
    if (values.size() != static_cast<std::size_t>(frames) * channels * height * width) {
        raise(ErrorKind::shape, "clip buffer does not match its axes");
    }
    if (!(frame_rate > 0.0)) raise(ErrorKind::argument, "frame rate must be positive");
}

void TransformSpec::check() const {
    if (flip_prob < 0.0 || flip_prob > 1.0) {
        raise(ErrorKind::argument, "flip_prob must lie in [0,1]");
    }
    if (illum_amplitude < 0.0) raise(ErrorKind::argument, "illum_amplitude must be >= 0");
    if (blur_sigma < 0.0) raise(ErrorKind::argument, "blur_sigma must be >= 0");
    if (!(speed_base > 0.0)) raise(ErrorKind::argument, "speed_base must be > 0");
    if (speed_mod_amplitude < 0.0) {
        raise(ErrorKind::argument, "speed_mod_amplitude must be >= 0");
    }
    if (!(speed_base - speed_mod_amplitude > 0.0)) {
        raise(ErrorKind::argument, "speed must stay positive (base - amplitude <= 0)");
    }
    if (speed_mod_freq < 0.0) raise(ErrorKind::argument, "speed_mod_freq must be >= 0");
}

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Mirrored index with edge repeat: -1 -> 0, n -> n-1.
int reflect(int idx, int n) {
    while (idx < 0 || idx >= n) {
        if (idx < 0) idx = -idx - 1;
        if (idx >= n) idx = 2 * n - idx - 1;
    }
    return idx;
}

}  // namespace

Clip spatial_flip(const Clip& clip, bool apply) {
    clip.check();
    if (!apply) return clip;
    Clip out = clip;
    for (int t = 0; t < clip.frames; ++t) {
        for (int c = 0; c < clip.channels; ++c) {
            for (int y = 0; y < clip.height; ++y) {
                for (int x = 0; x < clip.width; ++x) {
                    out.at(t, c, y, x) = clip.at(t, c, y, clip.width - 1 - x);
                }
            }
        }
    }
    return out;
}

Clip illumination_noise(const Clip& clip, double amplitude, std::uint64_t seed) {
    clip.check();
    if (amplitude < 0.0) raise(ErrorKind::argument, "illumination amplitude must be >= 0");
    if (amplitude == 0.0) return clip;
    Rng rng(seed);
    const double offset = rng.uniform(-amplitude, amplitude);
    Clip out = clip;
    for (double& v : out.values) v = clamp01(v + offset);
    return out;
}

Clip gaussian_blur(const Clip& clip, double sigma) {
    clip.check();
    if (sigma < 0.0) raise(ErrorKind::argument, "blur sigma must be >= 0");
    if (sigma == 0.0) return clip;

    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double v = std::exp(-static_cast<double>(k) * k / (2.0 * sigma * sigma));
        kernel[static_cast<std::size_t>(k + radius)] = v;
        sum += v;
    }
    for (double& v : kernel) v /= sum;

    Clip horizontal = clip;
    for (int t = 0; t < clip.frames; ++t) {
        for (int c = 0; c < clip.channels; ++c) {
            for (int y = 0; y < clip.height; ++y) {
                for (int x = 0; x < clip.width; ++x) {
                    double acc = 0.0;
                    for (int k = -radius; k <= radius; ++k) {
                        acc += kernel[static_cast<std::size_t>(k + radius)] *
                               clip.at(t, c, y, reflect(x + k, clip.width));
                    }
                    horizontal.at(t, c, y, x) = acc;
                }
            }
        }
    }
    Clip out = horizontal;
    for (int t = 0; t < clip.frames; ++t) {
        for (int c = 0; c < clip.channels; ++c) {
            for (int y = 0; y < clip.height; ++y) {
                for (int x = 0; x < clip.width; ++x) {
                    double acc = 0.0;
                    for (int k = -radius; k <= radius; ++k) {
                        acc += kernel[static_cast<std::size_t>(k + radius)] *
                               horizontal.at(t, c, reflect(y + k, clip.height), x);
                    }
                    out.at(t, c, y, x) = clamp01(acc);
                }
            }
        }
    }
    return out;
}

std::vector<double> resample_positions(const TransformSpec& spec, int frame_count,
                                       double frame_rate) {
    spec.check();
    if (frame_count < 1) raise(ErrorKind::argument, "frame count must be positive");
    std::vector<double> positions(static_cast<std::size_t>(frame_count));
    const double base = spec.speed_base;
    const double amp = spec.speed_mod_amplitude;
    const double freq = spec.speed_mod_freq;
    for (int t = 0; t < frame_count; ++t) {
        // s(t) = integral of base + amp sin(2 pi f u / fps), closed form.
        double s = base * t;
        if (amp > 0.0 && freq > 0.0) {
            const double omega = 2.0 * std::numbers::pi * freq / frame_rate;
            s += amp / omega * (1.0 - std::cos(omega * t));
        }
        positions[static_cast<std::size_t>(t)] = s;
    }
    return positions;
}

Clip temporal_resample(const Clip& clip, const TransformSpec& spec) {
    clip.check();
    const std::vector<double> positions =
        resample_positions(spec, clip.frames, clip.frame_rate);
    Clip out = clip;
    const std::size_t frame_size =
        static_cast<std::size_t>(clip.channels) * clip.height * clip.width;
    for (int t = 0; t < clip.frames; ++t) {
        const double s = std::clamp(positions[static_cast<std::size_t>(t)], 0.0,
                                    static_cast<double>(clip.frames - 1));
        const int lo = static_cast<int>(std::floor(s));
        const int hi = std::min(lo + 1, clip.frames - 1);
        const double w = s - lo;
        const double* a = clip.values.data() + static_cast<std::size_t>(lo) * frame_size;
        const double* b = clip.values.data() + static_cast<std::size_t>(hi) * frame_size;
        double* dst = out.values.data() + static_cast<std::size_t>(t) * frame_size;
        for (std::size_t i = 0; i < frame_size; ++i) {
            dst[i] = clamp01((1.0 - w) * a[i] + w * b[i]);
        }
    }
    return out;
}

std::string serialize_transform_spec(const TransformSpec& spec) {
    const nlohmann::json doc = {{"set", std::string(to_string(spec.set))},
                                {"seed", spec.seed},
                                {"flip_prob", spec.flip_prob},
                                {"illum_amplitude", spec.illum_amplitude},
                                {"blur_sigma", spec.blur_sigma},
                                {"speed_base", spec.speed_base},
                                {"speed_mod_amplitude", spec.speed_mod_amplitude},
                                {"speed_mod_freq", spec.speed_mod_freq}};
    return doc.dump();
}

TransformSpec parse_transform_spec(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        raise(ErrorKind::format, std::string("transform_spec: ") + e.what());
    }
    TransformSpec spec;
    try {
        spec.set = transform_from_string(doc.at("set").get<std::string>());
        spec.seed = doc.at("seed").get<std::uint64_t>();
        spec.flip_prob = doc.at("flip_prob").get<double>();
        spec.illum_amplitude = doc.at("illum_amplitude").get<double>();
        spec.blur_sigma = doc.at("blur_sigma").get<double>();
        spec.speed_base = doc.at("speed_base").get<double>();
        spec.speed_mod_amplitude = doc.at("speed_mod_amplitude").get<double>();
        spec.speed_mod_freq = doc.at("speed_mod_freq").get<double>();
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::format, std::string("transform_spec: ") + e.what());
    }
    spec.check();
    return spec;
}

Clip apply_set(const Clip& clip, const TransformSpec& spec) {
    clip.check();
    spec.check();
    switch (spec.set) {
        case TransformTag::none:
            return clip;
        case TransformTag::spatial: {
            Rng rng(spec.seed);
            const bool flip = rng.bernoulli(spec.flip_prob);
            Clip out = spatial_flip(clip, flip);
            out = illumination_noise(out, spec.illum_amplitude, Rng::mix(spec.seed, 1));
            return gaussian_blur(out, spec.blur_sigma);
        }
        case TransformTag::temporal:
            return temporal_resample(clip, spec);
        case TransformTag::all: {
            TransformSpec spatial = spec;
            spatial.set = TransformTag::spatial;
            TransformSpec temporal = spec;
            temporal.set = TransformTag::temporal;
            return apply_set(apply_set(clip, spatial), temporal);
        }
    }
    raise(ErrorKind::argument, "unknown transform set");
}

}  // namespace repsim

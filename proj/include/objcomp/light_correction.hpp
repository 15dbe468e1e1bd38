#pragma once

// Background-light correction.
//
// An environment is split per texel into intensity i = max(R, G, B) and chroma
// = RGB / i. Its global colour c_e is the intensity-weighted mean chroma and
// its global intensity i_e the mean of i. The object's mean colour c_a pulls
// the chroma toward the object (lambda1) and a uniform white ambient level i_d
// lifts the intensity (lambda2):
//
//   c_ec = lambda1 * c_e + (1 - lambda1) * c_a
//   i_ec = lambda2 * i_e + (1 - lambda2) * i_d
//
// Per texel the corrected intensity is i' = a * i + b with the floor
// b = (1 - lambda2) * i_d and a = (i_ec - b) / i_e, so mean(i') = i_ec,
// min(i') >= b and the brightest direction stays the brightest.

#include "objcomp/environment.hpp"
#include "objcomp/errors.hpp"
#include "objcomp/image.hpp"
#include "objcomp/math.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace objcomp {

struct LightComponents {
    int width = 0;
    int height = 0;
    std::vector<double> intensity; // per texel, >= 0
    std::vector<Rgb> chroma;       // per texel, max channel 1
    Rgb color = Rgb::Ones();       // c_e
    double mean_intensity = 0.0;   // i_e
    bool degenerate = false;       // all-black input; color defaulted to white
};

struct LightCorrectionParams {
    double lambda1 = 0.5;
    double lambda2 = 0.5;
    double ambient_intensity = 0.5; // i_d

    void validate() const {
        if (!(lambda1 >= 0.0 && lambda1 <= 1.0)) {
            throw std::invalid_argument("lambda1 must lie in [0,1]");
        }
        if (!(lambda2 >= 0.0 && lambda2 <= 1.0)) {
            throw std::invalid_argument("lambda2 must lie in [0,1]");
        }
        if (!(ambient_intensity > 0.0) || !std::isfinite(ambient_intensity)) {
            throw std::invalid_argument("ambient intensity must be positive");
        }
    }
};

inline LightComponents decompose_environment(const EnvironmentLight& env) {
    env.validate();
    LightComponents lc;
    lc.width = env.width();
    lc.height = env.height();
    lc.intensity.resize(env.texel_count());
    lc.chroma.resize(env.texel_count());
    Rgb weighted = Rgb::Zero();
    double total = 0.0;
    for (std::size_t t = 0; t < env.texel_count(); ++t) {
        const Rgb& c = env.texel(t);
        const double i = c.maxCoeff();
        lc.intensity[t] = i;
        lc.chroma[t] = i > 0.0 ? Rgb(c / i) : Rgb::Ones();
        weighted += c;
        total += i;
    }
    lc.mean_intensity = total / static_cast<double>(env.texel_count());
    if (total > 0.0) {
        lc.color = weighted / total;
    } else {
        lc.color = Rgb::Ones();
        lc.degenerate = true;
    }
    return lc;
}

inline EnvironmentLight recompose(const LightComponents& lc) {
    EnvironmentLight env(lc.width, lc.height);
    for (std::size_t t = 0; t < env.texel_count(); ++t) {
        env.texel(t) = lc.intensity[t] * lc.chroma[t];
    }
    return env;
}

/// c_a: mean linear colour of the masked object pixels.
inline Rgb mask_average_color(const ImageBuffer& object_image, const ObjectMask& mask) {
    if (!mask.matches(object_image)) {
        throw std::invalid_argument("mask_average_color: mask and image dimensions differ");
    }
    const std::size_t count = mask.count();
    if (count == 0) {
        throw DataError("mask_average_color: the object mask is empty (|M| = 0); the average colour is undefined");
    }
    Rgb sum = Rgb::Zero();
    for (std::size_t p = 0; p < mask.size(); ++p) {
        if (mask[p]) {
            sum += object_image.rgb(p);
        }
    }
    return sum / static_cast<double>(count);
}

inline Rgb correct_color(const Rgb& estimated, const Rgb& object_average, double lambda1) {
    require(lambda1 >= 0.0 && lambda1 <= 1.0, "correct_color: lambda1 must lie in [0,1]");
    return lambda1 * estimated + (1.0 - lambda1) * object_average;
}

inline double enhance_intensity(double estimated, double ambient, double lambda2) {
    require(lambda2 >= 0.0 && lambda2 <= 1.0, "enhance_intensity: lambda2 must lie in [0,1]");
    require(ambient > 0.0, "enhance_intensity: ambient intensity must be positive");
    return lambda2 * estimated + (1.0 - lambda2) * ambient;
}

/// Divides by the largest channel; black maps to white.
inline Rgb normalize_chroma(const Rgb& c) {
    const double m = c.maxCoeff();
    return m > 0.0 ? Rgb(c / m) : Rgb::Ones();
}

/// Uniform white environment of radiance i_d.
inline EnvironmentLight make_uniform_ambient(double ambient_intensity, int height = 32) {
    require(ambient_intensity > 0.0, "make_uniform_ambient: intensity must be positive");
    return EnvironmentLight(2 * height, height, Rgb::Constant(ambient_intensity));
}

struct CorrectionReport {
    Rgb object_color = Rgb::Zero();    // c_a
    Rgb estimated_color = Rgb::Ones(); // c_e
    double estimated_intensity = 0.0;  // i_e
    Rgb corrected_color = Rgb::Ones(); // c_ec
    double corrected_intensity = 0.0;  // i_ec
    bool ambient_only = false;         // i_e was zero
};

struct CorrectedLight {
    EnvironmentLight environment; // L_ec
    CorrectionReport report;
};

inline CorrectedLight recompose_corrected(const EnvironmentLight& env, const Rgb& object_color,
                                          const LightCorrectionParams& params) {
    params.validate();
    const LightComponents lc = decompose_environment(env);
    const double l1 = params.lambda1;
    const double i_e = lc.mean_intensity;
    const double i_ec = enhance_intensity(i_e, params.ambient_intensity, params.lambda2);
    const double floor = (1.0 - params.lambda2) * params.ambient_intensity;
    const Rgb target = normalize_chroma(object_color);

    CorrectedLight out{EnvironmentLight(env.width(), env.height()), {}};
    out.report.object_color = object_color;
    out.report.estimated_color = lc.color;
    out.report.estimated_intensity = i_e;
    out.report.corrected_color = correct_color(lc.color, object_color, l1);
    out.report.corrected_intensity = i_ec;
    out.report.ambient_only = !(i_e > 0.0);

    const double gain = i_e > 0.0 ? (i_ec - floor) / i_e : 0.0;
    for (std::size_t t = 0; t < env.texel_count(); ++t) {
        const double i = lc.intensity[t];
        // Blend in radiance units so the identity endpoints reproduce the input bit for bit.
        const Rgb blend = i > 0.0 ? Rgb(l1 * env.texel(t) + ((1.0 - l1) * i) * target)
                                  : Rgb(l1 * Rgb::Ones() + (1.0 - l1) * target);
        const double m = blend.maxCoeff();
        const double corrected = i_e > 0.0 ? gain * i + floor : i_ec;
        out.environment.texel(t) = corrected == m ? blend : Rgb((blend / m) * corrected);
    }
    return out;
}

} // namespace objcomp

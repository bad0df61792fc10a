#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "camsearch/kinematics.hpp"

namespace camsearch {

/// Counter-based seed derivation: mixes a base seed with a stream tag and a
/// counter so that every (node, shot) or (repetition, frame) draw is
/// reproducible independently of evaluation order.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t counter = 0);

struct NoiseWell {
    Vec3 center = Vec3::Zero();
    double depth = 0;
    double width = 0;
};

/// Synthetic single-image noise level as a function of camera position.
struct NoiseField {
    double sigmaBase = 0.1;
    std::vector<NoiseWell> wells;
    double sigmaFloor = 1e-3;

    void validate() const;
};

double field_sigma(const NoiseField& field, const Vec3& p);

/// Grey-level image; pixel (x, y) is intensities(y, x).
struct ImageFrame {
    Eigen::ArrayXXd intensities;

    ImageFrame() = default;
    explicit ImageFrame(Eigen::ArrayXXd values) : intensities(std::move(values)) {}
    static ImageFrame filled(int width, int height, double value);

    int width() const { return static_cast<int>(intensities.cols()); }
    int height() const { return static_cast<int>(intensities.rows()); }
};

struct NoiseTarget {
    double sigmaReduced = 0.01;

    void validate() const;
};

/// Smooth gradient plus sharp-edged rectangles, intensities in [0.25, 0.75].
ImageFrame make_scene(int width, int height, std::uint64_t seed, int rectangles = 150);

/// Adds zero-mean Gaussian noise of the given standard deviation and clamps.
ImageFrame add_noise(const ImageFrame& truth, double sigma, std::uint64_t seed);

ImageFrame synth_image(const NoiseField& field, const Vec3& p, const ImageFrame& groundTruth, std::uint64_t seed);

/// Robust noise-level estimate from the second-difference kernel response.
double estimate_sigma(const ImageFrame& frame);

ImageFrame average_images(const std::vector<ImageFrame>& frames);

int picture_count(double sigmaA, const NoiseTarget& target);

ImageFrame gaussian_filter(const ImageFrame& frame, int kernelSize, double kernelSigma);

/// Radially binned power spectrum; bin k collects frequencies with radius
/// rounding to k (in cycles per frame) up to the Nyquist radius. Bin 0 is DC.
struct RadialSpectrum {
    std::vector<double> frequency;  ///< cycles per pixel
    std::vector<double> meanPower;
};

RadialSpectrum radial_power_spectrum(const ImageFrame& frame);

void write_spectrum_csv(std::ostream& out, const RadialSpectrum& spectrum);

/// Sample standard deviation of (a - b) over all pixels.
double residual_std(const ImageFrame& a, const ImageFrame& b);

}  // namespace camsearch

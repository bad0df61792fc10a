#include "camsearch/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <ostream>
#include <string>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <fftw3.h>

#include "camsearch/errors.hpp"

namespace camsearch {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Reflect an out-of-range index back into [0, n) without repeating the edge.
int mirrorIndex(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

std::vector<double> gaussianKernel(int size, double sigma) {
    std::vector<double> k(static_cast<std::size_t>(size));
    const int r = size / 2;
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        const double w = std::exp(-0.5 * i * i / (sigma * sigma));
        k[static_cast<std::size_t>(i + r)] = w;
        sum += w;
    }
    for (double& w : k) w /= sum;
    return k;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t counter) {
    std::uint64_t x = splitmix64(base);
    x = splitmix64(x ^ (stream * 0xd1b54a32d192ed03ULL));
    return splitmix64(x ^ counter);
}

void NoiseField::validate() const {
    if (!(sigmaFloor > 0)) throw DomainError("sigmaFloor must be positive");
    if (!(sigmaBase >= sigmaFloor)) throw DomainError("sigmaBase must not be below sigmaFloor");
    double depthSum = 0.0;
    for (const NoiseWell& w : wells) {
        if (!(w.depth > 0 && w.width > 0)) throw DomainError("noise wells need positive depth and width");
        depthSum += w.depth;
    }
    if (!(depthSum < sigmaBase - sigmaFloor)) throw DomainError("sum of well depths must stay below sigmaBase - sigmaFloor");
}

double field_sigma(const NoiseField& field, const Vec3& p) {
    double sigma = field.sigmaBase;
    for (const NoiseWell& w : field.wells) {
        sigma -= w.depth * std::exp(-(p - w.center).squaredNorm() / (2.0 * w.width * w.width));
    }
    return std::max(field.sigmaFloor, sigma);
}

ImageFrame ImageFrame::filled(int width, int height, double value) {
    return ImageFrame(Eigen::ArrayXXd::Constant(height, width, value));
}

void NoiseTarget::validate() const {
    if (!(sigmaReduced > 0)) throw DomainError("sigmaReduced must be positive");
}

ImageFrame make_scene(int width, int height, std::uint64_t seed, int rectangles) {
    if (width < 1 || height < 1) throw FrameTooSmall("scene dimensions must be positive");
    Eigen::ArrayXXd img(height, width);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            img(y, x) = 0.4 + 0.1 * x / std::max(1, width - 1) + 0.05 * y / std::max(1, height - 1);
        }
    }
    boost::random::mt19937_64 rng(derive_seed(seed, 0x5ce9e));
    boost::random::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int r = 0; r < rectangles; ++r) {
        // Log-uniform sizes from 2 px to 30% of the side put edge energy in
        // every frequency band.
        const int w = std::clamp(static_cast<int>(2.0 * std::pow(0.15 * width, unit(rng))), 1, width);
        const int h = std::clamp(static_cast<int>(2.0 * std::pow(0.15 * height, unit(rng))), 1, height);
        const int x0 = static_cast<int>((width - w) * unit(rng));
        const int y0 = static_cast<int>((height - h) * unit(rng));
        const double offset = 0.24 * unit(rng) - 0.12;
        img.block(y0, x0, h, w) += offset;
    }
    return ImageFrame(img.max(0.25).min(0.75));
}

ImageFrame add_noise(const ImageFrame& truth, double sigma, std::uint64_t seed) {
    if (!(sigma > 0)) return truth;
    boost::random::mt19937_64 rng(seed);
    boost::random::normal_distribution<double> normal(0.0, sigma);
    ImageFrame out = truth;
    double* px = out.intensities.data();
    const Eigen::Index n = out.intensities.size();
    for (Eigen::Index i = 0; i < n; ++i) px[i] = std::clamp(px[i] + normal(rng), 0.0, 1.0);
    return out;
}

ImageFrame synth_image(const NoiseField& field, const Vec3& p, const ImageFrame& groundTruth, std::uint64_t seed) {
    return add_noise(groundTruth, field_sigma(field, p), seed);
}

double estimate_sigma(const ImageFrame& frame) {
    const int w = frame.width(), h = frame.height();
    if (w < 3 || h < 3) throw FrameTooSmall("noise estimation needs at least a 3x3 frame");
    const Eigen::ArrayXXd& v = frame.intensities;
    std::vector<double> response;
    response.reserve(static_cast<std::size_t>((w - 2) * (h - 2)));
    for (int x = 1; x < w - 1; ++x) {
        for (int y = 1; y < h - 1; ++y) {
            const double r = v(y - 1, x - 1) - 2 * v(y - 1, x) + v(y - 1, x + 1) - 2 * v(y, x - 1) + 4 * v(y, x) -
                             2 * v(y, x + 1) + v(y + 1, x - 1) - 2 * v(y + 1, x) + v(y + 1, x + 1);
            response.push_back(std::abs(r));
        }
    }
    auto mid = response.begin() + static_cast<std::ptrdiff_t>(response.size() / 2);
    std::nth_element(response.begin(), mid, response.end());
    // The kernel's L2 norm is 6; 0.6745 converts a normal MAD to its std.
    return *mid / (0.6745 * 6.0);
}

ImageFrame average_images(const std::vector<ImageFrame>& frames) {
    if (frames.empty()) throw EmptyList("cannot average an empty frame list");
    Eigen::ArrayXXd sum = Eigen::ArrayXXd::Zero(frames.front().height(), frames.front().width());
    for (const ImageFrame& f : frames) {
        if (f.width() != frames.front().width() || f.height() != frames.front().height()) {
            throw DimensionMismatch("all averaged frames must share dimensions");
        }
        sum += f.intensities;
    }
    return ImageFrame(sum / static_cast<double>(frames.size()));
}

int picture_count(double sigmaA, const NoiseTarget& target) {
    const double ratio = sigmaA / target.sigmaReduced;
    const double n = ratio * ratio;
    // Guard against round-off lifting an exact square over an integer.
    return std::max(1, static_cast<int>(std::ceil(n * (1.0 - 1e-12))));
}

ImageFrame gaussian_filter(const ImageFrame& frame, int kernelSize, double kernelSigma) {
    if (kernelSize < 3 || kernelSize % 2 == 0) throw BadKernel("kernel size must be odd and at least 3");
    if (!(kernelSigma > 0)) throw BadKernel("kernel sigma must be positive");
    const std::vector<double> k = gaussianKernel(kernelSize, kernelSigma);
    const int r = kernelSize / 2;
    const int w = frame.width(), h = frame.height();
    const Eigen::ArrayXXd& in = frame.intensities;
    Eigen::ArrayXXd rows(h, w), out(h, w);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * in(y, mirrorIndex(x + i, w));
            rows(y, x) = acc;
        }
    }
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * rows(mirrorIndex(y + i, h), x);
            out(y, x) = acc;
        }
    }
    return ImageFrame(out);
}

RadialSpectrum radial_power_spectrum(const ImageFrame& frame) {
    int n = 1;
    while (n < std::max(frame.width(), frame.height())) n *= 2;
    // Zero-pad to a square power-of-two side.
    std::vector<double> input(static_cast<std::size_t>(n) * n, 0.0);
    for (int y = 0; y < frame.height(); ++y) {
        for (int x = 0; x < frame.width(); ++x) input[static_cast<std::size_t>(y) * n + x] = frame.intensities(y, x);
    }
    const int half = n / 2 + 1;
    std::vector<std::complex<double>> output(static_cast<std::size_t>(n) * half);
    fftw_plan plan = fftw_plan_dft_r2c_2d(n, n, input.data(), reinterpret_cast<fftw_complex*>(output.data()),
                                          FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    const int bins = n / 2 + 1;
    std::vector<double> sum(static_cast<std::size_t>(bins), 0.0), weight(static_cast<std::size_t>(bins), 0.0);
    const double norm = 1.0 / (static_cast<double>(n) * n);
    for (int ky = 0; ky < n; ++ky) {
        const int fy = ky <= n / 2 ? ky : ky - n;
        for (int kx = 0; kx < half; ++kx) {
            const long bin = std::lround(std::hypot(static_cast<double>(kx), static_cast<double>(fy)));
            if (bin >= bins) continue;
            // Interior columns stand for themselves and their conjugate twin.
            const double wgt = (kx == 0 || kx == n / 2) ? 1.0 : 2.0;
            sum[static_cast<std::size_t>(bin)] += wgt * std::norm(output[static_cast<std::size_t>(ky) * half + kx]) * norm;
            weight[static_cast<std::size_t>(bin)] += wgt;
        }
    }
    RadialSpectrum s;
    for (int b = 0; b < bins; ++b) {
        s.frequency.push_back(static_cast<double>(b) / n);
        s.meanPower.push_back(weight[static_cast<std::size_t>(b)] > 0 ? sum[static_cast<std::size_t>(b)] / weight[static_cast<std::size_t>(b)] : 0.0);
    }
    return s;
}

void write_spectrum_csv(std::ostream& out, const RadialSpectrum& spectrum) {
    out << "bin_index,frequency,mean_power\n" << std::setprecision(9);
    for (std::size_t b = 0; b < spectrum.frequency.size(); ++b) {
        out << b << ',' << spectrum.frequency[b] << ',' << spectrum.meanPower[b] << '\n';
    }
}

double residual_std(const ImageFrame& a, const ImageFrame& b) {
    if (a.width() != b.width() || a.height() != b.height()) throw DimensionMismatch("residual needs equal frames");
    const Eigen::ArrayXXd d = a.intensities - b.intensities;
    const double mean = d.mean();
    const double n = static_cast<double>(d.size());
    return std::sqrt((d - mean).square().sum() / std::max(1.0, n - 1.0));
}

}  // namespace camsearch

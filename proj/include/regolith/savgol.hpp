#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace regolith {

struct SgOutput {
    double value = 0.0;
    /// First derivative per unit sample spacing; scale by 1/dx for real units.
    double derivative = 0.0;
};

/// Savitzky-Golay smoother: least-squares polynomial fit over a sliding
/// window, realized as fixed convolution weights for the window-center value
/// and first derivative. Reproduces polynomials up to the configured order
/// exactly.
class SgFilter {
public:
    SgFilter(int window, int order) : window_(window), order_(order) {
        if (window < 1 || window % 2 == 0) throw std::invalid_argument("SG window must be odd");
        if (order < 0 || order >= window) throw std::invalid_argument("SG order must be < window");
        const int half = window / 2;
        Eigen::MatrixXd a(window, order + 1);
        for (int i = 0; i < window; ++i) {
            double p = 1.0;
            for (int j = 0; j <= order; ++j) {
                a(i, j) = p;
                p *= static_cast<double>(i - half);
            }
        }
        // Rows 0 and 1 of (A^T A)^-1 A^T give the center value and slope.
        const Eigen::MatrixXd pinv = (a.transpose() * a).ldlt().solve(a.transpose());
        value_weights_.resize(window);
        derivative_weights_.assign(window, 0.0);
        for (int i = 0; i < window; ++i) {
            value_weights_[i] = pinv(0, i);
            if (order >= 1) derivative_weights_[i] = pinv(1, i);
        }
    }

    int window() const { return window_; }
    int order() const { return order_; }
    const std::vector<double>& value_weights() const { return value_weights_; }
    const std::vector<double>& derivative_weights() const { return derivative_weights_; }

    /// Convolve the most recent `window` samples; nullopt until enough data.
    std::optional<SgOutput> smooth(std::span<const double> samples) const {
        if (samples.size() < static_cast<std::size_t>(window_)) return std::nullopt;
        const std::size_t base = samples.size() - static_cast<std::size_t>(window_);
        SgOutput out;
        for (int i = 0; i < window_; ++i) {
            const double s = samples[base + static_cast<std::size_t>(i)];
            out.value += value_weights_[static_cast<std::size_t>(i)] * s;
            out.derivative += derivative_weights_[static_cast<std::size_t>(i)] * s;
        }
        return out;
    }

private:
    int window_;
    int order_;
    std::vector<double> value_weights_;
    std::vector<double> derivative_weights_;
};

inline std::optional<SgOutput> sg_smooth(const SgFilter& filter, std::span<const double> samples) {
    return filter.smooth(samples);
}

}  // namespace regolith

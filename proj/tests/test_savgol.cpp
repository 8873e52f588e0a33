#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <vector>

#include "regolith/rng.hpp"
#include "regolith/savgol.hpp"

using namespace regolith;

namespace {

// Independent oracle: fit a least-squares polynomial of the given order to the
// last `window` samples (abscissa centered on the window midpoint) and return
// its value and first derivative at the window center, i.e. the constant and
// linear coefficients.
SgOutput polyfit_oracle(const std::vector<double>& samples, int window, int order) {
    const int n = static_cast<int>(samples.size());
    const double half = (window - 1) / 2.0;
    Eigen::MatrixXd a(window, order + 1);
    Eigen::VectorXd y(window);
    for (int i = 0; i < window; ++i) {
        const double x = i - half;
        double p = 1.0;
        for (int j = 0; j <= order; ++j) {
            a(i, j) = p;
            p *= x;
        }
        y(i) = samples[n - window + i];
    }
    const Eigen::VectorXd coeff = a.colPivHouseholderQr().solve(y);
    return {coeff(0), order >= 1 ? coeff(1) : 0.0};
}

}  // namespace

TEST_CASE("filter construction validates its arguments", "[savgol]") {
    CHECK_THROWS_AS(SgFilter(4, 2), std::invalid_argument);   // even window
    CHECK_THROWS_AS(SgFilter(-5, 2), std::invalid_argument);  // negative
    CHECK_THROWS_AS(SgFilter(5, 5), std::invalid_argument);   // order >= window
    CHECK_NOTHROW(SgFilter(5, 2));
}

TEST_CASE("constant signal smooths to itself with zero slope", "[savgol]") {
    SgFilter filter(9, 2);
    std::vector<double> samples(12, 4.25);
    const auto out = filter.smooth(samples);
    REQUIRE(out.has_value());
    CHECK(out->value == Catch::Approx(4.25));
    CHECK(out->derivative == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("quadratic signal is reproduced exactly", "[savgol]") {
    SgFilter filter(7, 2);
    std::vector<double> samples;
    for (int t = 0; t <= 9; ++t)
        samples.push_back(0.5 * t * t - 2.0 * t + 1.0);
    const auto out = filter.smooth(samples);
    REQUIRE(out.has_value());
    // The last 7 samples cover t = 3..9, so the estimate refers to the window
    // center t = 6: value 0.5*36 - 12 + 1 = 7, derivative t - 2 = 4.
    CHECK(out->value == Catch::Approx(7.0));
    CHECK(out->derivative == Catch::Approx(4.0));
}

TEST_CASE("window-5 order-2 value weights match the classic table", "[savgol]") {
    SgFilter filter(5, 2);
    const auto& w = filter.value_weights();
    REQUIRE(w.size() == 5);
    const double expect[5] = {-3.0 / 35, 12.0 / 35, 17.0 / 35, 12.0 / 35, -3.0 / 35};
    for (int i = 0; i < 5; ++i)
        CHECK(w[i] == Catch::Approx(expect[i]).margin(1e-12));
}

TEST_CASE("matches an independent least-squares fit on noisy data", "[savgol]") {
    SeededStream rng(404, "sg-oracle");
    for (const auto& [window, order] : {std::pair{9, 2}, {7, 3}, {11, 4}, {5, 1}}) {
        SgFilter filter(window, order);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> samples;
            const int count = window + rng.uniform_int(0, 6);
            for (int i = 0; i < count; ++i)
                samples.push_back(rng.normal(0.0, 2.0));
            const auto out = filter.smooth(samples);
            REQUIRE(out.has_value());
            const SgOutput expect = polyfit_oracle(samples, window, order);
            CHECK(out->value == Catch::Approx(expect.value).margin(1e-9));
            CHECK(out->derivative == Catch::Approx(expect.derivative).margin(1e-9));
        }
    }
}

TEST_CASE("polynomials up to the fit order pass through unchanged", "[savgol]") {
    SeededStream rng(405, "sg-poly");
    for (int order = 1; order <= 4; ++order) {
        SgFilter filter(9, order);
        for (int trial = 0; trial < 30; ++trial) {
            std::vector<double> coeff;
            for (int j = 0; j <= order; ++j)
                coeff.push_back(rng.uniform(-2.0, 2.0));
            std::vector<double> samples;
            for (int t = 0; t < 11; ++t) {
                double v = 0.0, p = 1.0;
                for (double c : coeff) {
                    v += c * p;
                    p *= t;
                }
                samples.push_back(v);
            }
            const auto out = filter.smooth(samples);
            REQUIRE(out.has_value());
            const int t_center = 6;  // last 9 of 11 samples -> t = 2..10, center 6
            double value = 0.0, deriv = 0.0, p = 1.0;
            for (int j = 0; j <= order; ++j) {
                value += coeff[j] * p;
                if (j + 1 <= order)
                    deriv += coeff[j + 1] * (j + 1) * p;
                p *= t_center;
            }
            CHECK(out->value == Catch::Approx(value).margin(1e-6));
            CHECK(out->derivative == Catch::Approx(deriv).margin(1e-6));
        }
    }
}

TEST_CASE("too few samples yields no output", "[savgol]") {
    SgFilter filter(9, 2);
    std::vector<double> samples(8, 1.0);
    CHECK_FALSE(filter.smooth(samples).has_value());
    samples.push_back(1.0);
    CHECK(filter.smooth(samples).has_value());
}

#pragma once

#include <cmath>
#include <random>

#include "imagtime/flow.hpp"

// Shared helpers for the test suites: deterministic random states and
// long-double reference computations kept independent of the library's
// own evaluation paths.

namespace testutil {

/// Deterministic uniform variates in [-1, 1]; raw mt19937 words so the
/// stream is identical on every platform.
class Rng {
public:
    explicit Rng(unsigned seed) : gen_(seed) {}
    double uniform() {
        return 2.0 * (static_cast<double>(gen_()) / 4294967296.0) - 1.0;
    }

private:
    std::mt19937 gen_;
};

inline imagtime::StateVector random_state(const imagtime::Grid& grid, Rng& rng,
                                          double amplitude = 1.0) {
    Eigen::VectorXd v(grid.size());
    for (int i = 0; i < grid.size(); ++i) v[i] = amplitude * rng.uniform();
    return imagtime::StateVector(grid, std::move(v));
}

inline imagtime::StateVector random_symmetric_state(const imagtime::Grid& grid,
                                                    Rng& rng,
                                                    double amplitude = 1.0) {
    Eigen::VectorXd v(grid.size());
    for (int l = 0; l <= grid.K; ++l) {
        const double val = amplitude * rng.uniform();
        v[grid.K + l] = val;
        v[grid.K - l] = val;
    }
    return imagtime::StateVector(grid, std::move(v));
}

/// Smooth random even field: a seeded mixture of Gaussians of assorted
/// widths. Rough i.i.d. node noise has Rayleigh quotients of order 1/h^2
/// under second-difference operators, so spectral-gap checks need smooth
/// samples to say anything about the bottom of the spectrum.
inline imagtime::StateVector smooth_random_even(const imagtime::Grid& grid, Rng& rng) {
    static constexpr double widths[8] = {0.5, 0.8, 1.3, 2.0, 3.0, 4.5, 6.0, 8.0};
    double a[8];
    for (double& c : a) c = rng.uniform();
    Eigen::VectorXd v(grid.size());
    for (int l = -grid.K; l <= grid.K; ++l) {
        const double x = grid.node(l);
        double s = 0.0;
        for (int m = 0; m < 8; ++m) {
            s += a[m] * std::exp(-x * x / (2.0 * widths[m] * widths[m]));
        }
        v[l + grid.K] = s;
    }
    return imagtime::StateVector(grid, std::move(v));
}

// ---- long-double soliton reference ----

inline long double eta_ld(long double x) {
    const long double e = std::exp(-0.5L * std::abs(x));
    return e / (1.0L + e * e);
}

inline long double eta_prime_ld(long double x) {
    const long double u = 0.5L * x;
    return -0.25L * (1.0L / std::cosh(u)) * std::tanh(u);
}

/// Second derivative from the closed form
/// eta'' = -(1/8) sech(x/2) (sech^2(x/2) - tanh^2(x/2)).
inline long double eta_second_ld(long double x) {
    const long double u = 0.5L * x;
    const long double sech = 1.0L / std::cosh(u);
    const long double tanh_u = std::tanh(u);
    return -0.125L * sech * (sech * sech - tanh_u * tanh_u);
}

/// Composite 8-point Gauss-Legendre quadrature in long double.
template <typename F>
long double integrate_ld(F f, long double a, long double b, int cells) {
    static const long double nodes[8] = {
        -0.96028985649753623L, -0.79666647741362674L, -0.52553240991632899L,
        -0.18343464249564980L, 0.18343464249564980L, 0.52553240991632899L,
        0.79666647741362674L, 0.96028985649753623L};
    static const long double weights[8] = {
        0.10122853629037626L, 0.22238103445337447L, 0.31370664587788729L,
        0.36268378337836198L, 0.36268378337836198L, 0.31370664587788729L,
        0.22238103445337447L, 0.10122853629037626L};
    const long double w = (b - a) / cells;
    long double total = 0.0L;
    for (int c = 0; c < cells; ++c) {
        const long double mid = a + (c + 0.5L) * w;
        const long double half = 0.5L * w;
        for (int q = 0; q < 8; ++q) {
            total += half * weights[q] * f(mid + half * nodes[q]);
        }
    }
    return total;
}

} // namespace testutil

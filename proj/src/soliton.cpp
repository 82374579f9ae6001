#include "imagtime/soliton.hpp"

#include <cmath>

namespace imagtime {

double eta(double x) {
    // (1/2) sech(x/2) = e^{-|x|/2} / (1 + e^{-|x|})
    const double e = std::exp(-0.5 * std::abs(x));
    return e / (1.0 + e * e);
}

double eta_prime(double x) {
    const double e = std::exp(-0.5 * std::abs(x));
    const double sech_half = 2.0 * e / (1.0 + e * e);
    const double tanh_half = std::tanh(0.5 * x);
    return -0.25 * sech_half * tanh_half;
}

double lambda_exact() {
    return 0.125;
}

StateVector sample_soliton(const Grid& grid) {
    Eigen::VectorXd v(grid.size());
    for (int ell = -grid.K; ell <= grid.K; ++ell) {
        v[ell + grid.K] = eta(grid.node(ell));
    }
    return StateVector(grid, std::move(v));
}

PiecewiseLinear::PiecewiseLinear(StateVector psi) : psi_(std::move(psi)) {}

double PiecewiseLinear::value(double x) const {
    const Grid& g = psi_.grid();
    const double t = x / g.h;
    if (t <= -(g.K + 1) || t >= g.K + 1) return 0.0;
    const int j = static_cast<int>(std::floor(t));
    const double a = psi_.at(j);
    const double b = psi_.at(j + 1);
    return a + (b - a) * (t - j);
}

double PiecewiseLinear::derivative(double x) const {
    const Grid& g = psi_.grid();
    const double t = x / g.h;
    if (t <= -(g.K + 1) || t >= g.K + 1) return 0.0;
    const int j = static_cast<int>(std::floor(t));
    return (psi_.at(j + 1) - psi_.at(j)) / g.h;
}

PiecewiseLinear embed(const StateVector& psi) {
    return PiecewiseLinear(psi);
}

QuadratureRule QuadratureRule::gauss(int order, double tail_extent) {
    QuadratureRule rule;
    rule.tail_extent = tail_extent;
    switch (order) {
        case 2:
            rule.nodes = {-0.5773502691896257, 0.5773502691896257};
            rule.weights = {1.0, 1.0};
            break;
        case 4:
            rule.nodes = {-0.8611363115940526, -0.3399810435848563,
                          0.3399810435848563, 0.8611363115940526};
            rule.weights = {0.3478548451374538, 0.6521451548625461,
                            0.6521451548625461, 0.3478548451374538};
            break;
        case 8:
            rule.nodes = {-0.9602898564975363, -0.7966664774136267,
                          -0.5255324099163290, -0.1834346424956498,
                          0.1834346424956498, 0.5255324099163290,
                          0.7966664774136267, 0.9602898564975363};
            rule.weights = {0.1012285362903763, 0.2223810344533745,
                            0.3137066458778873, 0.3626837833783620,
                            0.3626837833783620, 0.3137066458778873,
                            0.2223810344533745, 0.1012285362903763};
            break;
        default:
            throw Error("QuadratureRule::gauss: supported orders are 2, 4, 8");
    }
    return rule;
}

double h1_error_vs_exact(const StateVector& psi, const QuadratureRule& rule) {
    const Grid& g = psi.grid();
    const double h = g.h;
    detail::CompensatedSum total;

    // Cells [jh, (j+1)h] covering the support of the interpolant.
    for (int j = -(g.K + 1); j <= g.K; ++j) {
        const double a = psi.at(j);
        const double slope = (psi.at(j + 1) - a) / h;
        const double x_left = j * h;
        const double mid = x_left + 0.5 * h;
        const double half = 0.5 * h;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double x = mid + half * rule.nodes[q];
            const double lin = a + slope * (x - x_left);
            const double ev = lin - eta(x);
            const double ed = slope - eta_prime(x);
            total.add(half * rule.weights[q] * (ev * ev + ed * ed));
        }
    }

    // Tail: the interpolant vanishes beyond (K+1)h, so the integrand is
    // eta^2 + eta'^2 there; integrate the right half and double.
    const double support_end = (g.K + 1) * h;
    const double x_tail = std::max(support_end, rule.tail_extent);
    if (x_tail > support_end) {
        const int cells = static_cast<int>(std::ceil((x_tail - support_end) / h));
        const double w = (x_tail - support_end) / cells;
        for (int c = 0; c < cells; ++c) {
            const double mid = support_end + (c + 0.5) * w;
            const double half = 0.5 * w;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                const double x = mid + half * rule.nodes[q];
                const double ev = eta(x);
                const double ed = eta_prime(x);
                total.add(2.0 * half * rule.weights[q] * (ev * ev + ed * ed));
            }
        }
    }

    return std::sqrt(total.value());
}

} // namespace imagtime

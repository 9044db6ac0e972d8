#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace strato {

/// Chebyshev-Lobatto collocation on [0,1] with M+1 nodes.
///
/// Functions are held as node values. Indefinite integration from 0 and
/// definite integration over [0,1] are exact for polynomials of degree < M and
/// converge spectrally for analytic integrands, which is what the iterated
/// simplex integrals of smooth basis products are.
class ChebyshevGrid {
public:
    explicit ChebyshevGrid(std::size_t degree) : m_(degree), cos_((degree + 1) * (degree + 1)) {
        for (std::size_t n = 0; n <= m_; ++n) {
            for (std::size_t i = 0; i <= m_; ++i) {
                cos_[n * (m_ + 1) + i] = std::cos(std::numbers::pi * static_cast<double>(n * i % (2 * m_)) / m_);
            }
        }
        nodes_.resize(m_ + 1);
        for (std::size_t i = 0; i <= m_; ++i) nodes_[i] = 0.5 * (1.0 + cos_[m_ + 1 + i]);
        nodes_[0] = 1.0;
        nodes_[m_] = 0.0;
    }

    std::size_t degree() const noexcept { return m_; }
    std::size_t size() const noexcept { return m_ + 1; }

    // Node i sits at y_i = cos(pi i / M), x_i = (1 + y_i) / 2; node 0 is x = 1.
    const std::vector<double>& nodes() const noexcept { return nodes_; }

    std::vector<double> coefficients(std::span<const double> values) const {
        std::vector<double> a(m_ + 1, 0.0);
        for (std::size_t n = 0; n <= m_; ++n) {
            const double* row = &cos_[n * (m_ + 1)];
            double s = 0.5 * (values[0] * row[0] + values[m_] * row[m_]);
            for (std::size_t i = 1; i < m_; ++i) s += values[i] * row[i];
            a[n] = 2.0 * s / static_cast<double>(m_);
        }
        a[0] *= 0.5;
        a[m_] *= 0.5;
        return a;
    }

    std::vector<double> values(std::span<const double> coeffs) const {
        std::vector<double> v(m_ + 1, 0.0);
        for (std::size_t n = 0; n < coeffs.size() && n <= m_; ++n) {
            const double c = coeffs[n];
            if (c == 0.0) continue;
            const double* row = &cos_[n * (m_ + 1)];
            for (std::size_t i = 0; i <= m_; ++i) v[i] += c * row[i];
        }
        return v;
    }

    // Values of F(x) = int_0^x f(s) ds at the nodes.
    std::vector<double> cumulative(std::span<const double> values) const {
        const std::vector<double> a = coefficients(values);
        std::vector<double> b(m_ + 1, 0.0);
        auto coef = [&](std::size_t n) { return n <= m_ ? a[n] : 0.0; };
        if (m_ >= 1) b[1] = a[0] - 0.5 * coef(2);
        for (std::size_t n = 2; n <= m_; ++n) b[n] = (a[n - 1] - coef(n + 1)) / (2.0 * static_cast<double>(n));
        // Fix the constant so that F vanishes at y = -1.
        double at_left = 0.0;
        for (std::size_t n = 1; n <= m_; ++n) at_left += (n % 2 == 0) ? b[n] : -b[n];
        b[0] = -at_left;
        // dx = dy / 2
        for (auto& c : b) c *= 0.5;
        return this->values(b);
    }

    // Clenshaw-Curtis weights w with int_0^1 f dx = sum_i w_i f(x_i).
    std::vector<double> clenshaw_curtis_weights() const {
        std::vector<double> w(m_ + 1, 0.0);
        for (std::size_t i = 0; i <= m_; ++i) {
            const double h = (i == 0 || i == m_) ? 0.5 : 1.0;
            double s = 0.0;
            for (std::size_t n = 0; n <= m_; n += 2) {
                const double c = (n == 0 || n == m_) ? 0.5 : 1.0;
                s += c * (2.0 / (1.0 - static_cast<double>(n * n))) * cos_[n * (m_ + 1) + i];
            }
            w[i] = 0.5 * s * 2.0 * h / static_cast<double>(m_);
        }
        return w;
    }

    // int_0^1 f(x) dx
    double definite(std::span<const double> values) const {
        const std::vector<double> a = coefficients(values);
        double s = 0.0;
        for (std::size_t n = 0; n <= m_; n += 2) s += a[n] * 2.0 / (1.0 - static_cast<double>(n * n));
        return 0.5 * s;
    }

private:
    std::size_t m_;
    std::vector<double> cos_;
    std::vector<double> nodes_;
};

}  // namespace strato

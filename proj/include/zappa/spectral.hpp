#pragma once

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "zappa/error.hpp"

namespace zappa {

/// Fourier transforms and derivatives on a uniform periodic grid of length L.
class PeriodicSpectral {
public:
    PeriodicSpectral(std::size_t n, double L) : n_(n), L_(L) {
        if (n < 2) throw InvalidArgument("periodic grid needs at least 2 points");
        if (!(L > 0.0)) throw InvalidArgument("periodic length must be positive");
    }

    std::size_t size() const noexcept { return n_; }
    double length() const noexcept { return L_; }
    bool is_nyquist(std::size_t k) const noexcept { return n_ % 2 == 0 && k == n_ / 2; }

    /// Signed wavenumber 2*pi*k/L of FFT bin k; the Nyquist bin reports +pi/h.
    double wavenumber(std::size_t k) const noexcept {
        const auto kk = static_cast<double>(k);
        const double signed_k = k <= n_ / 2 ? kk : kk - static_cast<double>(n_);
        return 2.0 * std::numbers::pi * signed_k / L_;
    }

    std::vector<std::complex<double>> forward(std::span<const double> f) const {
        if (f.size() != n_) throw InvalidArgument("spectral transform size mismatch");
        std::vector<double> in(f.begin(), f.end());
        std::vector<std::complex<double>> out;
        fft_.fwd(out, in);
        return out;
    }

    /// Inverse transform; the imaginary part must vanish to 1e-12 relative.
    std::vector<double> inverse_real(const std::vector<std::complex<double>>& spectrum,
                                     double* imag_residue = nullptr) const {
        std::vector<std::complex<double>> in = spectrum;
        std::vector<std::complex<double>> out;
        fft_.inv(out, in);
        std::vector<double> re(n_);
        double max_re = 0.0, max_im = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            re[i] = out[i].real();
            max_re = std::max(max_re, std::abs(out[i].real()));
            max_im = std::max(max_im, std::abs(out[i].imag()));
        }
        if (imag_residue) *imag_residue = max_im;
        if (max_im > 1e-12 * std::max(1.0, max_re))
            throw NumericalFailure("inverse transform left an imaginary residue of " + std::to_string(max_im));
        return re;
    }

    /// d^order f / dx^order; odd derivatives drop the Nyquist mode.
    std::vector<double> derivative(std::span<const double> f, int order) const {
        auto spec = forward(f);
        for (std::size_t k = 0; k < n_; ++k) {
            if (is_nyquist(k) && order % 2 == 1) {
                spec[k] = 0.0;
                continue;
            }
            const std::complex<double> ik(0.0, wavenumber(k));
            spec[k] *= std::pow(ik, order);
        }
        return inverse_real(spec);
    }

private:
    std::size_t n_;
    double L_;
    mutable Eigen::FFT<double> fft_;
};

}  // namespace zappa

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

namespace ftn {

using cd = std::complex<double>;
using Eigen::ArrayXd;
using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {
template <typename T>
inline T conj_if(const T& v)
{
    return v;
}
template <typename T>
inline std::complex<T> conj_if(const std::complex<T>& v)
{
    return std::conj(v);
}
} // namespace detail

/// Hermitian Toeplitz matrix whose first column is taps[0..K] (zero beyond K).
/// Entry (i, j) is taps[i - j] for i >= j and conj(taps[j - i]) otherwise.
template <typename Scalar>
Matrix<Scalar> hermitian_toeplitz(const Vector<Scalar>& taps, Index n)
{
    Matrix<Scalar> m = Matrix<Scalar>::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            const Index lag = i - j;
            if (lag >= 0 && lag < taps.size()) m(i, j) = taps(lag);
            else if (lag < 0 && -lag < taps.size()) m(i, j) = detail::conj_if(taps(-lag));
        }
    }
    return m;
}

/// Hermitian circulant matrix of size n built from one-sided taps[0..K], K < n/2.
template <typename Scalar>
Matrix<Scalar> hermitian_circulant(const Vector<Scalar>& taps, Index n)
{
    Vector<Scalar> col = Vector<Scalar>::Zero(n);
    for (Index k = 0; k < taps.size() && k < n; ++k) {
        col(k) += taps(k);
        if (k > 0) col(n - k) += detail::conj_if(taps(k));
    }
    Matrix<Scalar> m(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) m(i, j) = col((i - j + n) % n);
    return m;
}

/// Full linear convolution.
template <typename A, typename B>
auto convolve(const Vector<A>& a, const Vector<B>& b)
{
    using R = decltype(A{} * B{});
    Vector<R> out = Vector<R>::Zero(a.size() + b.size() - 1);
    for (Index i = 0; i < a.size(); ++i)
        for (Index j = 0; j < b.size(); ++j) out(i + j) += a(i) * b(j);
    return out;
}

/// Forward DFT, X[k] = sum_n x[n] exp(-j 2 pi k n / N).
inline VectorXcd fft(const VectorXcd& x)
{
    Eigen::FFT<double> engine;
    std::vector<cd> in(x.data(), x.data() + x.size());
    std::vector<cd> out;
    engine.fwd(out, in);
    return Eigen::Map<VectorXcd>(out.data(), static_cast<Index>(out.size()));
}

/// Inverse DFT including the 1/N factor.
inline VectorXcd ifft(const VectorXcd& x)
{
    Eigen::FFT<double> engine;
    std::vector<cd> in(x.data(), x.data() + x.size());
    std::vector<cd> out;
    engine.inv(out, in);
    return Eigen::Map<VectorXcd>(out.data(), static_cast<Index>(out.size()));
}

constexpr bool is_power_of_two(long long n) noexcept { return n > 0 && (n & (n - 1)) == 0; }

inline long long next_power_of_two(long long n) noexcept
{
    long long p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace ftn

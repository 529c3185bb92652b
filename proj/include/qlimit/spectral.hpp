#ifndef QLIMIT_SPECTRAL_HPP
#define QLIMIT_SPECTRAL_HPP

// FFT plumbing over tensor grids of N^d points stored axis-0 fastest.

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <vector>

namespace qlimit::spectral {

using cplx = std::complex<double>;
using cvec = Eigen::VectorXcd;

// Angular wavenumbers in FFT order for N samples over a period of the given length.
// With zero_nyquist the unpaired N/2 mode is mapped to 0, which keeps odd
// derivatives of real data real.
inline std::vector<double> wavenumbers(int N, double period, bool zero_nyquist = false) {
    std::vector<double> k(static_cast<std::size_t>(N));
    const double base = 2.0 * M_PI / period;
    for (int j = 0; j < N; ++j) {
        const int m = (j < N / 2) ? j : j - N;
        k[static_cast<std::size_t>(j)] = base * m;
    }
    if (zero_nyquist && N % 2 == 0) k[static_cast<std::size_t>(N / 2)] = 0.0;
    return k;
}

inline long ipow(long base, int e) {
    long r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

// In-place FFT along one axis; the inverse includes the 1/N factor.
inline void fft_axis(cvec& data, int N, int dims, int axis, bool inverse) {
    Eigen::FFT<double> fft;
    const long stride = ipow(N, axis);
    const long total = ipow(N, dims);
    std::vector<cplx> line(static_cast<std::size_t>(N)), out;
    for (long base = 0; base < total; ++base) {
        if ((base / stride) % N != 0) continue;
        for (int j = 0; j < N; ++j) line[static_cast<std::size_t>(j)] = data[base + j * stride];
        if (inverse)
            fft.inv(out, line);
        else
            fft.fwd(out, line);
        for (int j = 0; j < N; ++j) data[base + j * stride] = out[static_cast<std::size_t>(j)];
    }
}

inline void fft_all(cvec& data, int N, int dims, bool inverse) {
    for (int a = 0; a < dims; ++a) fft_axis(data, N, dims, a, inverse);
}

// Multi-index of a flat position.
inline std::vector<int> unflatten(long idx, int N, int dims) {
    std::vector<int> m(static_cast<std::size_t>(dims));
    for (int a = 0; a < dims; ++a) {
        m[static_cast<std::size_t>(a)] = static_cast<int>(idx % N);
        idx /= N;
    }
    return m;
}

// Apply a Fourier multiplier given as a function of the flat mode index.
template <class Symbol>
cvec apply_multiplier(const cvec& f, int N, int dims, Symbol&& symbol) {
    cvec g = f;
    fft_all(g, N, dims, false);
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] *= symbol(static_cast<long>(i));
    fft_all(g, N, dims, true);
    return g;
}

} // namespace qlimit::spectral

#endif

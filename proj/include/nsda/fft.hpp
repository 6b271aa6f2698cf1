/// @file fft.hpp
/// @brief Thin FFTW wrapper: cached 2D complex-to-complex plans, safe for
///        concurrent execution on distinct arrays.

#ifndef NSDA_FFT_HPP
#define NSDA_FFT_HPP

#include <complex>
#include <vector>

namespace nsda::fft {

/// In-place forward DFT (exponent e^{-i 2 pi j a / M}) on an M x M array.
/// Unnormalized, matching FFTW conventions.
void forward(std::complex<double>* data, int M);

/// In-place backward DFT (exponent e^{+i 2 pi j a / M}).  Unnormalized.
void backward(std::complex<double>* data, int M);

inline void forward(std::vector<std::complex<double>>& v, int M) { forward(v.data(), M); }
inline void backward(std::vector<std::complex<double>>& v, int M) { backward(v.data(), M); }

} // namespace nsda::fft

#endif

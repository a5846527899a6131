#ifndef VORWAVE_FFT_HPP
#define VORWAVE_FFT_HPP

#include <complex>
#include <vector>

namespace vorwave {

// Thin wrapper around FFTW complex transforms with a process-wide plan cache.
// Transforms use the convention
//   forward:  c_k = (1/n) sum_m u_m e^{-2*pi*i*k*m/n}   (coefficients from grid)
//   backward: u_m = sum_k c_k e^{+2*pi*i*k*m/n}         (grid from coefficients)
// so that backward(forward(u)) = u. Plan creation is serialized; execution is
// thread-safe on distinct buffers.
namespace fft {

void forward(std::vector<std::complex<double>>& data);
void backward(std::vector<std::complex<double>>& data);

// Multidimensional complex transforms, row-major layout, dims[i] points per axis.
void forward_nd(std::vector<std::complex<double>>& data, const std::vector<int>& dims);
void backward_nd(std::vector<std::complex<double>>& data, const std::vector<int>& dims);

// Smallest 5-smooth integer >= n (fast FFTW sizes).
int next_fast_size(int n);

} // namespace fft
} // namespace vorwave

#endif

#include "nsda/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace nsda::fft {

namespace {

// Plans are created once per (size, direction) with FFTW_UNALIGNED so they can
// execute on any caller buffer.  Plan creation is not thread-safe in FFTW;
// execution via fftw_execute_dft on distinct arrays is.
std::mutex plan_mutex;
std::map<std::pair<int, int>, fftw_plan> plan_cache;

fftw_plan get_plan(int M, int sign) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_pair(M, sign);
    auto it = plan_cache.find(key);
    if (it != plan_cache.end()) return it->second;

    std::vector<std::complex<double>> scratch(static_cast<size_t>(M) * M);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_2d(M, M, p, p, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan) throw std::runtime_error("fftw plan creation failed");
    plan_cache.emplace(key, plan);
    return plan;
}

} // namespace

void forward(std::complex<double>* data, int M) {
    fftw_plan plan = get_plan(M, FFTW_FORWARD);
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, p, p);
}

void backward(std::complex<double>* data, int M) {
    fftw_plan plan = get_plan(M, FFTW_BACKWARD);
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, p, p);
}

} // namespace nsda::fft

#include "vorwave/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace vorwave {
namespace fft {

namespace {

std::mutex planner_mutex;

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

// One in-place plan pair per shape, created on fftw_malloc'ed scratch so that
// any 16-byte aligned buffer can be used with fftw_execute_dft later.
std::map<std::vector<int>, PlanPair>& plan_cache()
{
    static std::map<std::vector<int>, PlanPair> cache;
    return cache;
}

PlanPair get_plans(const std::vector<int>& dims)
{
    std::lock_guard<std::mutex> lock(planner_mutex);
    auto& cache = plan_cache();
    auto it = cache.find(dims);
    if (it != cache.end()) return it->second;

    size_t total = 1;
    for (int d : dims) total *= static_cast<size_t>(d);
    fftw_complex* scratch = fftw_alloc_complex(total);
    // FFTW_UNALIGNED: plans must accept plain std::vector storage in execute_dft
    PlanPair p;
    p.fwd = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), scratch, scratch,
                          FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.bwd = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), scratch, scratch,
                          FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    cache[dims] = p;
    return p;
}

void execute(std::vector<std::complex<double>>& data, const std::vector<int>& dims, bool forward_dir)
{
    size_t total = 1;
    for (int d : dims) total *= static_cast<size_t>(d);
    if (data.size() != total) throw std::invalid_argument("fft: data size does not match dims");

    PlanPair p = get_plans(dims);
    // std::complex<double> is layout-compatible with fftw_complex
    fftw_complex* buf = reinterpret_cast<fftw_complex*>(data.data());
    if (forward_dir) {
        fftw_execute_dft(p.fwd, buf, buf);
        double inv = 1.0 / static_cast<double>(total);
        for (auto& z : data) z *= inv;
    } else {
        fftw_execute_dft(p.bwd, buf, buf);
    }
}

} // namespace

void forward(std::vector<std::complex<double>>& data)
{
    execute(data, {static_cast<int>(data.size())}, true);
}

void backward(std::vector<std::complex<double>>& data)
{
    execute(data, {static_cast<int>(data.size())}, false);
}

void forward_nd(std::vector<std::complex<double>>& data, const std::vector<int>& dims)
{
    execute(data, dims, true);
}

void backward_nd(std::vector<std::complex<double>>& data, const std::vector<int>& dims)
{
    execute(data, dims, false);
}

int next_fast_size(int n)
{
    if (n < 1) return 1;
    for (int m = n;; ++m) {
        int r = m;
        for (int p : {2, 3, 5})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

} // namespace fft
} // namespace vorwave

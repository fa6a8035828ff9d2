#include "vpatch/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <numeric>
#include <utility>

#include "vpatch/errors.hpp"

namespace vpatch::fft {
namespace {

struct PlanCache {
  std::mutex mu;
  std::map<std::pair<std::vector<int>, int>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& kv : plans) fftw_destroy_plan(kv.second);
  }

  fftw_plan get(const std::vector<int>& dims, int sign) {
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(dims, sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    std::size_t n = 1;
    for (int d : dims) n *= static_cast<std::size_t>(d);
    auto* a = fftw_alloc_complex(n);
    auto* b = fftw_alloc_complex(n);
    // FFTW_ESTIMATE keeps plans (and hence rounding) reproducible run to run.
    fftw_plan p = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), a, b, sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(a);
    fftw_free(b);
    if (!p) throw invalid_argument("fft: planner failed");
    plans.emplace(key, p);
    return p;
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

std::size_t total(const std::vector<int>& dims) {
  if (dims.empty()) throw invalid_argument("fft: empty dimension list");
  std::size_t n = 1;
  for (int d : dims) {
    if (d <= 0) throw invalid_argument("fft: non-positive dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

void run(const std::vector<int>& dims, int sign, const cplx* in, cplx* out) {
  std::size_t n = total(dims);
  fftw_plan p = cache().get(dims, sign);
  if (in == out) {
    std::vector<cplx> tmp(in, in + n);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(tmp.data()),
                     reinterpret_cast<fftw_complex*>(out));
  } else {
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }
}

}  // namespace

void forward(const std::vector<int>& dims, const cplx* in, cplx* out) {
  run(dims, FFTW_FORWARD, in, out);
  std::size_t n = total(dims);
  double s = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] *= s;
}

void inverse(const std::vector<int>& dims, const cplx* in, cplx* out) {
  run(dims, FFTW_BACKWARD, in, out);
}

std::vector<cplx> forward(const std::vector<int>& dims, const std::vector<cplx>& in) {
  if (in.size() != total(dims)) throw invalid_argument("fft: size mismatch");
  std::vector<cplx> out(in.size());
  forward(dims, in.data(), out.data());
  return out;
}

std::vector<cplx> inverse(const std::vector<int>& dims, const std::vector<cplx>& in) {
  if (in.size() != total(dims)) throw invalid_argument("fft: size mismatch");
  std::vector<cplx> out(in.size());
  inverse(dims, in.data(), out.data());
  return out;
}

}  // namespace vpatch::fft

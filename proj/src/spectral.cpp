#include "tcur/spectral.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "tcur/error.hpp"

namespace tcur::spectral {
namespace {

struct PlanPair {
  int count_real = 0;
  int count_complex = 0;
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  PlanPair(int dim, int n) {
    int dims[kMaxDim];
    for (int a = 0; a < dim; ++a) dims[a] = n;
    count_real = 1;
    for (int a = 0; a < dim; ++a) count_real *= n;
    count_complex = count_real / n * (n / 2 + 1);
    real = fftw_alloc_real(count_real);
    cplx = fftw_alloc_complex(count_complex);
    fwd = fftw_plan_dft_r2c(dim, dims, real, cplx, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r(dim, dims, cplx, real, FFTW_ESTIMATE);
  }
  ~PlanPair() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(real);
    fftw_free(cplx);
  }
  PlanPair(const PlanPair&) = delete;
  PlanPair& operator=(const PlanPair&) = delete;
};

// FFTW planning is not thread-safe; execution on the plan buffers is serialized too.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

PlanPair& plans_for(const PeriodicGrid& grid) {
  static std::map<std::pair<int, int>, std::unique_ptr<PlanPair>> cache;
  auto key = std::make_pair(grid.dim(), grid.n());
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<PlanPair>(grid.dim(), grid.n())).first;
  return *it->second;
}

}  // namespace

std::size_t spectrum_size(const PeriodicGrid& grid) {
  return grid.slice_size() / grid.n() * (grid.n() / 2 + 1);
}

Spectrum forward(const PeriodicGrid& grid, std::span<const double> slice) {
  require(slice.size() == grid.slice_size(), "spectral::forward: slice size mismatch");
  std::lock_guard lock(plan_mutex());
  PlanPair& p = plans_for(grid);
  std::memcpy(p.real, slice.data(), sizeof(double) * slice.size());
  fftw_execute(p.fwd);
  Spectrum out(p.count_complex);
  for (int c = 0; c < p.count_complex; ++c) out[c] = {p.cplx[c][0], p.cplx[c][1]};
  return out;
}

void inverse(const PeriodicGrid& grid, const Spectrum& spectrum, std::span<double> out) {
  require(out.size() == grid.slice_size(), "spectral::inverse: slice size mismatch");
  std::lock_guard lock(plan_mutex());
  PlanPair& p = plans_for(grid);
  require(spectrum.size() == static_cast<std::size_t>(p.count_complex), "spectral::inverse: spectrum size");
  for (int c = 0; c < p.count_complex; ++c) {
    p.cplx[c][0] = spectrum[c].real();
    p.cplx[c][1] = spectrum[c].imag();
  }
  fftw_execute(p.bwd);
  const double scale = 1.0 / static_cast<double>(p.count_real);
  for (int i = 0; i < p.count_real; ++i) out[i] = p.real[i] * scale;
}

std::array<int, kMaxDim> wavevector(const PeriodicGrid& grid, std::size_t c) {
  const int n = grid.n();
  const int half = n / 2 + 1;
  std::array<int, kMaxDim> k{};
  const int d = grid.dim();
  k[d - 1] = static_cast<int>(c % half);
  std::size_t rest = c / half;
  for (int a = d - 2; a >= 0; --a) {
    const int i = static_cast<int>(rest % n);
    rest /= n;
    k[a] = i <= n / 2 ? i : i - n;
  }
  return k;
}

bool is_nyquist(const PeriodicGrid& grid, std::size_t c) {
  const auto k = wavevector(grid, c);
  for (int a = 0; a < grid.dim(); ++a)
    if (std::abs(k[a]) == grid.n() / 2) return true;
  return false;
}

}  // namespace tcur::spectral

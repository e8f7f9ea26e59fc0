#include "snls/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace snls::fft {
namespace {

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

std::mutex plan_mutex;
std::map<std::pair<int, int>, PlanPair>& plan_cache() {
  static std::map<std::pair<int, int>, PlanPair> cache;
  return cache;
}

// FFTW_UNALIGNED lets us execute on whatever buffer std::vector hands us.
const PlanPair& plans_for(const GridSpec& g) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto key = std::make_pair(g.d, g.n);
  auto& cache = plan_cache();
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  std::vector<Complex> scratch(g.total());
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  int dims[3] = {g.n, g.n, g.n};
  PlanPair p;
  p.fwd = fftw_plan_dft(g.d, dims, buf, buf, FFTW_FORWARD,
                        FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.bwd = fftw_plan_dft(g.d, dims, buf, buf, FFTW_BACKWARD,
                        FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p.fwd || !p.bwd) throw std::runtime_error("fftw planning failed");
  return cache.emplace(key, p).first->second;
}

}  // namespace

void forward(const GridSpec& g, std::vector<Complex>& data) {
  if (data.size() != g.total())
    throw std::invalid_argument("fft: buffer size does not match grid");
  const PlanPair& p = plans_for(g);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p.fwd, buf, buf);
}

void inverse(const GridSpec& g, std::vector<Complex>& data) {
  if (data.size() != g.total())
    throw std::invalid_argument("fft: buffer size does not match grid");
  const PlanPair& p = plans_for(g);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p.bwd, buf, buf);
  const double scale = 1.0 / static_cast<double>(g.total());
  for (auto& v : data) v *= scale;
}

}  // namespace snls::fft

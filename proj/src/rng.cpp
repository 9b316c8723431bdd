#include "qou/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace qou {

namespace {
std::atomic<unsigned> g_threads{0};
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t sub_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master + 0x2545f4914f6cdd1dULL) ^ index);
}

Rng Rng::stream(std::uint64_t master, std::uint64_t index) {
  return Rng(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

std::uint64_t Rng::poisson(double mean) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::uint64_t> d(mean);
  return d(eng_);
}

unsigned thread_count() {
  if (unsigned n = g_threads.load(); n > 0) return n;
  if (const char* env = std::getenv("QOU_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_threads(unsigned n) { g_threads.store(n); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace qou

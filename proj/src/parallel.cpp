#include "spectralforge/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace spectralforge {

namespace {
std::atomic<unsigned> g_jobs{0};
thread_local bool t_in_worker = false;
}

void set_jobs(unsigned n) { g_jobs.store(n); }

unsigned jobs() {
  const unsigned n = g_jobs.load();
  if (n != 0) return n;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  // Nested calls run inline on the worker that issued them.
  const std::size_t workers = t_in_worker ? 1 : std::min<std::size_t>(jobs(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    const bool outer = t_in_worker;
    t_in_worker = true;
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    t_in_worker = outer;
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace spectralforge

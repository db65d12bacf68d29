#include "lgc/parallel.hpp"

#include <atomic>

namespace lgc {
namespace {

unsigned hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

std::atomic<unsigned> g_max_threads{0};

}  // namespace

void set_max_threads(unsigned n) { g_max_threads = n; }

unsigned max_threads() {
  const unsigned cap = g_max_threads.load();
  return cap == 0 ? hardware_threads() : cap;
}

}  // namespace lgc

#pragma once

#include <cstddef>
#include <functional>

namespace lesionseg {

// Process-wide worker pool. Tasks passed to parallel_for must write disjoint
// state; under that contract results are independent of scheduling, so any
// worker count produces identical bits. workers == 1 runs inline.
class ThreadPool {
public:
  static ThreadPool& instance();

  void set_workers(int n);
  int workers() const;

  // Invokes fn(i) for i in [0, count). Blocks until done. Exceptions from
  // tasks are rethrown on the calling thread (first one wins).
  void parallel_for(size_t count, const std::function<void(size_t)>& fn);

private:
  ThreadPool() = default;
};

inline void parallel_for(size_t count, const std::function<void(size_t)>& fn) {
  ThreadPool::instance().parallel_for(count, fn);
}

} // namespace lesionseg

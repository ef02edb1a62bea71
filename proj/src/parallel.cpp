#include "lesionseg/parallel.hpp"

#include <condition_variable>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lesionseg {

namespace {

// Set while a thread is executing a span; nested parallel_for calls from
// inside a job run inline instead of re-entering the crew.
thread_local bool tl_in_job = false;

// One long-lived crew of workers; each parallel_for becomes one job split
// into contiguous index chunks, one per participant. Workers only touch their
// own chunk, so there is no cross-generation state to race on.
class Crew {
public:
  ~Crew() { shutdown(); }

  void resize(int n) {
    if (n < 1) n = 1;
    if (n == target_) return;
    shutdown();
    target_ = n;
    chunks_.assign(static_cast<size_t>(n) - 1, {0, 0});
    for (int i = 0; i < n - 1; ++i)
      threads_.emplace_back([this, i] { worker(static_cast<size_t>(i)); });
  }

  int workers() const { return target_; }

  void run(size_t count, const std::function<void(size_t)>& fn) {
    if (count == 0) return;
    const size_t helpers = threads_.size();
    if (helpers == 0 || count == 1 || tl_in_job) {
      for (size_t i = 0; i < count; ++i) fn(i);
      return;
    }
    const size_t parts = helpers + 1;
    const size_t base = count / parts, extra = count % parts;
    size_t begin = 0;
    std::vector<std::pair<size_t, size_t>> spans(parts);
    for (size_t p = 0; p < parts; ++p) {
      const size_t len = base + (p < extra ? 1 : 0);
      spans[p] = {begin, begin + len};
      begin += len;
    }
    {
      std::lock_guard<std::mutex> lk(mu_);
      fn_ = &fn;
      for (size_t i = 0; i < helpers; ++i) chunks_[i] = spans[i + 1];
      done_ = 0;
      error_ = nullptr;
      ++generation_;
    }
    cv_.notify_all();
    run_span(spans[0], fn);
    std::unique_lock<std::mutex> lk(mu_);
    done_cv_.wait(lk, [&] { return done_ == helpers; });
    fn_ = nullptr;
    if (error_) std::rethrow_exception(error_);
  }

private:
  void run_span(std::pair<size_t, size_t> span,
                const std::function<void(size_t)>& fn) {
    tl_in_job = true;
    try {
      for (size_t i = span.first; i < span.second; ++i) fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> lk(mu_);
      if (!error_) error_ = std::current_exception();
    }
    tl_in_job = false;
  }

  void worker(size_t slot) {
    uint64_t seen = 0;
    for (;;) {
      const std::function<void(size_t)>* fn;
      std::pair<size_t, size_t> span;
      {
        std::unique_lock<std::mutex> lk(mu_);
        cv_.wait(lk, [&] { return quit_ || generation_ != seen; });
        if (quit_) return;
        seen = generation_;
        fn = fn_;
        span = chunks_[slot];
      }
      run_span(span, *fn);
      std::lock_guard<std::mutex> lk(mu_);
      ++done_;
      done_cv_.notify_all();
    }
  }

  void shutdown() {
    {
      std::lock_guard<std::mutex> lk(mu_);
      quit_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
    threads_.clear();
    quit_ = false;
  }

  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  std::vector<std::thread> threads_;
  std::vector<std::pair<size_t, size_t>> chunks_;
  const std::function<void(size_t)>* fn_ = nullptr;
  size_t done_ = 0;
  uint64_t generation_ = 0;
  int target_ = 1;
  bool quit_ = false;
  std::exception_ptr error_;
};

Crew& crew() {
  static Crew c;
  return c;
}

} // namespace

ThreadPool& ThreadPool::instance() {
  static ThreadPool pool;
  return pool;
}

void ThreadPool::set_workers(int n) { crew().resize(n); }

int ThreadPool::workers() const { return crew().workers(); }

void ThreadPool::parallel_for(size_t count,
                              const std::function<void(size_t)>& fn) {
  crew().run(count, fn);
}

} // namespace lesionseg

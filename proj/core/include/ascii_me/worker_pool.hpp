#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ascii_me {

/// Fork-join pool. parallel_for() hands out indices dynamically and blocks
/// until every index has run; the first exception thrown by a task is
/// rethrown on the calling thread. With one worker, tasks run inline.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const noexcept { return workers_; }

  void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task);

 private:
  void worker_loop();
  void drain();

  std::size_t workers_;
  std::vector<std::jthread> threads_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(std::size_t)>* task_ = nullptr;
  std::size_t n_ = 0;
  std::size_t next_ = 0;
  std::size_t active_ = 0;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

}  // namespace ascii_me

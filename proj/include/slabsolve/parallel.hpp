// SPDX-License-Identifier: Apache-2.0

#ifndef SLABSOLVE_PARALLEL_HPP
#define SLABSOLVE_PARALLEL_HPP

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace slabsolve
{

// Runs f(0..n-1) on up to `threads` workers. The first exception (by index) is rethrown
// after all workers finish.
template <class F>
void parallel_for(int n, int threads, F &&f)
{
  if (threads <= 1 || n <= 1)
  {
    for (int i = 0; i < n; i++)
    {
      f(i);
    }
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto work = [&]()
  {
    for (int i = next++; i < n; i = next++)
    {
      try
      {
        f(i);
      }
      catch (...)
      {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(threads, n); t++)
  {
    pool.emplace_back(work);
  }
  for (auto &t : pool)
  {
    t.join();
  }
  for (auto &e : errors)
  {
    if (e)
    {
      std::rethrow_exception(e);
    }
  }
}

}  // namespace slabsolve

#endif  // SLABSOLVE_PARALLEL_HPP

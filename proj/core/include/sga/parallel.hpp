#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace sga
{

/// Runs fn(0..n_jobs-1), possibly on several threads. Each job must write
/// only to its own output slot; job index assignment is dynamic, so the
/// result must not depend on which thread runs which job. With threads <= 1
/// this is a plain loop.
inline void parallel_for(int n_jobs, int threads, const std::function<void(int)>& fn)
{
    if (threads <= 1 || n_jobs <= 1)
    {
        for (int i = 0; i < n_jobs; ++i)
        {
            fn(i);
        }
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    const int workers = std::min(threads, n_jobs);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t)
    {
        pool.emplace_back([&] {
            for (;;)
            {
                const int i = next.fetch_add(1);
                if (i >= n_jobs || failed.load())
                {
                    return;
                }
                try
                {
                    fn(i);
                }
                catch (...)
                {
                    if (!failed.exchange(true))
                    {
                        error = std::current_exception();
                    }
                    return;
                }
            }
        });
    }
    for (auto& th : pool)
    {
        th.join();
    }
    if (error)
    {
        std::rethrow_exception(error);
    }
}

/// Thread count resolution: explicit flag wins, then the
/// SPECTRAL_ANCESTRY_THREADS environment variable, then 1.
inline int resolve_threads(int requested)
{
    if (requested > 0)
    {
        return requested;
    }
    if (const char* env = std::getenv("SPECTRAL_ANCESTRY_THREADS"))
    {
        const int v = std::atoi(env);
        if (v > 0)
        {
            return v;
        }
    }
    return 1;
}

}  // namespace sga

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sharp {

/// Number of worker threads to use for `requested` (0 = hardware concurrency).
inline unsigned resolve_jobs(unsigned requested)
{
	if (requested)
		return requested;
	return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for every i in [0, count) on up to `jobs` threads. Work items
/// must be independent; the first exception thrown is rethrown here.
template <typename Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn &&fn)
{
	unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_jobs(jobs), count));
	if (workers <= 1) {
		for (std::size_t i = 0; i < count; ++i)
			fn(i);
		return;
	}

	std::atomic<std::size_t> next{0};
	std::exception_ptr error;
	std::mutex error_lock;
	auto body = [&] {
		for (;;) {
			std::size_t i = next.fetch_add(1);
			if (i >= count)
				return;
			try {
				fn(i);
			} catch (...) {
				std::lock_guard<std::mutex> g(error_lock);
				if (!error)
					error = std::current_exception();
				next = count;
			}
		}
	};

	std::vector<std::thread> pool;
	pool.reserve(workers);
	for (unsigned w = 0; w < workers; ++w)
		pool.emplace_back(body);
	for (auto &t : pool)
		t.join();
	if (error)
		std::rethrow_exception(error);
}

} // namespace sharp

#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace upc {

inline unsigned default_threads()
{
	return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(chunk, begin, end) over [0, count) split into fixed-size chunks.
/// Chunk boundaries do not depend on the thread count, so callers that reduce
/// per-chunk results in chunk order get identical output for any `threads`.
template <class Body>
void for_each_chunk(std::size_t count, std::size_t chunk, unsigned threads, Body &&body)
{
	const std::size_t chunks = (count + chunk - 1) / chunk;
	threads = static_cast<unsigned>(std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(chunks, 1)));
	auto run = [&](unsigned worker) {
		for (std::size_t c = worker; c < chunks; c += threads)
			body(c, c * chunk, std::min(count, (c + 1) * chunk));
	};
	if (threads == 1) {
		run(0);
		return;
	}
	std::vector<std::exception_ptr> errors(threads);
	std::vector<std::thread> pool;
	for (unsigned w = 0; w < threads; ++w)
		pool.emplace_back([&, w] {
			try {
				run(w);
			} catch (...) {
				errors[w] = std::current_exception();
			}
		});
	for (auto &t : pool)
		t.join();
	for (auto &e : errors)
		if (e)
			std::rethrow_exception(e);
}

} // namespace upc

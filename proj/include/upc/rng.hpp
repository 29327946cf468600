#pragma once

#include <cstdint>
#include <limits>

#include "measures.hpp"

namespace upc {

constexpr std::uint64_t mix64(std::uint64_t z)
{
	z += 0x9e3779b97f4a7c15ULL;
	z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
	z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
	return z ^ (z >> 31);
}

/// SplitMix64; output is fixed across platforms, unlike the std distributions.
class Rng
{
public:
	using result_type = std::uint64_t;
	explicit Rng(std::uint64_t seed) : state_(seed) {}

	/// Independent stream for item `index` of a seeded computation.
	static Rng substream(std::uint64_t seed, std::uint64_t index) { return Rng(mix64(mix64(seed) ^ index)); }

	static constexpr result_type min() { return 0; }
	static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

	result_type operator()()
	{
		state_ += 0x9e3779b97f4a7c15ULL;
		std::uint64_t z = state_;
		z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
		z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
		return z ^ (z >> 31);
	}

	/// Uniform in [0, 1) with 53 random bits.
	double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

	std::uint64_t below(std::uint64_t bound)
	{
		// reject the biased tail
		const std::uint64_t limit = max() - max() % bound;
		std::uint64_t r;
		do
			r = (*this)();
		while (r >= limit);
		return r % bound;
	}

	unsigned sample(const Dist &p)
	{
		const double r = uniform();
		double acc = 0;
		for (unsigned k = 0; k + 1 < p.a(); ++k) {
			acc += p[k];
			if (r < acc)
				return k;
		}
		// Last symbol with positive mass absorbs rounding.
		for (unsigned k = p.a(); k-- > 0;)
			if (p[k] > 0)
				return k;
		return 0;
	}

private:
	std::uint64_t state_;
};

} // namespace upc

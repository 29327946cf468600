#pragma once

#include <cmath>
#include <vector>

#include <upc/measures.hpp>
#include <upc/rng.hpp>

namespace gen {

/// Random distribution on Z_a; `sparsity` > 0 zeroes coordinates with that probability.
inline upc::Dist dist(upc::Rng &rng, unsigned a, double sparsity = 0)
{
	std::vector<double> v(a);
	double sum = 0;
	do {
		sum = 0;
		for (double &e : v) {
			e = rng.uniform() < sparsity ? 0.0 : -std::log(1 - rng.uniform());
			sum += e;
		}
	} while (sum <= 0);
	for (double &e : v)
		e /= sum;
	return upc::Dist(v);
}

inline double between(upc::Rng &rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

} // namespace gen

#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "csv.hpp"
#include "error.hpp"
#include "measures.hpp"
#include "polar.hpp"
#include "storage.hpp"

namespace upc {

/// H(U_i | U^{i-1}) for n = 2^level, ordered by transform index.
struct SynthEntropyTree
{
	unsigned a = 2;
	unsigned level = 0;
	std::vector<double> values;

	double mean() const
	{
		double s = 0;
		for (double v : values)
			s += v;
		return values.empty() ? 0.0 : s / values.size();
	}
};

inline SynthEntropyTree synthesized_entropies(const Dist &p, unsigned level)
{
	require(level < 31, "level too large");
	const std::size_t n = std::size_t{1} << level;
	check_oracle_cap(p.a(), n);
	return {p.a(), level, exact_joint_conditionals(p, n)};
}

/// Average over σ of max(H(p^σ), H(q^σ)).
inline double compound_lower_bound(const Dist &p, const Dist &q, unsigned level)
{
	require(p.a() == q.a(), "alphabet mismatch");
	const auto tp = synthesized_entropies(p, level), tq = synthesized_entropies(q, level);
	double s = 0;
	for (std::size_t i = 0; i < tp.values.size(); ++i)
		s += std::max(tp.values[i], tq.values[i]);
	return s / tp.values.size();
}

/// Average over σ of the erasure rate of BEC(max(Z_σ(P), Z_σ(Q))).
inline double compound_upper_bound_bec(const Dist &p, const Dist &q, unsigned level)
{
	if (p.a() != 2 || q.a() != 2)
		fail(Errc::unsupported_alphabet, "the erasure upper bound is binary");
	require(level < 31, "level too large");
	const std::size_t n = std::size_t{1} << level;
	const auto zp = bec_erasures(bhattacharyya(p), n), zq = bec_erasures(bhattacharyya(q), n);
	double s = 0;
	for (std::size_t i = 0; i < n; ++i)
		s += std::max(zp[i], zq[i]);
	return s / n;
}

inline constexpr const char *kUpperBoundReading = "mean_sigma max(Z_sigma(P), Z_sigma(Q))";

struct CounterexampleReport
{
	Dist p, q;
	double H_p = 0, H_q = 0;
	double C = 0; // max(H_p, H_q)
	double lower_bound_l1 = 0;
	bool strict_excess = false;
};

inline CounterexampleReport counterexample_report(const Dist &p = Dist({0.08, 0.36, 0.56}),
                                                  const Dist &q = Dist({0.11, 0.62, 0.27}))
{
	CounterexampleReport r{p, q};
	r.H_p = entropy(p);
	r.H_q = entropy(q);
	r.C = std::max(r.H_p, r.H_q);
	r.lower_bound_l1 = compound_lower_bound(p, q, 1);
	r.strict_excess = r.lower_bound_l1 > r.C + 1e-12;
	return r;
}

inline void write_compound_csv(std::ostream &os, const Dist &p, const Dist &q, unsigned level)
{
	const auto tp = synthesized_entropies(p, level), tq = synthesized_entropies(q, level);
	write_row(os, {"sigma_index", "H_p_sigma", "H_q_sigma", "max"});
	for (std::size_t i = 0; i < tp.values.size(); ++i)
		write_row(os, {std::to_string(i), fmt_real(tp.values[i]), fmt_real(tq.values[i]),
		               fmt_real(std::max(tp.values[i], tq.values[i]))});
}

} // namespace upc

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <vector>

#include "bytes.hpp"
#include "error.hpp"
#include "measures.hpp"
#include "parallel.hpp"
#include "polar.hpp"
#include "rng.hpp"

namespace upc {

enum class Provenance : std::uint8_t { exact = 0, monte_carlo = 1, bec = 2 };

struct EntropyEstimate
{
	double value = 0;
	double std_error = 0;
	friend bool operator==(const EntropyEstimate &, const EntropyEstimate &) = default;
};

/// Indices i (zero-based) with H(U_i | U^{i-1}) >= delta, plus how they were found.
struct StorageSet
{
	unsigned a = 2;
	std::size_t n = 0;
	double delta = 0;
	std::vector<std::uint32_t> indices;
	Provenance provenance = Provenance::exact;
	std::uint64_t samples = 0;
	std::uint64_t seed = 0;
	std::vector<EntropyEstimate> estimates;

	std::size_t size() const { return indices.size(); }
	bool contains(std::uint32_t i) const { return std::binary_search(indices.begin(), indices.end(), i); }
	double rate() const { return n ? static_cast<double>(indices.size()) / n : 0.0; }
	std::vector<bool> mask() const
	{
		std::vector<bool> m(n, false);
		for (auto i : indices)
			m[i] = true;
		return m;
	}
};

namespace detail {

inline void check_delta(double delta)
{
	if (!(delta > 0 && delta < 1))
		fail(Errc::invalid_argument, "delta outside (0, 1)");
}

inline StorageSet threshold(const Dist &p, std::size_t n, double delta, std::span<const double> values,
                            std::span<const double> slack)
{
	StorageSet s;
	s.a = p.a();
	s.n = n;
	s.delta = delta;
	for (std::size_t i = 0; i < n; ++i)
		if (values[i] >= delta - (slack.empty() ? 0.0 : slack[i]))
			s.indices.push_back(static_cast<std::uint32_t>(i));
	return s;
}

} // namespace detail

inline StorageSet storage_set_exact(const Dist &p, std::size_t n, double delta)
{
	detail::check_delta(delta);
	const auto h = exact_joint_conditionals(p, n);
	StorageSet s = detail::threshold(p, n, delta, h, {});
	s.provenance = Provenance::exact;
	for (double v : h)
		s.estimates.push_back({v, 0.0});
	return s;
}

/// Unbiased per-index estimates of H(U_i | U^{i-1}) (base a) from `samples`
/// source draws. Each draw contributes the entropy of the exact conditional law
/// of U_i given its own prefix. Every sample has its own substream and per-chunk
/// moments are merged in chunk order, so the result does not depend on `threads`.
inline std::vector<EntropyEstimate> estimate_conditional_entropies_mc(const Dist &p, std::size_t n,
                                                                      std::uint64_t samples, std::uint64_t seed,
                                                                      unsigned threads = default_threads())
{
	require(samples >= 1, "need at least one sample");
	require(is_pow2(n), "block length must be a power of 2");
	const unsigned a = p.a();
	const double inv_log_a = 1.0 / std::log(static_cast<double>(a));
	constexpr std::size_t kChunk = 64;
	const std::size_t chunks = (samples + kChunk - 1) / kChunk;
	// Welford mean and M2 per chunk and index
	std::vector<std::vector<double>> means(chunks), m2s(chunks);
	for_each_chunk(samples, kChunk, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
		ScWorkspace ws(a, n);
		std::vector<double> mean(n, 0.0), m2(n, 0.0);
		std::vector<Symbol> u(n), x(n);
		double k = 0;
		for (std::size_t t = begin; t < end; ++t) {
			Rng rng = Rng::substream(seed, t);
			for (auto &s : u)
				s = static_cast<Symbol>(rng.sample(p));
			polar_transform_inplace(u, a);
			k += 1;
			ws.sweep(p, x, [&](std::size_t i, std::span<const double> m) -> std::optional<Symbol> {
				double v = 0;
				for (double q : m)
					if (q > 0)
						v -= q * std::log(q);
				v = std::max(v, 0.0) * inv_log_a;
				const double d = v - mean[i];
				mean[i] += d / k;
				m2[i] += d * (v - mean[i]);
				return u[i];
			});
		}
		means[c] = std::move(mean);
		m2s[c] = std::move(m2);
	});
	std::vector<EntropyEstimate> out(n);
	for (std::size_t i = 0; i < n; ++i) {
		double count = 0, mean = 0, m2 = 0;
		for (std::size_t c = 0; c < chunks; ++c) {
			const double nc = static_cast<double>(std::min(samples, (c + 1) * kChunk) - c * kChunk);
			const double d = means[c][i] - mean;
			const double tot = count + nc;
			mean += d * nc / tot;
			m2 += m2s[c][i] + d * d * count * nc / tot;
			count = tot;
		}
		const double var = samples > 1 ? m2 / (count - 1) : 0.0;
		out[i] = {mean, std::sqrt(var / count)};
	}
	return out;
}

/// Thresholds MC estimates at delta - guard * stderr (borderline indices are kept).
inline StorageSet storage_set_mc(const Dist &p, std::size_t n, double delta, std::uint64_t samples,
                                 std::uint64_t seed, double guard, unsigned threads = default_threads())
{
	detail::check_delta(delta);
	require(guard >= 0, "guard must be nonnegative");
	const auto est = estimate_conditional_entropies_mc(p, n, samples, seed, threads);
	std::vector<double> values(n), slack(n);
	for (std::size_t i = 0; i < n; ++i) {
		values[i] = est[i].value;
		slack[i] = guard * est[i].std_error;
	}
	StorageSet s = detail::threshold(p, n, delta, values, slack);
	s.provenance = Provenance::monte_carlo;
	s.samples = samples;
	s.seed = seed;
	s.estimates = est;
	return s;
}

/// Erasure probabilities of the BEC proxy after log2(n) polarization steps,
/// z- = 2z - z^2 on the first half, z+ = z^2 on the second, natural order.
inline std::vector<double> bec_erasures(double z_root, std::size_t n)
{
	require(is_pow2(n), "block length must be a power of 2");
	std::vector<double> z{z_root};
	while (z.size() < n) {
		// the first-applied sign is the most significant index bit
		std::vector<double> next(2 * z.size());
		for (std::size_t i = 0; i < z.size(); ++i) {
			next[2 * i] = 2 * z[i] - z[i] * z[i];
			next[2 * i + 1] = z[i] * z[i];
		}
		z.swap(next);
	}
	return z;
}

inline double bhattacharyya(const Dist &p)
{
	if (p.a() != 2)
		fail(Errc::unsupported_alphabet, "Bhattacharyya proxy needs a = 2");
	return 2 * std::sqrt(p[0] * p[1]);
}

inline StorageSet storage_set_bec(const Dist &p, std::size_t n, double delta)
{
	detail::check_delta(delta);
	const auto z = bec_erasures(bhattacharyya(p), n);
	StorageSet s = detail::threshold(p, n, delta, z, {});
	s.provenance = Provenance::bec;
	for (double v : z)
		s.estimates.push_back({v, 0.0});
	return s;
}

/// How storage sets are obtained when the caller does not supply one: the
/// exhaustive oracle when a^n fits under the cap, Monte Carlo otherwise.
struct StoragePlan
{
	std::uint64_t samples = 2000;
	std::uint64_t seed = 0;
	double guard = 2;
	unsigned threads = default_threads();
	bool force_mc = false;
};

inline bool within_oracle_cap(unsigned a, std::size_t n)
{
	return static_cast<double>(n) * std::log2(static_cast<double>(a)) <= kOracleCapLog2 + 1e-9;
}

inline StorageSet storage_for(const Dist &p, std::size_t n, double delta, const StoragePlan &plan = {})
{
	if (!plan.force_mc && within_oracle_cap(p.a(), n))
		return storage_set_exact(p, n, delta);
	return storage_set_mc(p, n, delta, plan.samples, plan.seed, plan.guard, plan.threads);
}

inline void check_compatible(const StorageSet &s, const StorageSet &t)
{
	if (s.n != t.n || s.a != t.a || s.delta != t.delta)
		fail(Errc::invalid_argument, "storage sets have different (a, n, delta)");
}

inline StorageSet union_storage(std::span<const StorageSet> sets)
{
	require(!sets.empty(), "union of no storage sets");
	StorageSet out = sets.front();
	for (const auto &s : sets.subspan(1)) {
		check_compatible(out, s);
		std::vector<std::uint32_t> merged;
		std::set_union(out.indices.begin(), out.indices.end(), s.indices.begin(), s.indices.end(),
		               std::back_inserter(merged));
		out.indices = std::move(merged);
		if (out.provenance != s.provenance)
			out.provenance = Provenance::monte_carlo;
	}
	out.estimates.clear();
	return out;
}

/// inner ⊆ outer
inline bool is_nested(const StorageSet &inner, const StorageSet &outer)
{
	check_compatible(inner, outer);
	return std::includes(outer.indices.begin(), outer.indices.end(), inner.indices.begin(), inner.indices.end());
}

// PSET: "PSET" 0x01 u16 a, u32 n, f64 delta, u8 provenance, u32 count, count x u32 index.
inline std::vector<std::uint8_t> encode_storage_set(const StorageSet &s)
{
	ByteWriter w;
	w.raw("PSET");
	w.u8(0x01);
	w.u16(static_cast<std::uint16_t>(s.a));
	w.u32(static_cast<std::uint32_t>(s.n));
	w.f64(s.delta);
	w.u8(static_cast<std::uint8_t>(s.provenance));
	w.u32(static_cast<std::uint32_t>(s.indices.size()));
	for (auto i : s.indices)
		w.u32(i);
	return w.take();
}

inline StorageSet decode_storage_set(std::span<const std::uint8_t> bytes)
{
	ByteReader r(bytes);
	r.expect("PSET", "magic");
	std::size_t at = r.offset();
	if (r.u8("version") != 0x01)
		throw FormatError(at, "unsupported version");
	StorageSet s;
	at = r.offset();
	s.a = r.u16("alphabet");
	if (!is_prime(s.a))
		throw FormatError(at, "alphabet size is not prime");
	at = r.offset();
	s.n = r.u32("block length");
	if (!is_pow2(s.n))
		throw FormatError(at, "block length is not a power of 2");
	at = r.offset();
	s.delta = r.f64("delta");
	if (!(s.delta > 0 && s.delta < 1))
		throw FormatError(at, "delta outside (0, 1)");
	at = r.offset();
	const auto tag = r.u8("provenance");
	if (tag > 2)
		throw FormatError(at, "unknown provenance");
	s.provenance = static_cast<Provenance>(tag);
	at = r.offset();
	const auto count = r.u32("count");
	if (count > s.n)
		throw FormatError(at, "more indices than block length");
	s.indices.reserve(count);
	for (std::uint32_t k = 0; k < count; ++k) {
		at = r.offset();
		const auto i = r.u32("index");
		if (i >= s.n || (!s.indices.empty() && i <= s.indices.back()))
			throw FormatError(at, "indices must be ascending and below n");
		s.indices.push_back(i);
	}
	if (r.remaining() != 0)
		throw FormatError(r.offset(), "trailing bytes");
	return s;
}

inline void write_storage_csv(std::ostream &os, const StorageSet &s)
{
	char buf[96];
	os << "index,entropy,stderr\n";
	for (std::size_t i = 0; i < s.estimates.size(); ++i) {
		std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g\n", i, s.estimates[i].value, s.estimates[i].std_error);
		os << buf;
	}
}

} // namespace upc

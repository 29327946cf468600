#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <zlib.h>

#include "bytes.hpp"
#include "error.hpp"
#include "measures.hpp"
#include "parallel.hpp"
#include "polar.hpp"
#include "rng.hpp"
#include "storage.hpp"

namespace upc {

struct DecodeResult
{
	SymbolBlock x;
	std::vector<Symbol> u;
	std::size_t ties = 0; // undecided indices whose argmax was shared
};

/// Argmax with ties (relative 1e-12) resolved toward the smallest symbol.
inline Symbol argmax_smallest(std::span<const double> m, bool *tied = nullptr)
{
	const double top = *std::max_element(m.begin(), m.end());
	const double cut = top * (1 - 1e-12);
	Symbol best = 0;
	unsigned hits = 0;
	for (unsigned x = m.size(); x-- > 0;)
		if (m[x] >= cut) {
			best = static_cast<Symbol>(x);
			++hits;
		}
	if (tied)
		*tied = hits > 1;
	return best;
}

namespace detail {

inline std::vector<std::int32_t> slot_map(std::size_t n, std::span<const std::uint32_t> idx)
{
	std::vector<std::int32_t> slot(n, -1);
	for (std::size_t k = 0; k < idx.size(); ++k) {
		if (idx[k] >= n)
			fail(Errc::invalid_argument, "index out of range");
		if (slot[idx[k]] != -1)
			fail(Errc::invalid_argument, "duplicate index");
		slot[idx[k]] = static_cast<std::int32_t>(k);
	}
	return slot;
}

} // namespace detail

/// Successive-cancellation decoding of x from the transformed symbols u[S].
inline DecodeResult polar_dec(const Dist &p, std::size_t n, std::span<const std::uint32_t> S,
                              std::span<const Symbol> u_S, ScWorkspace *workspace = nullptr)
{
	if (S.size() != u_S.size())
		fail(Errc::invalid_argument, "stored symbol count does not match the storage set");
	const unsigned a = p.a();
	for (Symbol s : u_S)
		if (s >= a)
			fail(Errc::invalid_argument, "stored symbol out of range");
	const auto slot = detail::slot_map(n, S);
	ScWorkspace local(a, workspace ? 1 : n);
	ScWorkspace &ws = workspace ? *workspace : local;
	require(ws.n() == n && ws.a() == a, "workspace shape mismatch");
	DecodeResult r;
	r.u.assign(n, 0);
	std::vector<Symbol> x(n, 0);
	ws.sweep(p, x, [&](std::size_t i, std::span<const double> m) -> std::optional<Symbol> {
		if (slot[i] >= 0)
			return r.u[i] = u_S[slot[i]];
		bool tied = false;
		r.u[i] = argmax_smallest(m, &tied);
		r.ties += tied;
		return r.u[i];
	});
	r.x = SymbolBlock(a, std::move(x));
	return r;
}

inline DecodeResult polar_dec(const Dist &p, const StorageSet &S, std::span<const Symbol> u_S)
{
	require(p.a() == S.a, "alphabet mismatch");
	return polar_dec(p, S.n, S.indices, u_S);
}

struct AdaptResult
{
	DecodeResult decoded;
	std::size_t chosen = 0;
	std::vector<std::size_t> distances; // Hamming distance on T, per model
	std::size_t tied_models = 1;
};

/// Decodes with every candidate model and keeps the one whose reconstruction
/// agrees best with the checker symbols u[T]. Ties are broken by a seeded
/// uniform draw. With decode_with_checkers the winner is re-decoded from
/// u[S ∪ T] instead of u[S].
inline AdaptResult polar_dec_adapt(std::span<const Dist> models, std::size_t n, std::span<const std::uint32_t> S,
                                   std::span<const Symbol> u_S, std::span<const std::uint32_t> T,
                                   std::span<const Symbol> u_T, std::uint64_t seed, bool decode_with_checkers = false)
{
	require(!models.empty(), "empty model set");
	if (T.size() != u_T.size())
		fail(Errc::invalid_argument, "checker symbol count does not match the checker set");
	const auto in_S = detail::slot_map(n, S);
	detail::slot_map(n, T);
	for (auto t : T)
		if (in_S[t] >= 0)
			fail(Errc::invalid_argument, "checker index inside the storage set");
	const unsigned a = models.front().a();
	for (const Dist &m : models)
		require(m.a() == a, "models must share the alphabet");

	ScWorkspace ws(a, n);
	AdaptResult out;
	std::vector<DecodeResult> runs;
	runs.reserve(models.size());
	for (const Dist &m : models) {
		runs.push_back(polar_dec(m, n, S, u_S, &ws));
		std::size_t d = 0;
		for (std::size_t k = 0; k < T.size(); ++k)
			d += runs.back().u[T[k]] != u_T[k];
		out.distances.push_back(d);
	}
	const std::size_t best = *std::min_element(out.distances.begin(), out.distances.end());
	std::vector<std::size_t> winners;
	for (std::size_t j = 0; j < models.size(); ++j)
		if (out.distances[j] == best)
			winners.push_back(j);
	out.tied_models = winners.size();
	out.chosen = winners.size() == 1 ? winners[0] : winners[Rng(mix64(seed)).below(winners.size())];
	if (!decode_with_checkers || T.empty()) {
		out.decoded = std::move(runs[out.chosen]);
		return out;
	}
	std::vector<std::pair<std::uint32_t, Symbol>> merged;
	for (std::size_t k = 0; k < S.size(); ++k)
		merged.emplace_back(S[k], u_S[k]);
	for (std::size_t k = 0; k < T.size(); ++k)
		merged.emplace_back(T[k], u_T[k]);
	std::sort(merged.begin(), merged.end());
	std::vector<std::uint32_t> idx;
	std::vector<Symbol> val;
	for (auto [i, v] : merged) {
		idx.push_back(i);
		val.push_back(v);
	}
	out.decoded = polar_dec(models[out.chosen], n, idx, val, &ws);
	return out;
}

/// Output of the universal binary compressor.
struct CompressedBlock
{
	unsigned a = 2;
	std::size_t n = 0;
	double rate_param = 0;
	double delta = 0;
	std::vector<std::uint32_t> stored_indices; // ascending; the storage bitmap
	std::vector<Symbol> stored_symbols;
	std::vector<std::uint32_t> checker_indices;
	std::vector<Symbol> checker_symbols;

	std::size_t stored_count() const { return stored_symbols.size() + checker_symbols.size(); }
	double rate() const { return n ? static_cast<double>(stored_count()) / n : 0.0; }
	friend bool operator==(const CompressedBlock &, const CompressedBlock &) = default;
};

/// p_0(R) = [1-θ, θ] and p_1(R) = [θ, 1-θ] with h_2(θ) = R.
inline std::vector<Dist> universal_models(double R)
{
	return {binary_dist_with_entropy(R, 0), binary_dist_with_entropy(R, 1)};
}

/// Stores u[S] and the last component u_{n-1} as checker (skipped when S already holds it).
inline CompressedBlock universal_compress(const SymbolBlock &x, double R, const StorageSet &S)
{
	if (x.a() != 2)
		fail(Errc::unsupported_alphabet, "universal compression is binary");
	if (S.n != x.n() || S.a != 2)
		fail(Errc::invalid_argument, "storage set does not match the block");
	require(R >= 0 && R <= 1, "R outside [0, 1]");
	const SymbolBlock u = polar_transform(x);
	CompressedBlock b;
	b.n = x.n();
	b.rate_param = R;
	b.delta = S.delta;
	b.stored_indices = S.indices;
	for (auto i : S.indices)
		b.stored_symbols.push_back(u[i]);
	const auto last = static_cast<std::uint32_t>(b.n - 1);
	if (!S.contains(last)) {
		b.checker_indices.push_back(last);
		b.checker_symbols.push_back(u[last]);
	}
	return b;
}

inline CompressedBlock universal_compress(const SymbolBlock &x, double R, double delta, const StoragePlan &plan = {})
{
	return universal_compress(x, R, storage_for(binary_dist_with_entropy(R, 0), x.n(), delta, plan));
}

inline AdaptResult universal_decompress(const CompressedBlock &b, std::uint64_t seed = 0)
{
	if (b.a != 2)
		fail(Errc::unsupported_alphabet, "universal compression is binary");
	const auto models = universal_models(b.rate_param);
	return polar_dec_adapt(models, b.n, b.stored_indices, b.stored_symbols, b.checker_indices, b.checker_symbols,
	                       seed);
}

struct MismatchEstimate
{
	std::size_t errors = 0;
	std::size_t trials = 0;
	double rate = 0;
	double lo = 0, hi = 0; // Wilson 95% interval
	double radius() const { return 0.5 * (hi - lo); }
};

inline void wilson_interval(std::size_t k, std::size_t n, double &lo, double &hi)
{
	if (n == 0) {
		lo = 0;
		hi = 1;
		return;
	}
	constexpr double z = 1.959963984540054;
	const double N = static_cast<double>(n), ph = k / N;
	const double den = 1 + z * z / N;
	const double mid = (ph + z * z / (2 * N)) / den;
	const double half = z * std::sqrt(ph * (1 - ph) / N + z * z / (4 * N * N)) / den;
	lo = std::max(0.0, mid - half);
	hi = std::min(1.0, mid + half);
}

/// Frequency of x̂ != x when blocks drawn i.i.d. p2 are stored on S and decoded
/// with model p1. Block t is drawn from substream (seed, t), so calls that share
/// a seed see the same source blocks.
inline MismatchEstimate estimate_mismatch_error(const Dist &p1, const Dist &p2, const StorageSet &S,
                                                std::size_t trials, std::uint64_t seed,
                                                unsigned threads = default_threads())
{
	require(p1.a() == p2.a() && p1.a() == S.a, "alphabet mismatch");
	const std::size_t n = S.n;
	constexpr std::size_t kChunk = 16;
	std::vector<std::size_t> errs((trials + kChunk - 1) / kChunk, 0);
	for_each_chunk(trials, kChunk, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
		ScWorkspace ws(p1.a(), n);
		std::vector<Symbol> x(n), u(n), uS(S.size());
		for (std::size_t t = begin; t < end; ++t) {
			Rng rng = Rng::substream(seed, t);
			for (auto &s : x)
				s = static_cast<Symbol>(rng.sample(p2));
			u = x;
			polar_transform_inplace(u, p1.a());
			for (std::size_t k = 0; k < S.size(); ++k)
				uS[k] = u[S.indices[k]];
			const auto r = polar_dec(p1, n, S.indices, uS, &ws);
			errs[c] += !std::equal(x.begin(), x.end(), r.x.symbols().begin());
		}
	});
	MismatchEstimate e;
	e.trials = trials;
	for (auto v : errs)
		e.errors += v;
	e.rate = trials ? static_cast<double>(e.errors) / trials : 0.0;
	wilson_interval(e.errors, trials, e.lo, e.hi);
	return e;
}

inline MismatchEstimate estimate_mismatch_error(const Dist &p1, const Dist &p2, std::size_t n, double delta,
                                                std::size_t trials, std::uint64_t seed, const StoragePlan &plan = {})
{
	return estimate_mismatch_error(p1, p2, storage_for(p1, n, delta, plan), trials, seed, plan.threads);
}

inline unsigned symbol_bits(unsigned a) { return static_cast<unsigned>(std::bit_width(a - 1)); }

namespace detail {

inline void pack_symbols(ByteWriter &w, std::span<const Symbol> s, unsigned bits)
{
	std::vector<std::uint8_t> out((s.size() * bits + 7) / 8, 0);
	std::size_t pos = 0;
	for (Symbol v : s)
		for (unsigned b = 0; b < bits; ++b, ++pos)
			if ((v >> b) & 1u)
				out[pos >> 3] |= static_cast<std::uint8_t>(1u << (pos & 7));
	w.bytes(out);
}

inline std::vector<Symbol> unpack_symbols(ByteReader &r, std::size_t count, unsigned a, const char *what)
{
	const unsigned bits = symbol_bits(a);
	const std::size_t start = r.offset();
	const auto raw = r.bytes((count * bits + 7) / 8, what);
	std::vector<Symbol> out(count, 0);
	std::size_t pos = 0;
	for (std::size_t k = 0; k < count; ++k) {
		unsigned v = 0;
		for (unsigned b = 0; b < bits; ++b, ++pos)
			v |= ((raw[pos >> 3] >> (pos & 7)) & 1u) << b;
		if (v >= a)
			throw FormatError(start + ((pos - 1) >> 3), std::string(what) + ": symbol out of range");
		out[k] = static_cast<Symbol>(v);
	}
	for (; pos < raw.size() * 8; ++pos)
		if ((raw[pos >> 3] >> (pos & 7)) & 1u)
			throw FormatError(start + (pos >> 3), std::string(what) + ": nonzero padding");
	return out;
}

} // namespace detail

inline std::vector<std::uint8_t> encode_block(const CompressedBlock &b)
{
	require(b.stored_indices.size() == b.stored_symbols.size(), "stored symbol count mismatch");
	require(b.checker_indices.size() == b.checker_symbols.size(), "checker symbol count mismatch");
	require(b.checker_indices.size() <= 0xffff, "too many checkers");
	ByteWriter w;
	w.raw("PLRC");
	w.u8(0x01);
	w.u16(static_cast<std::uint16_t>(b.a));
	w.u32(static_cast<std::uint32_t>(b.n));
	w.f64(b.rate_param);
	w.f64(b.delta);
	w.u8(0);
	std::vector<std::uint8_t> bitmap((b.n + 7) / 8, 0);
	for (auto i : b.stored_indices)
		bitmap[i >> 3] |= static_cast<std::uint8_t>(1u << (i & 7));
	w.bytes(bitmap);
	w.u32(static_cast<std::uint32_t>(b.stored_symbols.size()));
	const unsigned bits = symbol_bits(b.a);
	detail::pack_symbols(w, b.stored_symbols, bits);
	w.u16(static_cast<std::uint16_t>(b.checker_indices.size()));
	for (auto i : b.checker_indices)
		w.u32(i);
	detail::pack_symbols(w, b.checker_symbols, bits);
	const auto crc = crc32(0L, w.data().data(), static_cast<uInt>(w.size()));
	w.u32(static_cast<std::uint32_t>(crc));
	return w.take();
}

inline CompressedBlock decode_block(std::span<const std::uint8_t> bytes)
{
	ByteReader r(bytes);
	r.expect("PLRC", "magic");
	std::size_t at = r.offset();
	if (r.u8("version") != 0x01)
		throw FormatError(at, "unsupported version");
	CompressedBlock b;
	at = r.offset();
	b.a = r.u16("alphabet");
	if (!is_prime(b.a))
		throw FormatError(at, "alphabet size is not prime");
	at = r.offset();
	b.n = r.u32("block length");
	if (!is_pow2(b.n))
		throw FormatError(at, "block length is not a power of 2");
	at = r.offset();
	b.rate_param = r.f64("rate");
	if (!(b.rate_param >= 0 && b.rate_param <= 1))
		throw FormatError(at, "rate outside [0, 1]");
	at = r.offset();
	b.delta = r.f64("delta");
	if (!(b.delta > 0 && b.delta < 1))
		throw FormatError(at, "delta outside (0, 1)");
	at = r.offset();
	if (r.u8("storage mode") != 0)
		throw FormatError(at, "unknown storage mode");
	at = r.offset();
	const auto bitmap = r.bytes((b.n + 7) / 8, "bitmap");
	for (std::size_t i = 0; i < bitmap.size() * 8; ++i)
		if ((bitmap[i >> 3] >> (i & 7)) & 1u) {
			if (i >= b.n)
				throw FormatError(at + (i >> 3), "bitmap bit past block length");
			b.stored_indices.push_back(static_cast<std::uint32_t>(i));
		}
	at = r.offset();
	if (r.u32("stored count") != b.stored_indices.size())
		throw FormatError(at, "stored count disagrees with bitmap");
	b.stored_symbols = detail::unpack_symbols(r, b.stored_indices.size(), b.a, "stored symbols");
	const auto checkers = r.u16("checker count");
	for (unsigned k = 0; k < checkers; ++k) {
		at = r.offset();
		const auto i = r.u32("checker index");
		const bool stored = i < b.n && ((bitmap[i >> 3] >> (i & 7)) & 1u);
		if (i >= b.n || stored || (!b.checker_indices.empty() && i <= b.checker_indices.back()))
			throw FormatError(at, "checker index out of range, stored, or out of order");
		b.checker_indices.push_back(i);
	}
	b.checker_symbols = detail::unpack_symbols(r, checkers, b.a, "checker symbols");
	at = r.offset();
	const auto expected = static_cast<std::uint32_t>(crc32(0L, bytes.data(), static_cast<uInt>(at)));
	if (r.u32("checksum") != expected)
		throw FormatError(at, "checksum mismatch");
	if (r.remaining() != 0)
		throw FormatError(r.offset(), "trailing bytes");
	return b;
}

} // namespace upc

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "codec.hpp"
#include "error.hpp"
#include "measures.hpp"
#include "parallel.hpp"
#include "polar.hpp"
#include "storage.hpp"

namespace upc {

enum class SketchMethod { known_dist, pcp, brut_A, brut_B };

inline const char *method_name(SketchMethod m)
{
	switch (m) {
	case SketchMethod::known_dist: return "known";
	case SketchMethod::pcp: return "pcp";
	case SketchMethod::brut_A: return "brutA";
	case SketchMethod::brut_B: return "brutB";
	}
	return "?";
}

inline std::optional<SketchMethod> parse_method(const std::string &s)
{
	for (auto m : {SketchMethod::known_dist, SketchMethod::pcp, SketchMethod::brut_A, SketchMethod::brut_B})
		if (s == method_name(m))
			return m;
	return std::nullopt;
}

enum class BrutVariant { A, B };

struct BrutOptions
{
	double eta_step = 0.005;
	unsigned hull_grid = 8;
	bool dichotomic = false;
};

struct BrutResult
{
	double eta_star = 0;
	double eta_bound = 0; // eta(a, eps), where the scan stops
	bool fallback = false; // no scanned point passed; eta_star = eta_bound
	std::size_t probes = 0;
	std::size_t evaluated = 0;
};

/// Sketching matrix φ = I_S G_n plus the spike used to decode.
struct SketchSpec
{
	unsigned a = 2;
	std::size_t n = 0;
	double epsilon = 0;
	double delta = 0;
	SketchMethod method = SketchMethod::pcp;
	double eta = 0; // non-special mass of decode_dist
	Dist decode_dist;
	StorageSet storage;
	std::uint64_t seed = 0;

	std::size_t m() const { return storage.size(); }
};

/// Points (1-eps) δ_0 + eps w, w on the simplex grid of resolution `grid` over
/// the symbols 1..a-1. With `reduce`, one representative per orbit of
/// k -> c k (c a unit mod a) is kept; those orbits share storage sets.
inline std::vector<Dist> spa_hull_grid(unsigned a, double epsilon, unsigned grid, bool reduce)
{
	detail::check_epsilon(a, epsilon);
	require(grid >= 1, "hull grid must be >= 1");
	std::vector<Dist> out;
	std::vector<unsigned> w(a, 0);
	auto canonical = [&] {
		for (unsigned c = 2; c < a; ++c) {
			std::vector<unsigned> img(a, 0);
			for (unsigned k = 1; k < a; ++k)
				img[(c * k) % a] = w[k];
			if (std::lexicographical_compare(img.begin() + 1, img.end(), w.begin() + 1, w.end()))
				return false;
		}
		return true;
	};
	auto emit = [&] {
		if (reduce && !canonical())
			return;
		std::vector<double> v(a, 0.0);
		v[0] = 1 - epsilon;
		for (unsigned k = 1; k < a; ++k)
			v[k] = epsilon * w[k] / grid;
		out.emplace_back(std::move(v));
	};
	// compositions of grid into a-1 parts, symbol 1 first
	auto rec = [&](auto &self, unsigned k, unsigned left) -> void {
		if (k == a - 1) {
			w[k] = left;
			emit();
			return;
		}
		for (unsigned v = left + 1; v-- > 0;) {
			w[k] = v;
			self(self, k + 1, left - v);
		}
	};
	rec(rec, 1, grid);
	return out;
}

/// Smallest η on the grid eps, eps + step, ... whose spike storage set contains
/// the storage sets of the probes: q_eps for Variant B, the reduced hull grid
/// for Variant A. Falls back to eta(a, eps).
inline BrutResult brut_univ_sketching(unsigned a, double epsilon, std::size_t n, double delta, BrutVariant variant,
                                      const BrutOptions &opt = {}, const StoragePlan &plan = {})
{
	detail::check_epsilon(a, epsilon);
	require(opt.eta_step > 0, "eta step must be positive");
	BrutResult res;
	res.eta_bound = eta(a, epsilon);
	if (a == 2) {
		res.eta_star = epsilon;
		return res;
	}
	std::vector<Dist> probes;
	if (variant == BrutVariant::B)
		probes.push_back(sparse_extreme(a, epsilon));
	else
		probes = spa_hull_grid(a, epsilon, opt.hull_grid, true);
	res.probes = probes.size();

	std::vector<StorageSet> probe_sets;
	for (const Dist &q : probes)
		probe_sets.push_back(storage_for(q, n, delta, plan));
	// union of the probe sets is what the spike must cover
	const StorageSet need = union_storage(probe_sets);

	std::vector<double> grid;
	for (std::size_t k = 0;; ++k) {
		const double e = epsilon + k * opt.eta_step;
		if (e >= res.eta_bound - 1e-12)
			break;
		grid.push_back(e);
	}
	auto passes = [&](double e) {
		++res.evaluated;
		return is_nested(need, storage_for(make_spike(a, 0, e), n, delta, plan));
	};

	std::optional<std::size_t> hit;
	if (opt.dichotomic) {
		std::size_t lo = 0, hi = grid.size();
		while (lo < hi) {
			const std::size_t mid = (lo + hi) / 2;
			if (passes(grid[mid]))
				hi = mid;
			else
				lo = mid + 1;
		}
		if (lo < grid.size())
			hit = lo;
	} else {
		// batches of one candidate per worker; the smallest passing index wins
		const unsigned batch = std::max(1u, plan.threads);
		for (std::size_t start = 0; start < grid.size() && !hit; start += batch) {
			const std::size_t end = std::min(grid.size(), start + batch);
			std::vector<char> ok(end - start, 0);
			StoragePlan inner = plan;
			inner.threads = 1;
			for_each_chunk(end - start, 1, batch, [&](std::size_t c, std::size_t, std::size_t) {
				ok[c] = is_nested(need,
				                  storage_for(make_spike(a, 0, grid[start + c]), n, delta, inner));
			});
			res.evaluated += end - start;
			for (std::size_t c = 0; c < ok.size(); ++c)
				if (ok[c]) {
					hit = start + c;
					break;
				}
		}
	}
	if (hit) {
		res.eta_star = grid[*hit];
	} else {
		res.eta_star = res.eta_bound;
		res.fallback = true;
	}
	return res;
}

inline SketchSpec build_sketch_spec(unsigned a, double epsilon, std::size_t n, double delta, SketchMethod method,
                                    const StoragePlan &plan = {}, const BrutOptions &opt = {})
{
	detail::check_epsilon(a, epsilon);
	require(is_pow2(n), "block length must be a power of 2");
	SketchSpec s;
	s.a = a;
	s.n = n;
	s.epsilon = epsilon;
	s.delta = delta;
	s.method = method;
	s.seed = plan.seed;
	switch (method) {
	case SketchMethod::known_dist: s.eta = epsilon; break;
	case SketchMethod::pcp: s.eta = eta(a, epsilon); break;
	case SketchMethod::brut_A:
		s.eta = brut_univ_sketching(a, epsilon, n, delta, BrutVariant::A, opt, plan).eta_star;
		break;
	case SketchMethod::brut_B:
		s.eta = brut_univ_sketching(a, epsilon, n, delta, BrutVariant::B, opt, plan).eta_star;
		break;
	}
	s.decode_dist = make_spike(a, 0, s.eta);
	s.storage = storage_for(s.decode_dist, n, delta, plan);
	return s;
}

/// y = (x G_n) restricted to the storage set, over F_a.
inline std::vector<Symbol> sketch(const SketchSpec &spec, const SymbolBlock &x)
{
	if (x.a() != spec.a || x.n() != spec.n)
		fail(Errc::invalid_argument, "signal does not match the sketch dimensions");
	const SymbolBlock u = polar_transform(x);
	std::vector<Symbol> y;
	y.reserve(spec.m());
	for (auto i : spec.storage.indices)
		y.push_back(u[i]);
	return y;
}

inline SymbolBlock recover(const SketchSpec &spec, std::span<const Symbol> y)
{
	if (y.size() != spec.m())
		fail(Errc::invalid_argument, "measurement count mismatch");
	return polar_dec(spec.decode_dist, spec.n, spec.storage.indices, y).x;
}

/// Predicted measurement count n H(p_eps) in base a, p_eps = make_spike(a, 0, eps).
inline double measurement_count_formula(unsigned a, double epsilon, std::size_t n)
{
	return static_cast<double>(n) * entropy(make_spike(a, 0, epsilon));
}

/// Sketch decoded against a list of candidate models with extra checker rows.
struct PatchedSketch
{
	SketchSpec base;
	std::vector<Dist> models;
	std::vector<std::uint32_t> checkers;
};

inline std::size_t default_checker_count(std::size_t n)
{
	return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
}

/// Checkers are the lowest-entropy indices outside the storage set, ties by index.
inline PatchedSketch make_patched_sketch(SketchSpec base, std::vector<Dist> models, std::size_t checker_count)
{
	require(!models.empty(), "empty model list");
	const StorageSet &S = base.storage;
	require(S.estimates.size() == S.n, "storage set carries no entropy estimates");
	std::vector<std::uint32_t> free;
	for (std::uint32_t i = 0; i < S.n; ++i)
		if (!S.contains(i))
			free.push_back(i);
	std::stable_sort(free.begin(), free.end(),
	                 [&](auto l, auto r) { return S.estimates[l].value < S.estimates[r].value; });
	free.resize(std::min(free.size(), checker_count));
	std::sort(free.begin(), free.end());
	return {std::move(base), std::move(models), std::move(free)};
}

inline std::vector<Symbol> sketch_checkers(const PatchedSketch &ps, const SymbolBlock &x)
{
	if (x.a() != ps.base.a || x.n() != ps.base.n)
		fail(Errc::invalid_argument, "signal does not match the sketch dimensions");
	const SymbolBlock u = polar_transform(x);
	std::vector<Symbol> t;
	for (auto i : ps.checkers)
		t.push_back(u[i]);
	return t;
}

inline AdaptResult recover_patched(const PatchedSketch &ps, std::span<const Symbol> y, std::span<const Symbol> y_checkers,
                                   std::uint64_t seed)
{
	return polar_dec_adapt(ps.models, ps.base.n, ps.base.storage.indices, y, ps.checkers, y_checkers, seed);
}

} // namespace upc

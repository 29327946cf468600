#include <gtest/gtest.h>

#include <upc/sketch.hpp>

#include "gen.hpp"

using namespace upc;

namespace {

SymbolBlock draw(Rng &rng, const Dist &p, std::size_t n)
{
	std::vector<Symbol> x(n);
	for (auto &s : x)
		s = static_cast<Symbol>(rng.sample(p));
	return SymbolBlock(p.a(), std::move(x));
}

} // namespace

TEST(Spec, BinaryMethodsCoincide)
{
	const StoragePlan plan{.samples = 300, .seed = 1};
	const auto k = build_sketch_spec(2, 0.1, 256, 0.01, SketchMethod::known_dist, plan);
	const auto c = build_sketch_spec(2, 0.1, 256, 0.01, SketchMethod::pcp, plan);
	EXPECT_EQ(k.decode_dist, c.decode_dist);
	EXPECT_EQ(k.storage.indices, c.storage.indices);
	EXPECT_EQ(k.m(), k.storage.size());
}

TEST(Spec, PcpUsesProjectedSpike)
{
	const auto s = build_sketch_spec(3, 0.1, 8, 0.01, SketchMethod::pcp);
	EXPECT_EQ(s.decode_dist, make_spike(3, 0, eta(3, 0.1)));
	EXPECT_EQ(s.storage.provenance, Provenance::exact);
	EXPECT_THROW(build_sketch_spec(3, 0.8, 8, 0.01, SketchMethod::pcp), Error);
	EXPECT_THROW(build_sketch_spec(3, 0.1, 12, 0.01, SketchMethod::pcp), Error);
}

TEST(Sketch, Examples)
{
	SketchSpec s;
	s.a = 2;
	s.n = 2;
	s.decode_dist = Dist({0.9, 0.1});
	s.storage.a = 2;
	s.storage.n = 2;
	s.storage.indices = {0};
	EXPECT_EQ(sketch(s, SymbolBlock(2, {1, 0})), std::vector<Symbol>{1});
	EXPECT_EQ(sketch(s, SymbolBlock::zeros(2, 2)), std::vector<Symbol>{0});
	EXPECT_THROW(sketch(s, SymbolBlock::zeros(2, 4)), Error);
	EXPECT_THROW(recover(s, std::vector<Symbol>{}), Error);

	s.storage.indices = {0, 1};
	Rng rng(41);
	const SymbolBlock x = draw(rng, Dist::uniform(2), 2);
	const SymbolBlock u = polar_transform(x);
	EXPECT_EQ(sketch(s, x), std::vector<Symbol>(u.symbols().begin(), u.symbols().end()));
}

TEST(Recover, ZeroSignal)
{
	for (unsigned a : {2u, 3u, 5u}) {
		const auto s = build_sketch_spec(a, 0.1, 128, 0.01, SketchMethod::pcp, {.samples = 200, .seed = 2});
		const auto y = sketch(s, SymbolBlock::zeros(a, 128));
		for (Symbol v : y)
			EXPECT_EQ(v, 0);
		EXPECT_EQ(recover(s, y), SymbolBlock::zeros(a, 128));
	}
}

TEST(Recover, SparseSignalsAtModerateLength)
{
	const auto s = build_sketch_spec(3, 0.05, 1024, 0.003, SketchMethod::pcp, {.samples = 1000, .seed = 3});
	Rng rng(42);
	int ok = 0;
	for (int t = 0; t < 30; ++t) {
		const SymbolBlock x = draw(rng, sparse_extreme(3, 0.05), 1024);
		const auto back = recover(s, sketch(s, x));
		ok += back == x;
		// a successful recovery is exact symbol by symbol, and every recovery is consistent with y
		EXPECT_EQ(sketch(s, back), sketch(s, x));
	}
	EXPECT_GE(ok, 27);
}

TEST(HullGrid, ReductionAndCoverage)
{
	const auto full = spa_hull_grid(3, 0.1, 4, false);
	EXPECT_EQ(full.size(), 5u);
	const auto red = spa_hull_grid(3, 0.1, 4, true);
	EXPECT_EQ(red.size(), 3u);
	for (const Dist &q : red) {
		EXPECT_NEAR(q[0], 0.9, 1e-15);
		EXPECT_LE(q[1], q[2]);
	}
	// orbits under k -> 2k on Z_5 pair symbols (1,2,4,3)
	const auto f5 = spa_hull_grid(5, 0.1, 3, false);
	EXPECT_EQ(f5.size(), 20u);
	const auto r5 = spa_hull_grid(5, 0.1, 3, true);
	EXPECT_LT(r5.size(), f5.size());
	EXPECT_GE(r5.size(), f5.size() / 4);
}

TEST(HullGrid, UnitScalingPreservesStorageSets)
{
	// x -> c x commutes with G_n, so conditional entropies do not move
	const Dist q({0.7, 0.2, 0.1, 0.0, 0.0});
	std::vector<double> scaled(5, 0.0);
	for (unsigned k = 0; k < 5; ++k)
		scaled[(2 * k) % 5] = q[k];
	const auto h1 = exact_joint_conditionals(q, 8);
	const auto h2 = exact_joint_conditionals(Dist(scaled), 8);
	for (std::size_t i = 0; i < 8; ++i)
		EXPECT_NEAR(h1[i], h2[i], 1e-12);
}

TEST(Brut, Examples)
{
	const auto b = brut_univ_sketching(2, 0.1, 64, 0.01, BrutVariant::B);
	EXPECT_EQ(b.eta_star, 0.1);
	const StoragePlan plan{.samples = 400, .seed = 5};
	const auto rb = brut_univ_sketching(3, 0.1, 256, 0.01, BrutVariant::B, {}, plan);
	const auto ra = brut_univ_sketching(3, 0.1, 256, 0.01, BrutVariant::A, {}, plan);
	EXPECT_LE(rb.eta_star, eta(3, 0.1) + 1e-12);
	EXPECT_GE(ra.eta_star, rb.eta_star);
	EXPECT_EQ(rb.probes, 1u);
	EXPECT_GT(ra.probes, 1u);
	EXPECT_THROW(brut_univ_sketching(3, 0.1, 64, 0.01, BrutVariant::A, {.eta_step = 0}), Error);
}

TEST(Brut, DichotomicAgreesOnExactSets)
{
	for (double e : {0.05, 0.1, 0.2}) {
		const auto scan = brut_univ_sketching(3, e, 8, 0.05, BrutVariant::A, {.eta_step = 0.002});
		const auto bis = brut_univ_sketching(3, e, 8, 0.05, BrutVariant::A, {.eta_step = 0.002, .dichotomic = true});
		EXPECT_EQ(scan.eta_star, bis.eta_star) << e;
		EXPECT_LE(bis.evaluated, 1 + static_cast<std::size_t>(std::ceil(std::log2((eta(3, e) - e) / 0.002 + 1))));
	}
}

TEST(Brut, VariantAContainsEveryHullProbe)
{
	for (double e : {0.05, 0.1, 0.2}) {
		const auto r = brut_univ_sketching(3, e, 8, 0.05, BrutVariant::A, {.eta_step = 0.002, .hull_grid = 10});
		const auto S = storage_set_exact(make_spike(3, 0, r.eta_star), 8, 0.05);
		for (const Dist &q : spa_hull_grid(3, e, 10, false))
			EXPECT_TRUE(is_nested(storage_set_exact(q, 8, 0.05), S)) << e;
	}
}

TEST(Brut, NonIncreasingAsDeltaShrinks)
{
	for (double e : {0.05, 0.15}) {
		double prev = 1;
		for (double d : {0.3, 0.1, 0.03, 0.01}) {
			const auto r = brut_univ_sketching(3, e, 8, d, BrutVariant::A, {.eta_step = 0.002});
			EXPECT_LE(r.eta_star, prev + 1e-12) << e << " " << d;
			prev = r.eta_star;
		}
	}
}

TEST(Formula, Examples)
{
	EXPECT_NEAR(measurement_count_formula(2, 0.05, 1000) / 1000, 0.2864, 1e-4);
	// binary: n h_2(k/n) = (1/ln 2) k ln(n/k) (1 + o(1))
	const double kk = 1 << 8, nn = 1 << 26;
	const double ratio = measurement_count_formula(2, kk / nn, 1 << 26) / (kk * std::log(nn / kk) / std::log(2.0));
	EXPECT_NEAR(ratio, 1, 0.1);
}

TEST(Formula, LargeAlphabetAtFixedSparsity)
{
	// k = n eps fixed: k log_a((a-1)/eps) + k/ln a + O(k eps), falling toward k as a grows
	const double k = 10, n = 1000, e = k / n;
	double prev = HUGE_VAL;
	for (unsigned a : {101u, 10007u, 1000003u}) {
		const double m = measurement_count_formula(a, e, 1000);
		const double la = std::log(a);
		EXPECT_NEAR(m, k * std::log((a - 1) / e) / la + k / la, 0.01 * k) << a;
		EXPECT_LT(m, prev) << a;
		EXPECT_GT(m, k);
		prev = m;
	}
	EXPECT_LT(prev, 2 * k);
}

TEST(Formula, LeadingConstantWithProjectedSpike)
{
	// ratio = (a-1)(1 + 1/ln(1/eps)) + O(eps), so it tends to a-1 slowly
	for (unsigned a : {3u, 5u}) {
		auto ratio = [&](double e) {
			return entropy(make_spike(a, 0, (a - 1) * e)) * std::log(a) / (e * std::log(1 / e));
		};
		EXPECT_NEAR(ratio(1e-4), (a - 1) * (1 + 1 / std::log(1e4)), 1e-3 * (a - 1)) << a;
		EXPECT_NEAR(ratio(1e-10), a - 1.0, 0.05 * (a - 1)) << a;
		EXPECT_LT(ratio(1e-10), ratio(1e-4));
	}
}

TEST(Patched, ChoosesTheMatchingModel)
{
	const std::size_t n = 512;
	const double e = 0.05;
	auto base = build_sketch_spec(3, e, n, 0.003, SketchMethod::pcp, {.samples = 500, .seed = 6});
	std::vector<Dist> models{Dist({1 - e, e, 0}), Dist({1 - e, 0, e})};
	const auto ps = make_patched_sketch(base, models, default_checker_count(n));
	EXPECT_EQ(ps.checkers.size(), 23u);
	for (auto i : ps.checkers)
		EXPECT_FALSE(ps.base.storage.contains(i));
	Rng rng(43);
	int ok = 0;
	for (int t = 0; t < 20; ++t) {
		const SymbolBlock x = draw(rng, models[t % 2], n);
		const auto r = recover_patched(ps, sketch(ps.base, x), sketch_checkers(ps, x), t);
		ok += r.decoded.x == x;
	}
	EXPECT_GE(ok, 18);
}

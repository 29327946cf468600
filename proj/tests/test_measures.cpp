#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include <upc/measures.hpp>

#include "gen.hpp"

using namespace upc;

namespace {

// Independent DFT: std::polar per term.
std::vector<std::complex<double>> naive_dft(const Dist &p)
{
	const unsigned a = p.a();
	std::vector<std::complex<double>> out(a);
	for (unsigned w = 0; w < a; ++w)
		for (unsigned k = 0; k < a; ++k)
			out[w] += std::polar(p[k], -2 * std::numbers::pi * k * w / a);
	return out;
}

double naive_entropy(const std::vector<double> &p, double base)
{
	double h = 0;
	for (double v : p)
		if (v > 0)
			h -= v * std::log(v) / std::log(base);
	return h;
}

Dist convolve_oracle(const Dist &p, const Dist &q)
{
	std::vector<double> r(p.a(), 0.0);
	for (unsigned i = 0; i < p.a(); ++i)
		for (unsigned j = 0; j < p.a(); ++j)
			r[(i + j) % p.a()] += p[i] * q[j];
	return Dist(r);
}

void expect_dist(const Dist &p, std::vector<double> want, double tol)
{
	ASSERT_EQ(p.a(), want.size());
	for (unsigned k = 0; k < p.a(); ++k)
		EXPECT_NEAR(p[k], want[k], tol) << "k=" << k;
}

template <class F>
Errc code_of(F &&f)
{
	try {
		f();
	} catch (const Error &e) {
		return e.code();
	}
	ADD_FAILURE() << "no error thrown";
	return Errc::io;
}

} // namespace

TEST(Dist, Validation)
{
	EXPECT_EQ(code_of([] { Dist({0.25, 0.25, 0.25, 0.25}); }), Errc::invalid_argument);
	EXPECT_EQ(code_of([] { Dist({0.5, 0.6}); }), Errc::invalid_argument);
	EXPECT_EQ(code_of([] { Dist({1.1, -0.1}); }), Errc::invalid_argument);
	EXPECT_EQ(code_of([] { Dist({1.0}); }), Errc::invalid_argument);
	EXPECT_NO_THROW(Dist({0.2, 0.3, 0.1, 0.15, 0.25}));
}

TEST(Entropy, Examples)
{
	EXPECT_DOUBLE_EQ(entropy(Dist({1, 0}), 2), 0);
	for (unsigned a : {2u, 3u, 5u, 7u})
		EXPECT_NEAR(entropy(Dist::uniform(a)), 1, 1e-12);
	EXPECT_NEAR(entropy(Dist({0.08, 0.36, 0.56})), 0.8143, 5e-4);
	EXPECT_EQ(code_of([] { entropy(Dist({0.5, 0.5}), 1); }), Errc::invalid_argument);
	EXPECT_NEAR(binary_entropy(0.11), naive_entropy({0.11, 0.89}, 2), 1e-12);
}

TEST(Convolution, Examples)
{
	const Dist p({0.2, 0.3, 0.5});
	expect_dist(circular_convolve(Dist::point(3, 0), p), {0.2, 0.3, 0.5}, 1e-15);
	expect_dist(circular_convolve(Dist({0.9, 0.1}), Dist({0.8, 0.2})), {0.74, 0.26}, 1e-15);
	const Dist s = make_spike(3, 0, 0.2);
	const Dist ss = circular_convolve(s, s);
	EXPECT_NEAR(ss[1], ss[2], 1e-15);
	EXPECT_GT(ss[0], ss[1]);
	expect_dist(circular_convolve(Dist({0.08, 0.36, 0.56}), Dist({0.08, 0.36, 0.56})), {0.4096, 0.3712, 0.2192},
	            1e-12);
	EXPECT_EQ(code_of([] { circular_convolve(Dist({0.5, 0.5}), Dist::uniform(3)); }), Errc::invalid_argument);
}

TEST(Fourier, Examples)
{
	for (unsigned a : {2u, 3u, 5u}) {
		const auto d0 = dft(Dist::point(a, 0));
		const auto du = dft(Dist::uniform(a));
		for (unsigned w = 0; w < a; ++w) {
			EXPECT_NEAR(std::abs(d0[w] - 1.0), 0, 1e-14);
			EXPECT_NEAR(std::abs(du[w] - (w == 0 ? 1.0 : 0.0)), 0, 1e-14);
		}
	}
	const unsigned a = 3;
	const double P = 0.3;
	for (unsigned k = 0; k < a; ++k) {
		const auto s = dft(make_spike(a, k, P));
		for (unsigned w = 1; w < a; ++w) {
			const auto want = (1 - a * P / (a - 1)) * std::polar(1.0, -2 * std::numbers::pi * k * w / a);
			EXPECT_NEAR(std::abs(s[w] - want), 0, 1e-14);
		}
	}
}

TEST(Fourier, MatchesNaiveAndInverts)
{
	Rng rng(1);
	for (int t = 0; t < 200; ++t) {
		for (unsigned a : {2u, 3u, 5u, 7u, 11u}) {
			const Dist p = gen::dist(rng, a);
			const auto s = dft(p);
			const auto n = naive_dft(p);
			const auto back = idft(s);
			for (unsigned w = 0; w < a; ++w) {
				EXPECT_NEAR(std::abs(s[w] - n[w]), 0, 1e-12);
				EXPECT_NEAR(std::abs(back[w] - p[w]), 0, 1e-10);
			}
		}
	}
}

TEST(Fourier, ConvolutionTheorem)
{
	Rng rng(2);
	for (int t = 0; t < 1000; ++t)
		for (unsigned a : {2u, 3u, 5u, 7u}) {
			const Dist p = gen::dist(rng, a), q = gen::dist(rng, a);
			const auto lhs = dft(circular_convolve(p, q));
			const auto fp = dft(p), fq = dft(q);
			for (unsigned w = 0; w < a; ++w)
				ASSERT_NEAR(std::abs(lhs[w] - fp[w] * fq[w]), 0, 1e-10);
		}
}

TEST(Spike, Examples)
{
	expect_dist(make_spike(2, 0, 0.1), {0.9, 0.1}, 1e-15);
	expect_dist(make_spike(3, 0, 0.2), {0.8, 0.1, 0.1}, 1e-15);
	expect_dist(make_spike(3, 1, 0.2), {0.1, 0.8, 0.1}, 1e-15);
	EXPECT_EQ(code_of([] { make_spike(3, 0, 0.7); }), Errc::invalid_argument);
	EXPECT_EQ(code_of([] { make_spike(3, 0, -0.1); }), Errc::invalid_argument);
	EXPECT_EQ(code_of([] { make_spike(3, 3, 0.1); }), Errc::invalid_argument);
}

TEST(OrderC, Examples)
{
	Rng rng(3);
	for (int t = 0; t < 20; ++t)
		EXPECT_TRUE(dominates_c(Dist::uniform(3), gen::dist(rng, 3)).holds);
	const auto w = dominates_c(Dist({0.3, 0.7}), Dist({0.2, 0.8}));
	ASSERT_TRUE(w.holds);
	expect_dist(*w.witness, {5.0 / 6, 1.0 / 6}, 1e-12);
	EXPECT_FALSE(dominates_c(Dist({0.2, 0.8}), Dist({0.3, 0.7})).holds);
	EXPECT_EQ(code_of([] { dominates_c(Dist({0.2, 0.8}), Dist::uniform(2)); }), Errc::indeterminate_spectrum);
}

TEST(OrderC, WitnessReconstructsAndConstructedPairsHold)
{
	Rng rng(4);
	for (int t = 0; t < 2000; ++t)
		for (unsigned a : {2u, 3u, 5u}) {
			const Dist p2 = gen::dist(rng, a), c = gen::dist(rng, a);
			const Dist p1 = convolve_oracle(c, p2);
			OrderWitness w;
			try {
				w = dominates_c(p1, p2);
			} catch (const Error &) {
				continue;
			}
			ASSERT_TRUE(w.holds);
			const Dist back = convolve_oracle(*w.witness, p2);
			for (unsigned k = 0; k < a; ++k)
				ASSERT_NEAR(back[k], p1[k], 1e-8);
		}
}

TEST(OrderD, Examples)
{
	Rng rng(5);
	const Dist p = gen::dist(rng, 5);
	EXPECT_TRUE(dominates_d(Dist::uniform(5), p));
	EXPECT_TRUE(dominates_d(p, p));
	EXPECT_TRUE(dominates_d(Dist({0.5, 0.3, 0.2}), Dist({0.6, 0.3, 0.1})));
	EXPECT_FALSE(dominates_d(Dist({0.6, 0.3, 0.1}), Dist({0.5, 0.3, 0.2})));
}

TEST(OrderD, DoublyStochasticImagesAreMajorized)
{
	Rng rng(6);
	for (int t = 0; t < 2000; ++t) {
		const unsigned a = 5;
		const Dist p2 = gen::dist(rng, a);
		// random convex mix of permutations
		std::vector<double> out(a, 0.0);
		double total = 0;
		for (int k = 0; k < 4; ++k) {
			std::vector<unsigned> perm(a);
			std::iota(perm.begin(), perm.end(), 0u);
			for (unsigned i = a - 1; i > 0; --i)
				std::swap(perm[i], perm[rng.below(i + 1)]);
			const double wgt = rng.uniform() + 1e-3;
			total += wgt;
			for (unsigned i = 0; i < a; ++i)
				out[i] += wgt * p2[perm[i]];
		}
		for (double &v : out)
			v /= total;
		ASSERT_TRUE(dominates_d(Dist(out), p2));
	}
}

TEST(Orders, Hierarchy)
{
	Rng rng(7);
	for (unsigned a : {2u, 3u, 5u}) {
		std::size_t c_count = 0;
		for (int t = 0; t < 10000; ++t) {
			const Dist p2 = gen::dist(rng, a, 0.1);
			const Dist p1 = t % 2 ? convolve_oracle(gen::dist(rng, a, 0.2), p2) : gen::dist(rng, a, 0.1);
			bool c = false;
			try {
				c = dominates_c(p1, p2).holds;
			} catch (const Error &) {
			}
			const bool d = dominates_d(p1, p2);
			c_count += c;
			if (c) {
				ASSERT_TRUE(d);
			}
			if (d) {
				ASSERT_GE(entropy(p1), entropy(p2) - 1e-9);
			}
		}
		EXPECT_GT(c_count, 1000u);
	}
}

TEST(Orders, BinaryCollapse)
{
	Rng rng(8);
	for (int t = 0; t < 10000; ++t) {
		const Dist p1 = gen::dist(rng, 2), p2 = gen::dist(rng, 2);
		if (std::abs(p2[0] - 0.5) < 1e-9 || std::abs(entropy(p1) - entropy(p2)) < 1e-9)
			continue;
		ASSERT_EQ(entropy(p1) >= entropy(p2), dominates_c(p1, p2).holds) << p1[0] << " " << p2[0];
	}
}

TEST(Divisibility, Examples)
{
	EXPECT_TRUE(is_infinitely_divisible(Dist::point(3, 0)).divisible);
	const auto r = is_infinitely_divisible(Dist({0.8, 0.2}));
	EXPECT_TRUE(r.divisible);
	EXPECT_NEAR(r.y[1].real(), -std::log(0.6) / 2, 1e-12);
	EXPECT_EQ(code_of([] { is_infinitely_divisible(Dist::uniform(3)); }), Errc::not_divisible);
}

TEST(Divisibility, CompoundPoissonLawsPass)
{
	// exp(sum_k lambda_k (Π^k - I)) δ_0 is infinitely divisible by construction
	Rng rng(9);
	for (int t = 0; t < 300; ++t)
		for (unsigned a : {3u, 5u, 7u}) {
			std::vector<double> lam(a, 0.0);
			for (unsigned k = 1; k < a; ++k)
				lam[k] = 0.3 * rng.uniform();
			std::vector<std::complex<double>> s(a);
			for (unsigned w = 0; w < a; ++w) {
				std::complex<double> e = 0;
				for (unsigned k = 1; k < a; ++k)
					e += lam[k] * (std::polar(1.0, -2 * std::numbers::pi * k * w / a) - 1.0);
				s[w] = std::exp(e);
			}
			const auto v = idft(s);
			std::vector<double> p(a);
			for (unsigned k = 0; k < a; ++k)
				p[k] = std::max(0.0, v[k].real());
			const auto r = is_infinitely_divisible(Dist(p));
			ASSERT_TRUE(r.divisible);
			for (unsigned k = 1; k < a; ++k)
				ASSERT_NEAR(r.y[k].real(), lam[k], 1e-9);
		}
}

TEST(OrderCp, Examples)
{
	Rng rng(10);
	const Dist p = gen::dist(rng, 3);
	const auto self = dominates_cp(p, p);
	ASSERT_TRUE(self.holds);
	expect_dist(*self.witness, {1, 0, 0}, 1e-10);
	EXPECT_TRUE(dominates_cp(Dist({0.3, 0.7}), Dist({0.2, 0.8})).holds);

	// The ≺_c-projection point of the sparse extreme is reachable by convolution
	// but its quotient fails the small-step criterion.
	const double e = 0.1;
	const Dist pc({1 - 2 * e * (1 - e), e * (1 - e), e * (1 - e)});
	const Dist x = sparse_extreme(3, e);
	const auto c = dominates_c(pc, x);
	ASSERT_TRUE(c.holds);
	expect_dist(*c.witness, {0.9, 0.0, 0.1}, 1e-10);
	const auto cp = dominates_cp(pc, x);
	EXPECT_FALSE(cp.holds);
	EXPECT_LT(cp.max_violation, -1e-3);
}

TEST(EtaBar, Examples)
{
	EXPECT_NEAR(eta_bar(3, 0.1), 0.18, 1e-12);
	for (double e : {0.01, 0.2, 0.4})
		EXPECT_NEAR(eta_bar(2, e), e, 0);
	EXPECT_NEAR(eta_bar(5, 0.001), 0.004, 0.004 * 0.05);
	for (double e : {0.01, 0.05, 0.1, 0.3, 0.6})
		EXPECT_NEAR(eta_bar(3, e), 2 * e * (1 - e), 1e-10);
	EXPECT_EQ(code_of([] { eta_bar(3, 0.7); }), Errc::invalid_argument);
	EXPECT_EQ(code_of([] { eta_bar(3, 0); }), Errc::invalid_argument);
}

TEST(EtaBar, SpikeIsConvolutionDominated)
{
	for (unsigned a : {3u, 5u, 7u})
		for (double e : {0.01, 0.05, 0.1, 0.2}) {
			const Dist s = make_spike(a, 0, eta_bar(a, e));
			EXPECT_TRUE(dominates_c(s, sparse_extreme(a, e)).holds) << a << " " << e;
		}
}

TEST(Eta, Examples)
{
	for (double e : {0.01, 0.1, 0.3})
		EXPECT_EQ(eta(2, e), e);
	EXPECT_NEAR(eta(3, 1e-3), 2e-3, 2e-3 * 0.05);
	EXPECT_NEAR(eta(5, 1e-3), 4e-3, 4e-3 * 0.05);
	expect_dist(p_cp_spa(2, 0.05), {0.95, 0.05}, 1e-15);
	EXPECT_NEAR(p_cp_spa(3, 0.1)[1], eta(3, 0.1) / 2, 1e-15);
	EXPECT_EQ(code_of([] { eta(5, 0.9); }), Errc::invalid_argument);
}

TEST(Eta, AgreesWithShiftPathForTernary)
{
	for (int k = 1; k <= 40; ++k) {
		const double e = 0.6 * k / 41;
		const double closed = eta_tau_closed_form(e);
		EXPECT_NEAR(eta(3, e), closed, 1e-6) << e;
		EXPECT_NEAR(eta_tau_bisection(3, e), closed, 1e-8) << e;
	}
	EXPECT_EQ(code_of([] { eta_tau_bisection(5, 0.1); }), Errc::unsupported_alphabet);
}

TEST(Eta, BoundsAndOrdering)
{
	for (unsigned a : {3u, 5u, 7u, 11u})
		for (int k = 1; k <= 30; ++k) {
			const double e = 0.45 * (a - 1.0) / a * k / 31;
			const double m = eta(a, e);
			EXPECT_LE(m, (a - 1) * e + 1e-12) << a << " " << e;
			// the ≺_cp projection sits at least as far from the origin as the ≺_c one
			EXPECT_GE(m, eta_bar(a, e) - 1e-9) << a << " " << e;
			EXPECT_TRUE(dominates_cp(make_spike(a, 0, m + 1e-9), sparse_extreme(a, e)).holds);
		}
}

TEST(TauPath, TernaryPathEndsOnSpikeLine)
{
	const double e = 0.1;
	const Dist x = sparse_extreme(3, e);
	const Complex z = dft(x)[1];
	const double c = -std::arg(z) / std::sin(2 * std::numbers::pi / 3);
	const Dist t = tau_path(x, c);
	EXPECT_NEAR(t[1], t[2], 1e-12);
	EXPECT_NEAR(t[1] + t[2], eta_tau_closed_form(e), 1e-12);
	expect_dist(tau_path(x, 0), {0.9, 0.1, 0}, 1e-14);
}

TEST(Region, Examples)
{
	const Dist anchor({0.2, 0.4, 0.4});
	for (auto mode : {RegionMode::dominated_by_c, RegionMode::dominates_c}) {
		const auto g = dom_region_grid(anchor, mode, 30);
		EXPECT_EQ(g.size(), 31u * 32 / 2);
		for (const auto &pt : g) {
			if (std::abs(pt.q[0] - 0.2) < 1e-12 && std::abs(pt.q[1] - 0.4) < 1e-12) {
				EXPECT_TRUE(pt.member);
			}
		}
	}
	const auto below = dom_region_grid(Dist({0.1, 0.3, 0.6}), RegionMode::dominated_by_c, 30);
	for (const auto &pt : below) {
		if (std::abs(pt.q[0] - pt.q[1]) < 1e-12 && std::abs(pt.q[1] - pt.q[2]) < 1e-12) {
			EXPECT_TRUE(pt.member);
		}
	}
	EXPECT_EQ(code_of([] { dom_region_grid(Dist({0.5, 0.5}), RegionMode::dominates_c, 10); }),
	          Errc::unsupported_alphabet);
}

TEST(Region, EntropyRegionInsideConvolutionRegion)
{
	// {q : H(q) <= H([0.2,0.2,0.6])} lies inside {q : [0.2,0.4,0.4] ≺_c q}
	const auto h = dom_region_grid(Dist({0.2, 0.2, 0.6}), RegionMode::dominates_h, 90);
	const auto c = dom_region_grid(Dist({0.2, 0.4, 0.4}), RegionMode::dominates_c, 90);
	ASSERT_EQ(h.size(), c.size());
	std::size_t inside = 0;
	for (std::size_t k = 0; k < h.size(); ++k)
		if (h[k].member) {
			++inside;
			EXPECT_TRUE(c[k].member) << h[k].q[0] << "," << h[k].q[1] << "," << h[k].q[2];
		}
	EXPECT_GT(inside, 100u);
}

TEST(Ball, Examples)
{
	const Dist u = p_c_ball(3, 1.0, 60, 30);
	for (unsigned k = 0; k < 3; ++k)
		EXPECT_NEAR(u[k], 1.0 / 3, 1e-6);
	const Dist s = p_c_ball(3, 0.865, 200);
	EXPECT_NEAR(entropy(s) - 0.865, 0.095, 0.01);
	EXPECT_LE(sup_distance(s, Dist({0.2, 0.4, 0.4})), 0.03);
	const Dist near0 = p_c_ball(3, 0.05, 100);
	EXPECT_LT(entropy(near0), 0.35);
	EXPECT_EQ(code_of([] { p_c_ball(3, 0.5, 10); }), Errc::invalid_argument);
	EXPECT_EQ(code_of([] { p_c_ball(5, 0.5, 100); }), Errc::unsupported_alphabet);
}

TEST(Ball, ResultIsDominatedByEveryBallPoint)
{
	const Dist s = p_c_ball(3, 0.7, 120);
	for (const Dist &q : entropy_ball_points(0.7, 120, 40)) {
		const auto m = detail::quotient_min_coefficient(dft(s), dft(q));
		ASSERT_TRUE(m.has_value());
		EXPECT_GE(*m, -1e-9);
	}
}

TEST(BinaryEntropyInverse, Examples)
{
	expect_dist(binary_dist_with_entropy(1, 0), {0.5, 0.5}, 1e-9);
	expect_dist(binary_dist_with_entropy(1, 1), {0.5, 0.5}, 1e-9);
	expect_dist(binary_dist_with_entropy(0, 0), {1, 0}, 0);
	expect_dist(binary_dist_with_entropy(0.5, 0), {0.89, 0.11}, 1e-4);
	const Dist q = binary_dist_with_entropy(0.3, 1);
	EXPECT_LT(q[0], 0.5);
	EXPECT_NEAR(binary_entropy(q[0]), 0.3, 1e-10);
}

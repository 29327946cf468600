#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "error.hpp"

namespace upc {

using Complex = std::complex<double>;

// Tolerances shared by every quotient-based criterion.
inline constexpr double kNonnegTol = 1e-9;
inline constexpr double kImagTol = 1e-9;
inline constexpr double kSpectrumZero = 1e-12;
inline constexpr double kBisectTol = 1e-12;

constexpr bool is_prime(unsigned a)
{
	if (a < 2)
		return false;
	for (unsigned d = 2; d * d <= a; ++d)
		if (a % d == 0)
			return false;
	return true;
}

/// Probability measure on Z_a, a prime.
class Dist
{
public:
	Dist() = default;
	explicit Dist(std::vector<double> probs) : probs_(std::move(probs))
	{
		if (!is_prime(static_cast<unsigned>(probs_.size())))
			fail(Errc::invalid_argument, "alphabet size must be a prime >= 2");
		double sum = 0;
		for (double &v : probs_) {
			if (!(v >= -1e-12))
				fail(Errc::invalid_argument, "negative or NaN probability");
			v = std::max(v, 0.0);
			sum += v;
		}
		if (std::abs(sum - 1) > 1e-9)
			fail(Errc::invalid_argument, "probabilities must sum to 1");
		for (double &v : probs_)
			v /= sum;
	}
	Dist(std::initializer_list<double> probs) : Dist(std::vector<double>(probs)) {}

	static Dist uniform(unsigned a) { return Dist(std::vector<double>(a, 1.0 / a)); }
	static Dist point(unsigned a, unsigned k)
	{
		std::vector<double> v(a, 0.0);
		v.at(k) = 1;
		return Dist(std::move(v));
	}

	unsigned a() const { return static_cast<unsigned>(probs_.size()); }
	double operator[](std::size_t k) const { return probs_[k]; }
	std::span<const double> probs() const { return probs_; }

	friend bool operator==(const Dist &, const Dist &) = default;

private:
	std::vector<double> probs_;
};

inline double sup_distance(const Dist &p, const Dist &q)
{
	require(p.a() == q.a(), "alphabet mismatch");
	double d = 0;
	for (unsigned k = 0; k < p.a(); ++k)
		d = std::max(d, std::abs(p[k] - q[k]));
	return d;
}

struct Spectrum
{
	std::vector<Complex> values;
	unsigned a() const { return static_cast<unsigned>(values.size()); }
	Complex operator[](std::size_t w) const { return values[w]; }
};

inline Complex unit_root(unsigned a, long long k)
{
	const double angle = 2 * std::numbers::pi * static_cast<double>(k % static_cast<long long>(a)) / a;
	return {std::cos(angle), std::sin(angle)};
}

inline Spectrum dft(std::span<const double> p)
{
	const unsigned a = static_cast<unsigned>(p.size());
	Spectrum s{std::vector<Complex>(a)};
	for (unsigned w = 0; w < a; ++w) {
		Complex acc = 0;
		for (unsigned k = 0; k < a; ++k)
			acc += p[k] * unit_root(a, -static_cast<long long>(k) * w);
		s.values[w] = acc;
	}
	return s;
}

inline Spectrum dft(const Dist &p) { return dft(p.probs()); }

/// Inverse transform with the 1/a normalization.
inline std::vector<Complex> idft(std::span<const Complex> s)
{
	const unsigned a = static_cast<unsigned>(s.size());
	std::vector<Complex> out(a);
	for (unsigned k = 0; k < a; ++k) {
		Complex acc = 0;
		for (unsigned w = 0; w < a; ++w)
			acc += s[w] * unit_root(a, static_cast<long long>(k) * w);
		out[k] = acc / static_cast<double>(a);
	}
	return out;
}

inline std::vector<Complex> idft(const Spectrum &s) { return idft(std::span<const Complex>(s.values)); }

inline double entropy(const Dist &p, double base)
{
	if (!(base > 1))
		fail(Errc::invalid_argument, "entropy base must exceed 1");
	double h = 0;
	for (double v : p.probs())
		if (v > 0)
			h -= v * std::log(v);
	return std::max(h, 0.0) / std::log(base);
}

/// Entropy in base a (the alphabet size).
inline double entropy(const Dist &p) { return entropy(p, p.a()); }

inline double binary_entropy(double theta)
{
	if (theta <= 0 || theta >= 1)
		return 0;
	return -(theta * std::log2(theta) + (1 - theta) * std::log2(1 - theta));
}

inline Dist circular_convolve(const Dist &p, const Dist &q)
{
	require(p.a() == q.a(), "alphabet mismatch");
	const unsigned a = p.a();
	std::vector<double> r(a, 0.0);
	for (unsigned k = 0; k < a; ++k)
		for (unsigned v = 0; v < a; ++v)
			r[k] += p[(k + a - v) % a] * q[v];
	return Dist(std::move(r));
}

/// Spike centered at k: mass 1-eta on k and eta/(a-1) on every other symbol.
inline Dist make_spike(unsigned a, unsigned k, double non_special_mass)
{
	if (!is_prime(a) || k >= a)
		fail(Errc::invalid_argument, "bad alphabet or center");
	const double limit = (a - 1.0) / a;
	if (!(non_special_mass >= 0) || non_special_mass > limit + 1e-15)
		fail(Errc::invalid_argument, "spike mass outside [0, (a-1)/a]");
	std::vector<double> v(a, non_special_mass / (a - 1));
	v[k] = 1 - non_special_mass;
	return Dist(std::move(v));
}

/// Points of the line (1-eta, eta/(a-1), ...) past the uniform point, eta in [0, 1].
inline Dist spike_line_point(unsigned a, double eta)
{
	require(eta >= 0 && eta <= 1, "spike line parameter outside [0, 1]");
	std::vector<double> v(a, eta / (a - 1));
	v[0] = 1 - eta;
	return Dist(std::move(v));
}

struct OrderWitness
{
	bool holds = false;
	std::optional<Dist> witness;
	double max_violation = 0;
};

namespace detail {

inline std::vector<Complex> spectral_quotient(const Dist &num, const Dist &den)
{
	require(num.a() == den.a(), "alphabet mismatch");
	const Spectrum fn = dft(num), fd = dft(den);
	std::vector<Complex> q(num.a());
	for (unsigned w = 0; w < num.a(); ++w) {
		if (std::abs(fd[w]) <= kSpectrumZero)
			fail(Errc::indeterminate_spectrum, "right operand has a vanishing Fourier coefficient");
		q[w] = fn[w] / fd[w];
	}
	return idft(q);
}

// Checks coefficients for realness and nonnegativity; fills the witness when they pass.
inline OrderWitness classify_quotient(const std::vector<Complex> &c)
{
	OrderWitness out;
	double min_re = 0, max_im = 0;
	for (const Complex &v : c) {
		min_re = std::min(min_re, v.real());
		max_im = std::max(max_im, std::abs(v.imag()));
	}
	out.holds = max_im <= kImagTol && min_re >= -kNonnegTol;
	if (out.holds) {
		std::vector<double> w(c.size());
		for (std::size_t k = 0; k < c.size(); ++k)
			w[k] = std::max(c[k].real(), 0.0);
		const double sum = std::accumulate(w.begin(), w.end(), 0.0);
		for (double &v : w)
			v /= sum;
		out.witness = Dist(std::move(w));
	} else {
		out.max_violation = min_re;
	}
	return out;
}

// Minimum real coefficient of F^{-1}(F(num)/F(den)), tolerating shared spectral zeros.
// Returns nullopt when den vanishes where num does not.
inline std::optional<double> quotient_min_coefficient(const Spectrum &fn, const Spectrum &fd)
{
	const unsigned a = fn.a();
	std::vector<Complex> q(a);
	for (unsigned w = 0; w < a; ++w) {
		if (std::abs(fd[w]) <= kSpectrumZero) {
			if (std::abs(fn[w]) > 1e-9)
				return std::nullopt;
			q[w] = 0;
		} else {
			q[w] = fn[w] / fd[w];
		}
	}
	const auto c = idft(q);
	double m = c[0].real();
	for (const Complex &v : c)
		m = std::min(m, v.real());
	return m;
}

} // namespace detail

/// p1 ≺_c p2: p1 = c ⋆ p2 for some distribution c (p1 is noisier).
inline OrderWitness dominates_c(const Dist &p1, const Dist &p2)
{
	return detail::classify_quotient(detail::spectral_quotient(p1, p2));
}

/// p1 ≺_d p2, via majorization of sorted prefix sums.
inline bool dominates_d(const Dist &p1, const Dist &p2)
{
	require(p1.a() == p2.a(), "alphabet mismatch");
	std::vector<double> s1(p1.probs().begin(), p1.probs().end());
	std::vector<double> s2(p2.probs().begin(), p2.probs().end());
	std::sort(s1.rbegin(), s1.rend());
	std::sort(s2.rbegin(), s2.rend());
	double c1 = 0, c2 = 0;
	for (std::size_t k = 0; k < s1.size(); ++k) {
		c1 += s1[k];
		c2 += s2[k];
		if (c1 > c2 + 1e-9)
			return false;
	}
	return true;
}

struct DivisibilityReport
{
	bool divisible = false;
	std::vector<Complex> y;
};

/// Small-step criterion: y = F^{-1}(log|z| + i arg z) must be real and
/// nonnegative off the origin. Principal branch for arg.
inline DivisibilityReport is_infinitely_divisible(const Dist &nu)
{
	const Spectrum z = dft(nu);
	std::vector<Complex> logz(nu.a());
	for (unsigned w = 0; w < nu.a(); ++w) {
		if (std::abs(z[w]) <= kSpectrumZero)
			fail(Errc::not_divisible, "vanishing Fourier coefficient, logarithm undefined");
		logz[w] = std::log(z[w]);
	}
	DivisibilityReport r;
	r.y = idft(logz);
	r.divisible = true;
	for (unsigned k = 0; k < nu.a(); ++k) {
		if (std::abs(r.y[k].imag()) > kImagTol)
			r.divisible = false;
		if (k > 0 && r.y[k].real() < -kNonnegTol)
			r.divisible = false;
	}
	return r;
}

/// p1 ≺_cp p2: p1 = p2 ⋆ nu with nu infinitely divisible.
inline OrderWitness dominates_cp(const Dist &p1, const Dist &p2)
{
	OrderWitness w = detail::classify_quotient(detail::spectral_quotient(p1, p2));
	if (!w.holds)
		return w;
	const DivisibilityReport r = is_infinitely_divisible(*w.witness);
	if (!r.divisible) {
		w.holds = false;
		double m = 0;
		for (unsigned k = 1; k < r.y.size(); ++k)
			m = std::min(m, r.y[k].real());
		w.max_violation = m;
	}
	return w;
}

inline Dist sparse_extreme(unsigned a, double epsilon)
{
	std::vector<double> v(a, 0.0);
	v[0] = 1 - epsilon;
	v[1] = epsilon;
	return Dist(std::move(v));
}

namespace detail {

inline void check_epsilon(unsigned a, double epsilon)
{
	if (!is_prime(a))
		fail(Errc::invalid_argument, "alphabet size must be prime");
	if (!(epsilon > 0 && epsilon < (a - 1.0) / a))
		fail(Errc::invalid_argument, "epsilon outside (0, (a-1)/a)");
}

} // namespace detail

/// Non-special mass of the minimum-entropy spike in the cyclic hull of
/// (1-eps, eps, 0, ..., 0). For a = 3 this is 2 eps (1 - eps).
inline double eta_bar(unsigned a, double epsilon)
{
	detail::check_epsilon(a, epsilon);
	if (a == 2)
		return epsilon;
	// Hull weights w_s on shifts; coordinate k is (1-eps) w_k + eps w_{k-1}.
	// Equal non-special coordinates e make every w_k affine in (w_0, e).
	const double e1 = 1 - epsilon;
	std::vector<double> alpha(a), beta(a);
	alpha[0] = 1;
	beta[0] = 0;
	for (unsigned k = 1; k < a; ++k) {
		alpha[k] = -epsilon * alpha[k - 1] / e1;
		beta[k] = (1 - epsilon * beta[k - 1]) / e1;
	}
	const double A = e1 + epsilon * alpha[a - 1];
	const double B = epsilon * beta[a - 1] + (a - 1);
	// e = (1 - A t)/B, w_k = g_k t + h_k.
	double lo = -INFINITY, hi = INFINITY;
	for (unsigned k = 0; k < a; ++k) {
		const double g = alpha[k] - beta[k] * A / B;
		const double h = beta[k] / B;
		if (std::abs(g) < 1e-300) {
			if (h < 0)
				fail(Errc::infeasible, "empty hull intersection");
			continue;
		}
		if (g > 0)
			lo = std::max(lo, -h / g);
		else
			hi = std::min(hi, -h / g);
	}
	if (lo > hi + 1e-15)
		fail(Errc::infeasible, "empty hull intersection");
	const double e = std::min((1 - A * lo) / B, (1 - A * hi) / B);
	return (a - 1) * e;
}

/// Non-special mass of p_cp(Spa(a, eps)): the smallest eta whose spike is
/// ≺_cp-below (1-eps, eps, 0, ..., 0), found by bisection on eta.
inline double eta(unsigned a, double epsilon)
{
	detail::check_epsilon(a, epsilon);
	if (a == 2)
		return epsilon;
	const Dist x = sparse_extreme(a, epsilon);
	auto feasible = [&](double m) {
		try {
			return dominates_cp(make_spike(a, 0, m), x).holds;
		} catch (const Error &) {
			return false;
		}
	};
	double lo = 0, hi = (a - 1.0) / a;
	while (hi - lo > kBisectTol) {
		const double mid = 0.5 * (lo + hi);
		(feasible(mid) ? hi : lo) = mid;
	}
	return hi;
}

/// Exponential convolution path exp(c(Π - I)) x, Π the one-step cyclic shift
/// (Π x)(k) = x(k+1).
inline Dist tau_path(const Dist &x, double c)
{
	const unsigned a = x.a();
	const Spectrum fx = dft(x);
	std::vector<Complex> s(a);
	for (unsigned w = 0; w < a; ++w)
		s[w] = fx[w] * std::exp(c * (unit_root(a, w) - 1.0));
	const auto t = idft(s);
	std::vector<double> v(a);
	for (unsigned k = 0; k < a; ++k)
		v[k] = std::max(t[k].real(), 0.0);
	const double sum = std::accumulate(v.begin(), v.end(), 0.0);
	for (double &e : v)
		e /= sum;
	return Dist(std::move(v));
}

/// Ternary path solve in closed form: the path is a spike exactly when its
/// first Fourier coefficient becomes real.
inline double eta_tau_closed_form(double epsilon)
{
	detail::check_epsilon(3, epsilon);
	const Complex z = dft(sparse_extreme(3, epsilon))[1];
	const double c = -std::arg(z) / std::sin(2 * std::numbers::pi / 3);
	const double f = std::abs(z) * std::exp(-1.5 * c);
	return (2.0 / 3.0) * (1 - f);
}

/// Ternary path solve by bisection on c for tau(c)_1 = tau(c)_2. The single
/// shift direction only equalizes all non-special coordinates when a = 3.
inline double eta_tau_bisection(unsigned a, double epsilon)
{
	detail::check_epsilon(a, epsilon);
	if (a == 2)
		return epsilon;
	if (a != 3)
		fail(Errc::unsupported_alphabet, "shift path reaches the spike line only for a = 3");
	const Dist x = sparse_extreme(3, epsilon);
	auto gap = [&](double c) {
		const Dist t = tau_path(x, c);
		return t[1] - t[2];
	};
	double lo = 0, hi = 1;
	while (gap(hi) > 0)
		hi *= 2;
	while (hi - lo > kBisectTol) {
		const double mid = 0.5 * (lo + hi);
		(gap(mid) > 0 ? lo : hi) = mid;
	}
	const Dist t = tau_path(x, hi);
	return t[1] + t[2];
}

inline Dist p_cp_spa(unsigned a, double epsilon) { return make_spike(a, 0, eta(a, epsilon)); }

enum class RegionMode {
	dominated_by_c, // q ≺_c p
	dominates_c,    // p ≺_c q, the set DOM_c(p)
	dominated_by_h, // q ≺_h p, H(q) >= H(p)
	dominates_h,    // p ≺_h q, H(q) <= H(p)
};

struct RegionPoint
{
	std::array<double, 3> q;
	bool member;
};

/// Barycentric grid over M(3) with per-point membership, ordered by (i, j).
inline std::vector<RegionPoint> dom_region_grid(const Dist &p, RegionMode mode, unsigned resolution)
{
	if (p.a() != 3)
		fail(Errc::unsupported_alphabet, "region grids need a = 3");
	require(resolution >= 2, "resolution must be >= 2");
	const Spectrum fp = dft(p);
	const double hp = entropy(p);
	std::vector<RegionPoint> out;
	for (unsigned i = 0; i <= resolution; ++i) {
		for (unsigned j = 0; i + j <= resolution; ++j) {
			const unsigned k = resolution - i - j;
			const double r = resolution;
			const Dist q({i / r, j / r, k / r});
			bool member = false;
			switch (mode) {
			case RegionMode::dominated_by_c: {
				const auto m = detail::quotient_min_coefficient(dft(q), fp);
				member = m && *m >= -kNonnegTol;
				break;
			}
			case RegionMode::dominates_c: {
				const auto m = detail::quotient_min_coefficient(fp, dft(q));
				member = m && *m >= -kNonnegTol;
				break;
			}
			case RegionMode::dominated_by_h:
				member = entropy(q) >= hp - 1e-12;
				break;
			case RegionMode::dominates_h:
				member = entropy(q) <= hp + 1e-12;
				break;
			}
			out.push_back({{q[0], q[1], q[2]}, member});
		}
	}
	return out;
}

/// Discretization of B_R = {q in M(3) : H(q) <= R}: boundary rays from the
/// uniform point plus an interior barycentric grid.
inline std::vector<Dist> entropy_ball_points(double R, unsigned boundary_points, unsigned interior_grid)
{
	std::vector<Dist> pts;
	const double u = 1.0 / 3;
	const double e1[3] = {1 / std::sqrt(2.0), -1 / std::sqrt(2.0), 0};
	const double e2[3] = {1 / std::sqrt(6.0), 1 / std::sqrt(6.0), -2 / std::sqrt(6.0)};
	auto at = [&](const double *d, double t) {
		return Dist({std::max(u + t * d[0], 0.0), std::max(u + t * d[1], 0.0), std::max(u + t * d[2], 0.0)});
	};
	for (unsigned b = 0; b < boundary_points; ++b) {
		const double th = 2 * std::numbers::pi * b / boundary_points;
		double d[3];
		for (int k = 0; k < 3; ++k)
			d[k] = std::cos(th) * e1[k] + std::sin(th) * e2[k];
		double tmax = INFINITY;
		for (int k = 0; k < 3; ++k)
			if (d[k] < 0)
				tmax = std::min(tmax, -u / d[k]);
		// entropy decreases along the ray; rays that never drop to R miss the ball
		if (entropy(at(d, tmax)) > R)
			continue;
		double lo = 0, hi = tmax;
		while (hi - lo > kBisectTol) {
			const double mid = 0.5 * (lo + hi);
			(entropy(at(d, mid)) > R ? lo : hi) = mid;
		}
		pts.push_back(at(d, hi));
	}
	for (unsigned i = 0; i <= interior_grid; ++i)
		for (unsigned j = 0; i + j <= interior_grid; ++j) {
			const double r = interior_grid;
			const Dist q({i / r, j / r, (interior_grid - i - j) / r});
			if (entropy(q) <= R)
				pts.push_back(q);
		}
	return pts;
}

/// Minimum-entropy point of the spike line (1-eta, eta/2, eta/2), eta in
/// [0, 1], that is ≺_c-dominated by every sampled point of B_R. The feasible
/// set is an interval around the uniform point; both ends are searched.
inline Dist p_c_ball(unsigned a, double R, unsigned boundary_points, unsigned interior_grid = 60)
{
	if (a != 3)
		fail(Errc::unsupported_alphabet, "entropy-ball projection is implemented for a = 3");
	require(R > 0 && R <= 1, "R outside (0, 1]");
	require(boundary_points >= 50, "need at least 50 boundary points");
	const auto pts = entropy_ball_points(R, boundary_points, interior_grid);
	std::vector<Spectrum> spectra;
	spectra.reserve(pts.size());
	for (const Dist &q : pts)
		spectra.push_back(dft(q));
	auto feasible = [&](double m) {
		const Spectrum fs = dft(spike_line_point(3, m));
		for (const Spectrum &fq : spectra) {
			const auto c = detail::quotient_min_coefficient(fs, fq);
			if (!c || *c < -kNonnegTol)
				return false;
		}
		return true;
	};
	const double mid_point = 2.0 / 3.0;
	if (!feasible(mid_point))
		fail(Errc::infeasible, "no spike dominates the discretized ball");
	double lo = 0, hi = mid_point;
	while (hi - lo > kBisectTol) {
		const double mid = 0.5 * (lo + hi);
		(feasible(mid) ? hi : lo) = mid;
	}
	const Dist lower = spike_line_point(3, hi);
	lo = mid_point;
	hi = 1;
	if (feasible(1))
		lo = 1;
	while (hi - lo > kBisectTol) {
		const double mid = 0.5 * (lo + hi);
		(feasible(mid) ? lo : hi) = mid;
	}
	const Dist upper = spike_line_point(3, lo);
	return entropy(lower) <= entropy(upper) ? lower : upper;
}

/// Binary distribution of entropy R (bits): side 0 puts the larger mass on 0.
inline Dist binary_dist_with_entropy(double R, int side)
{
	require(R >= 0 && R <= 1, "R outside [0, 1]");
	require(side == 0 || side == 1, "side must be 0 or 1");
	double lo = 0, hi = 0.5;
	while (hi - lo > kBisectTol) {
		const double mid = 0.5 * (lo + hi);
		(binary_entropy(mid) < R ? lo : hi) = mid;
	}
	const double theta = R >= 1 ? 0.5 : (R <= 0 ? 0.0 : 0.5 * (lo + hi));
	return side == 0 ? Dist({1 - theta, theta}) : Dist({theta, 1 - theta});
}

} // namespace upc

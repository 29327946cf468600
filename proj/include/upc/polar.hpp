#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "error.hpp"
#include "measures.hpp"

namespace upc {

using Symbol = std::uint16_t;

constexpr bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Block of n symbols over Z_a, n a power of two.
class SymbolBlock
{
public:
	SymbolBlock() = default;
	SymbolBlock(unsigned a, std::vector<Symbol> symbols) : a_(a), symbols_(std::move(symbols))
	{
		if (!is_prime(a))
			fail(Errc::invalid_argument, "alphabet size must be prime");
		if (!is_pow2(symbols_.size()))
			fail(Errc::invalid_argument, "block length must be a power of 2");
		for (Symbol s : symbols_)
			if (s >= a)
				fail(Errc::invalid_argument, "symbol out of range");
	}
	static SymbolBlock zeros(unsigned a, std::size_t n) { return SymbolBlock(a, std::vector<Symbol>(n, 0)); }

	unsigned a() const { return a_; }
	std::size_t n() const { return symbols_.size(); }
	Symbol operator[](std::size_t i) const { return symbols_[i]; }
	Symbol &operator[](std::size_t i) { return symbols_[i]; }
	std::span<const Symbol> symbols() const { return symbols_; }
	std::span<Symbol> symbols() { return symbols_; }

	friend bool operator==(const SymbolBlock &, const SymbolBlock &) = default;

private:
	unsigned a_ = 2;
	std::vector<Symbol> symbols_;
};

/// u = x G_n in place, G_n the log2(n)-fold Kronecker power of [[1,0],[1,1]].
/// Natural index order, no bit reversal.
inline void polar_transform_inplace(std::span<Symbol> x, unsigned a)
{
	const std::size_t n = x.size();
	require(is_pow2(n), "block length must be a power of 2");
	for (std::size_t h = 1; h < n; h *= 2)
		for (std::size_t i = 0; i < n; i += 2 * h)
			for (std::size_t j = i; j < i + h; ++j)
				x[j] = static_cast<Symbol>((x[j] + x[j + h]) % a);
}

inline void polar_inverse_inplace(std::span<Symbol> u, unsigned a)
{
	const std::size_t n = u.size();
	require(is_pow2(n), "block length must be a power of 2");
	for (std::size_t h = 1; h < n; h *= 2)
		for (std::size_t i = 0; i < n; i += 2 * h)
			for (std::size_t j = i; j < i + h; ++j)
				u[j] = static_cast<Symbol>((u[j] + a - u[j + h]) % a);
}

inline SymbolBlock polar_transform(SymbolBlock x)
{
	polar_transform_inplace(x.symbols(), x.a());
	return x;
}

inline SymbolBlock polar_inverse(SymbolBlock u)
{
	polar_inverse_inplace(u.symbols(), u.a());
	return u;
}

/// Conditional law of one transformed symbol.
struct ScMessage
{
	std::vector<double> probs;
	unsigned a() const { return static_cast<unsigned>(probs.size()); }
	Symbol argmax() const
	{
		Symbol best = 0;
		for (unsigned x = 1; x < probs.size(); ++x)
			if (probs[x] > probs[best])
				best = static_cast<Symbol>(x);
		return best;
	}
};

/// Scratch space for successive-cancellation sweeps: one belief buffer per
/// recursion depth. One workspace per thread.
class ScWorkspace
{
public:
	ScWorkspace(unsigned a, std::size_t n) : a_(a), n_(n)
	{
		require(is_pow2(n), "block length must be a power of 2");
		require(a >= 2, "alphabet size must be >= 2");
		for (std::size_t len = n; len >= 1; len /= 2)
			beliefs_.emplace_back(len * a);
	}

	unsigned a() const { return a_; }
	std::size_t n() const { return n_; }

	/// Left-to-right sweep over u_0..u_{n-1} for X^n i.i.d. prior. For each
	/// index, leaf(i, message) returns the symbol to fix, or nullopt to stop.
	/// On completion x holds the input-side block consistent with the fixed u.
	template <class Leaf>
	void sweep(const Dist &prior, std::span<Symbol> x, Leaf &&leaf)
	{
		require(prior.a() == a_, "alphabet mismatch");
		require(x.size() == n_, "block length mismatch");
		double *top = beliefs_[0].data();
		for (std::size_t j = 0; j < n_; ++j)
			for (unsigned s = 0; s < a_; ++s)
				top[j * a_ + s] = prior[s];
		leaf_index_ = 0;
		stopped_ = false;
		descend(0, x, leaf);
	}

	bool stopped() const { return stopped_; }

private:
	void normalize(double *v)
	{
		double sum = 0;
		for (unsigned s = 0; s < a_; ++s)
			sum += v[s];
		if (sum > 0 && std::isfinite(sum)) {
			for (unsigned s = 0; s < a_; ++s)
				v[s] /= sum;
		} else {
			for (unsigned s = 0; s < a_; ++s)
				v[s] = 1.0 / a_;
		}
	}

	template <class Leaf>
	void descend(std::size_t depth, std::span<Symbol> x, Leaf &leaf)
	{
		const std::size_t len = x.size();
		double *L = beliefs_[depth].data();
		if (len == 1) {
			normalize(L);
			const std::optional<Symbol> u = leaf(leaf_index_++, std::span<const double>(L, a_));
			if (!u) {
				stopped_ = true;
				return;
			}
			x[0] = *u;
			return;
		}
		const std::size_t h = len / 2;
		double *C = beliefs_[depth + 1].data();
		// check branch: law of A_j + B_j
		for (std::size_t j = 0; j < h; ++j) {
			const double *la = L + j * a_;
			const double *lb = L + (j + h) * a_;
			double *out = C + j * a_;
			for (unsigned s = 0; s < a_; ++s) {
				double acc = 0;
				for (unsigned b = 0; b < a_; ++b)
					acc += la[(s + a_ - b) % a_] * lb[b];
				out[s] = acc;
			}
			normalize(out);
		}
		descend(depth + 1, x.first(h), leaf);
		if (stopped_)
			return;
		// variable branch: law of B_j given A_j + B_j = s_j
		for (std::size_t j = 0; j < h; ++j) {
			const double *la = L + j * a_;
			const double *lb = L + (j + h) * a_;
			double *out = C + j * a_;
			const unsigned s = x[j];
			for (unsigned b = 0; b < a_; ++b)
				out[b] = la[(s + a_ - b) % a_] * lb[b];
			normalize(out);
		}
		descend(depth + 1, x.subspan(h, h), leaf);
		if (stopped_)
			return;
		for (std::size_t j = 0; j < h; ++j)
			x[j] = static_cast<Symbol>((x[j] + a_ - x[j + h]) % a_);
	}

	unsigned a_;
	std::size_t n_;
	std::vector<std::vector<double>> beliefs_;
	std::size_t leaf_index_ = 0;
	bool stopped_ = false;
};

/// P(U_i = . | U^{i-1} = decided) for X^n i.i.d. p; i is zero-based.
inline ScMessage sc_conditional(const Dist &p, std::span<const Symbol> decided, std::size_t i, ScWorkspace &ws)
{
	if (i >= ws.n())
		fail(Errc::invalid_argument, "index out of range");
	require(decided.size() == i, "decided prefix must have length i");
	ScMessage msg;
	std::vector<Symbol> x(ws.n(), 0);
	ws.sweep(p, x, [&](std::size_t j, std::span<const double> m) -> std::optional<Symbol> {
		if (j < i)
			return decided[j];
		msg.probs.assign(m.begin(), m.end());
		return std::nullopt;
	});
	return msg;
}

inline constexpr double kOracleCapLog2 = 20;

inline void check_oracle_cap(unsigned a, std::size_t n)
{
	if (static_cast<double>(n) * std::log2(static_cast<double>(a)) > kOracleCapLog2 + 1e-9)
		fail(Errc::resource_limit, "a^n exceeds the exhaustive-oracle cap 2^20");
}

/// Exact law of U^n = X^n G_n by enumeration of all a^n source words.
/// Words are indexed with u_0 as the most significant base-a digit.
class JointLaw
{
public:
	JointLaw(const Dist &p, std::size_t n) : a_(p.a()), n_(n)
	{
		require(is_pow2(n), "block length must be a power of 2");
		check_oracle_cap(a_, n);
		std::size_t total = 1;
		for (std::size_t k = 0; k < n; ++k)
			total *= a_;
		law_.assign(total, 0.0);
		std::vector<Symbol> x(n, 0), u(n);
		for (std::size_t idx = 0; idx < total; ++idx) {
			double prob = 1;
			for (std::size_t k = 0; k < n; ++k)
				prob *= p[x[k]];
			if (prob > 0) {
				u = x;
				polar_transform_inplace(u, a_);
				std::size_t code = 0;
				for (std::size_t k = 0; k < n; ++k)
					code = code * a_ + u[k];
				law_[code] += prob;
			}
			for (std::size_t k = n; k-- > 0;) {
				if (++x[k] < a_)
					break;
				x[k] = 0;
			}
		}
	}

	unsigned a() const { return a_; }
	std::size_t n() const { return n_; }

	/// Law of U^len, indexed like the full law truncated to len digits.
	std::vector<double> prefix(std::size_t len) const
	{
		require(len <= n_, "prefix longer than block");
		std::size_t block = 1;
		for (std::size_t k = len; k < n_; ++k)
			block *= a_;
		std::vector<double> out(law_.size() / block, 0.0);
		for (std::size_t c = 0; c < law_.size(); ++c)
			out[c / block] += law_[c];
		return out;
	}

	/// P(U_i = . | u^{i-1}); empty when the prefix has zero probability.
	std::optional<std::vector<double>> conditional(std::span<const Symbol> prefix_symbols) const
	{
		const std::size_t i = prefix_symbols.size();
		require(i < n_, "prefix too long");
		const auto hi = prefix(i + 1);
		std::size_t code = 0;
		for (Symbol s : prefix_symbols)
			code = code * a_ + s;
		double total = 0;
		std::vector<double> out(a_);
		for (unsigned x = 0; x < a_; ++x) {
			out[x] = hi[code * a_ + x];
			total += out[x];
		}
		if (total <= 0)
			return std::nullopt;
		for (double &v : out)
			v /= total;
		return out;
	}

	/// H(U_i | U^{i-1}) in base a for every i.
	std::vector<double> conditional_entropies() const
	{
		std::vector<double> joint_h(n_ + 1, 0.0);
		std::vector<double> level = law_;
		for (std::size_t len = n_;; --len) {
			double h = 0;
			for (double v : level)
				if (v > 0)
					h -= v * std::log(v);
			joint_h[len] = h / std::log(static_cast<double>(a_));
			if (len == 0)
				break;
			std::vector<double> next(level.size() / a_, 0.0);
			for (std::size_t c = 0; c < level.size(); ++c)
				next[c / a_] += level[c];
			level.swap(next);
		}
		std::vector<double> out(n_);
		for (std::size_t i = 0; i < n_; ++i)
			out[i] = std::max(joint_h[i + 1] - joint_h[i], 0.0);
		return out;
	}

private:
	unsigned a_;
	std::size_t n_;
	std::vector<double> law_;
};

inline std::vector<double> exact_joint_conditionals(const Dist &p, std::size_t n)
{
	return JointLaw(p, n).conditional_entropies();
}

} // namespace upc

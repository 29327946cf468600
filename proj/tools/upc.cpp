#include <CLI11.hpp>
#include <json.hpp>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <upc/upc.hpp>

using namespace upc;

namespace {

enum Exit { ok = 0, other = 1, config = 2, format = 3, resource = 4, io = 5 };

struct Config
{
	unsigned a = 2;
	std::size_t n = 1024;
	double epsilon = 0.05;
	double rate = 0.5;
	double delta = 0.01;
	std::string method = "pcp";
	std::string variant = "B";
	std::uint64_t seed = 0;
	std::size_t trials = 100;
	std::uint64_t samples = 2000;
	double guard = 2;
	std::string in, out, spec;
	unsigned level = 1;
	unsigned grid = 50;
	std::string dist, p, q, mode = "exact", region = "dominates_c", kind = "universal", format = "text";
	unsigned threads = default_threads();
	bool seed_given = false;
};

StoragePlan plan_of(const Config &c)
{
	return {.samples = c.samples, .seed = c.seed, .guard = c.guard, .threads = c.threads};
}

Dist parse_dist(const std::string &s)
{
	std::vector<double> v;
	std::stringstream ss(s);
	std::string tok;
	while (std::getline(ss, tok, ',')) {
		try {
			v.push_back(std::stod(tok));
		} catch (const std::exception &) {
			fail(Errc::invalid_argument, "bad distribution entry '" + tok + "'");
		}
	}
	return Dist(v);
}

std::vector<std::uint8_t> read_file(const std::string &path)
{
	std::ifstream f(path, std::ios::binary);
	if (!f)
		fail(Errc::io, "cannot open " + path);
	return {std::istreambuf_iterator<char>(f), {}};
}

void write_file(const std::string &path, std::span<const std::uint8_t> bytes)
{
	std::ofstream f(path, std::ios::binary);
	if (!f)
		fail(Errc::io, "cannot write " + path);
	f.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
	if (!f)
		fail(Errc::io, "short write to " + path);
}

// whitespace-separated symbols; lines starting with '#' are skipped
std::vector<Symbol> read_symbols(const std::string &path, unsigned a)
{
	const auto bytes = read_file(path);
	const std::string text(bytes.begin(), bytes.end());
	std::vector<Symbol> out;
	std::size_t pos = 0;
	while (pos < text.size()) {
		std::size_t end = text.find('\n', pos);
		if (end == std::string::npos)
			end = text.size();
		if (text[pos] != '#') {
			std::size_t k = pos;
			while (k < end) {
				if (std::isspace(static_cast<unsigned char>(text[k]))) {
					++k;
					continue;
				}
				std::size_t used = 0;
				long v = -1;
				try {
					v = std::stol(text.substr(k, end - k), &used);
				} catch (const std::exception &) {
					throw FormatError(k, "not a symbol");
				}
				if (v < 0 || v >= static_cast<long>(a))
					throw FormatError(k, "symbol out of range");
				out.push_back(static_cast<Symbol>(v));
				k += used;
			}
		}
		pos = end + 1;
	}
	return out;
}

void write_symbols(std::ostream &os, std::span<const Symbol> s)
{
	for (std::size_t k = 0; k < s.size(); ++k)
		os << s[k] << (k + 1 == s.size() || (k + 1) % 32 == 0 ? '\n' : ' ');
}

struct Output
{
	std::ofstream file;
	std::ostream *os = &std::cout;
	explicit Output(const std::string &path)
	{
		if (path.empty() || path == "-")
			return;
		file.open(path);
		if (!file)
			fail(Errc::io, "cannot write " + path);
		os = &file;
	}
};

// Stream wrapper around PLRC blocks: "PLRS" 0x01, u64 bit length, u32 n, u32 block count,
// then per block u32 byte length and the PLRC bytes.
std::vector<std::uint8_t> wrap_blocks(std::uint64_t bits, std::uint32_t n,
                                      const std::vector<std::vector<std::uint8_t>> &blocks)
{
	ByteWriter w;
	w.raw("PLRS");
	w.u8(0x01);
	w.u64(bits);
	w.u32(n);
	w.u32(static_cast<std::uint32_t>(blocks.size()));
	for (const auto &b : blocks) {
		w.u32(static_cast<std::uint32_t>(b.size()));
		w.bytes(b);
	}
	return w.take();
}

int cmd_compress(const Config &c, const Params &params)
{
	require(is_pow2(c.n), "block length must be a power of 2");
	const auto bytes = read_file(c.in);
	const std::uint64_t bits = 8 * static_cast<std::uint64_t>(bytes.size());
	const StorageSet S = storage_for(binary_dist_with_entropy(c.rate, 0), c.n, c.delta, plan_of(c));
	std::vector<std::vector<std::uint8_t>> blocks;
	std::size_t stored = 0;
	for (std::uint64_t start = 0; start < bits || (bits == 0 && blocks.empty()); start += c.n) {
		std::vector<Symbol> x(c.n, 0);
		for (std::size_t k = 0; k < c.n && start + k < bits; ++k)
			x[k] = (bytes[(start + k) / 8] >> ((start + k) % 8)) & 1;
		const auto b = universal_compress(SymbolBlock(2, std::move(x)), c.rate, S);
		stored += b.stored_count();
		blocks.push_back(encode_block(b));
	}
	write_file(c.out, wrap_blocks(bits, static_cast<std::uint32_t>(c.n), blocks));
	write_params(std::cout, params);
	std::printf("blocks=%zu bits=%llu storage=%zu rate=%.6f\n", blocks.size(), static_cast<unsigned long long>(bits),
	            S.size(), static_cast<double>(stored) / (blocks.size() * c.n));
	return ok;
}

int cmd_decompress(const Config &c, const Params &params)
{
	const auto bytes = read_file(c.in);
	ByteReader r(bytes);
	r.expect("PLRS", "magic");
	std::size_t at = r.offset();
	if (r.u8("version") != 0x01)
		throw FormatError(at, "unsupported version");
	const std::uint64_t bits = r.u64("bit length");
	at = r.offset();
	const std::uint32_t n = r.u32("block length");
	if (!is_pow2(n))
		throw FormatError(at, "block length is not a power of 2");
	at = r.offset();
	const std::uint32_t count = r.u32("block count");
	if (count != std::max<std::uint64_t>(1, (bits + n - 1) / n))
		throw FormatError(at, "block count does not match bit length");
	std::vector<std::uint8_t> out((bits + 7) / 8, 0);
	std::size_t ties = 0;
	for (std::uint32_t k = 0; k < count; ++k) {
		const std::uint32_t len = r.u32("block size");
		at = r.offset();
		const auto blk = r.bytes(len, "block");
		CompressedBlock b;
		try {
			b = decode_block(blk);
		} catch (const FormatError &e) {
			throw FormatError(at + e.offset(), "block " + std::to_string(k) + " is malformed");
		}
		if (b.n != n)
			throw FormatError(at, "block length differs from stream header");
		const auto res = universal_decompress(b, c.seed + k);
		ties += res.tied_models > 1;
		const std::uint64_t start = std::uint64_t{k} * n;
		for (std::size_t j = 0; j < n && start + j < bits; ++j)
			if (res.decoded.x[j])
				out[(start + j) / 8] |= static_cast<std::uint8_t>(1u << ((start + j) % 8));
	}
	if (r.remaining() != 0)
		throw FormatError(r.offset(), "trailing bytes");
	write_file(c.out, out);
	write_params(std::cout, params);
	std::printf("blocks=%u bits=%llu model_ties=%zu\n", count, static_cast<unsigned long long>(bits), ties);
	return ok;
}

SketchMethod method_of(const Config &c)
{
	const auto m = parse_method(c.method);
	if (!m)
		fail(Errc::invalid_argument, "unknown method " + c.method);
	return *m;
}

void save_spec(const SketchSpec &s, const std::string &base)
{
	write_file(base + ".pset", encode_storage_set(s.storage));
	nlohmann::json j{{"a", s.a},         {"n", s.n},     {"epsilon", s.epsilon},
	                 {"delta", s.delta}, {"method", method_name(s.method)},
	                 {"eta", s.eta},     {"seed", s.seed}};
	std::ofstream f(base + ".json");
	if (!f)
		fail(Errc::io, "cannot write " + base + ".json");
	f << j.dump(2) << '\n';
}

SketchSpec load_spec(const std::string &base)
{
	const auto raw = read_file(base + ".json");
	nlohmann::json j;
	try {
		j = nlohmann::json::parse(raw.begin(), raw.end());
	} catch (const nlohmann::json::parse_error &e) {
		throw FormatError(e.byte, "sidecar is not JSON");
	}
	SketchSpec s;
	try {
		s.a = j.at("a").get<unsigned>();
		s.n = j.at("n").get<std::size_t>();
		s.epsilon = j.at("epsilon").get<double>();
		s.delta = j.at("delta").get<double>();
		const auto m = parse_method(j.at("method").get<std::string>());
		if (!m)
			throw FormatError(0, "unknown method in sidecar");
		s.method = *m;
		s.eta = j.at("eta").get<double>();
		s.seed = j.at("seed").get<std::uint64_t>();
	} catch (const nlohmann::json::exception &e) {
		throw FormatError(0, std::string("sidecar: ") + e.what());
	}
	s.storage = decode_storage_set(read_file(base + ".pset"));
	if (s.storage.a != s.a || s.storage.n != s.n)
		throw FormatError(0, "sidecar and storage set disagree on (a, n)");
	s.decode_dist = make_spike(s.a, 0, s.eta);
	return s;
}

int cmd_sketch(const Config &c, const Params &params)
{
	const SketchSpec s =
	    build_sketch_spec(c.a, c.epsilon, c.n, c.delta, method_of(c), plan_of(c), {.hull_grid = c.grid});
	if (!c.spec.empty())
		save_spec(s, c.spec);
	std::fprintf(stderr, "a=%u n=%zu eta=%.12g m=%zu\n", s.a, s.n, s.eta, s.m());
	if (c.in.empty())
		return ok;
	const auto x = read_symbols(c.in, s.a);
	if (x.size() != s.n)
		throw FormatError(0, "signal has " + std::to_string(x.size()) + " symbols, expected " + std::to_string(s.n));
	Output o(c.out);
	*o.os << "# params:";
	for (const auto &[k, v] : params)
		*o.os << ' ' << k << '=' << v;
	*o.os << '\n';
	write_symbols(*o.os, sketch(s, SymbolBlock(s.a, x)));
	return ok;
}

int cmd_recover(const Config &c, const Params &)
{
	if (c.spec.empty())
		fail(Errc::invalid_argument, "--spec is required");
	const SketchSpec s = load_spec(c.spec);
	const auto y = read_symbols(c.in, s.a);
	if (y.size() != s.m())
		throw FormatError(0, "measurement count " + std::to_string(y.size()) + " differs from " +
		                         std::to_string(s.m()));
	Output o(c.out);
	const auto x = recover(s, y);
	write_symbols(*o.os, x.symbols());
	return ok;
}

int cmd_storage_set(const Config &c, const Params &params)
{
	const Dist p = c.dist.empty() ? binary_dist_with_entropy(c.rate, 0) : parse_dist(c.dist);
	if ((c.mode == "mc" || c.mode == "auto") && !c.seed_given)
		fail(Errc::invalid_argument, "--seed is required for Monte Carlo storage sets");
	StorageSet S;
	if (c.mode == "exact")
		S = storage_set_exact(p, c.n, c.delta);
	else if (c.mode == "mc")
		S = storage_set_mc(p, c.n, c.delta, c.samples, c.seed, c.guard, c.threads);
	else if (c.mode == "bec")
		S = storage_set_bec(p, c.n, c.delta);
	else if (c.mode == "auto")
		S = storage_for(p, c.n, c.delta, plan_of(c));
	else
		fail(Errc::invalid_argument, "unknown mode " + c.mode);
	if (!c.spec.empty())
		write_file(c.spec, encode_storage_set(S));
	Output o(c.out);
	write_params(*o.os, params);
	write_storage_csv(*o.os, S);
	std::fprintf(stderr, "size=%zu rate=%.6f\n", S.size(), S.rate());
	return ok;
}

int cmd_eta_curve(const Config &c, const Params &params)
{
	require(c.grid >= 1, "grid must be >= 1");
	Output o(c.out);
	write_params(*o.os, params);
	write_row(*o.os, {"epsilon", "eta"});
	const double top = (c.a - 1.0) / c.a;
	for (unsigned k = 1; k <= c.grid; ++k) {
		const double e = top * k / (c.grid + 1);
		write_row(*o.os, {fmt_real(e), fmt_real(eta(c.a, e))});
	}
	return ok;
}

int cmd_eta_star_curve(const Config &c, const Params &params)
{
	require(c.grid >= 1, "grid must be >= 1");
	const BrutVariant v = c.variant == "A" ? BrutVariant::A : BrutVariant::B;
	if (c.variant != "A" && c.variant != "B")
		fail(Errc::invalid_argument, "variant must be A or B");
	Output o(c.out);
	write_params(*o.os, params);
	write_row(*o.os, {"epsilon", "eta", "eta_star"});
	const double top = std::min(0.5, (c.a - 1.0) / c.a);
	for (unsigned k = 1; k <= c.grid; ++k) {
		const double e = top * k / (c.grid + 1);
		const auto r = brut_univ_sketching(c.a, e, c.n, c.delta, v, {}, plan_of(c));
		write_row(*o.os, {fmt_real(e), fmt_real(r.eta_bound), fmt_real(r.eta_star)});
		o.os->flush();
	}
	return ok;
}

int cmd_dom_region(const Config &c, const Params &params)
{
	const Dist p = parse_dist(c.dist.empty() ? "0.2,0.4,0.4" : c.dist);
	RegionMode m;
	if (c.region == "dominated_by_c")
		m = RegionMode::dominated_by_c;
	else if (c.region == "dominates_c")
		m = RegionMode::dominates_c;
	else if (c.region == "dominated_by_h")
		m = RegionMode::dominated_by_h;
	else if (c.region == "dominates_h")
		m = RegionMode::dominates_h;
	else
		fail(Errc::invalid_argument, "unknown region " + c.region);
	Output o(c.out);
	write_params(*o.os, params);
	write_row(*o.os, {"x", "y", "flag"});
	for (const auto &pt : dom_region_grid(p, m, c.grid))
		write_row(*o.os, {fmt_real(pt.q[0]), fmt_real(pt.q[1]), pt.member ? "1" : "0"});
	return ok;
}

int cmd_compound(const Config &c, const Params &params)
{
	const Dist p = parse_dist(c.p.empty() ? "0.08,0.36,0.56" : c.p);
	const Dist q = parse_dist(c.q.empty() ? "0.11,0.62,0.27" : c.q);
	const auto r = counterexample_report(p, q);
	const double lower = compound_lower_bound(p, q, c.level);
	std::optional<double> upper;
	if (p.a() == 2)
		upper = compound_upper_bound_bec(p, q, c.level);
	Output o(c.out);
	if (c.format == "csv") {
		write_params(*o.os, params);
		write_row(*o.os, {"H_p", "H_q", "C", "lower_bound_l1", "level", "lower_bound", "upper_bound", "strict_excess"});
		write_row(*o.os, {fmt_real(r.H_p), fmt_real(r.H_q), fmt_real(r.C), fmt_real(r.lower_bound_l1),
		                  std::to_string(c.level), fmt_real(lower), upper ? fmt_real(*upper) : "",
		                  r.strict_excess ? "1" : "0"});
	} else if (c.format == "sigma") {
		write_params(*o.os, params);
		write_compound_csv(*o.os, p, q, c.level);
	} else if (c.format == "text") {
		char buf[128], key[32];
		auto line = [&](const char *k, double v) {
			std::snprintf(buf, sizeof buf, "%-16s %.6f\n", k, v);
			*o.os << buf;
		};
		line("H_p", r.H_p);
		line("H_q", r.H_q);
		line("C", r.C);
		line("lower_bound_l1", r.lower_bound_l1);
		std::snprintf(key, sizeof key, "lower_bound_l%u", c.level);
		line(key, lower);
		if (upper) {
			std::snprintf(key, sizeof key, "upper_bound_l%u", c.level);
			line(key, *upper);
			*o.os << "upper_reading    " << kUpperBoundReading << '\n';
		}
		*o.os << "strict_excess    " << (r.strict_excess ? "yes" : "no") << '\n';
	} else {
		fail(Errc::invalid_argument, "format must be text, csv or sigma");
	}
	return ok;
}

int cmd_trials(const Config &c, const Params &params)
{
	require(c.trials >= 1, "need at least one trial");
	std::size_t good = 0;
	double rate = 0;
	if (c.kind == "universal") {
		const Dist src = parse_dist(c.dist.empty() ? "0.89,0.11" : c.dist);
		const StorageSet S = storage_for(binary_dist_with_entropy(c.rate, 0), c.n, c.delta, plan_of(c));
		for (std::size_t t = 0; t < c.trials; ++t) {
			Rng rng = Rng::substream(c.seed ^ 0x7472ULL, t);
			std::vector<Symbol> x(c.n);
			for (auto &s : x)
				s = static_cast<Symbol>(rng.sample(src));
			const SymbolBlock xb(2, std::move(x));
			const auto b = universal_compress(xb, c.rate, S);
			rate = b.rate();
			good += universal_decompress(b, c.seed + t).decoded.x == xb;
		}
	} else if (c.kind == "sketch") {
		const auto spec =
		    build_sketch_spec(c.a, c.epsilon, c.n, c.delta, method_of(c), plan_of(c), {.hull_grid = c.grid});
		const Dist src = c.dist.empty() ? sparse_extreme(c.a, c.epsilon) : parse_dist(c.dist);
		rate = static_cast<double>(spec.m()) / c.n;
		for (std::size_t t = 0; t < c.trials; ++t) {
			Rng rng = Rng::substream(c.seed ^ 0x7472ULL, t);
			std::vector<Symbol> x(c.n);
			for (auto &s : x)
				s = static_cast<Symbol>(rng.sample(src));
			const SymbolBlock xb(c.a, std::move(x));
			good += recover(spec, sketch(spec, xb)) == xb;
		}
	} else {
		fail(Errc::invalid_argument, "kind must be universal or sketch");
	}
	double lo, hi;
	wilson_interval(good, c.trials, lo, hi);
	Output o(c.out);
	write_params(*o.os, params);
	write_row(*o.os, {"trials", "successes", "success_rate", "ci_low", "ci_high", "rate"});
	write_row(*o.os, {std::to_string(c.trials), std::to_string(good),
	                  fmt_real(static_cast<double>(good) / c.trials), fmt_real(lo), fmt_real(hi), fmt_real(rate)});
	return ok;
}

int exit_code(Errc e)
{
	switch (e) {
	case Errc::invalid_argument:
	case Errc::unsupported_alphabet: return config;
	case Errc::format: return format;
	case Errc::resource_limit: return resource;
	case Errc::io: return io;
	default: return other;
	}
}

} // namespace

int main(int argc, char **argv)
{
	CLI::App app{"Universal polar coding and polar sketching"};
	app.require_subcommand(1);
	app.option_defaults()->always_capture_default();
	Config c;

	using Handler = int (*)(const Config &, const Params &);
	std::vector<std::pair<CLI::App *, Handler>> commands;
	auto sub = [&](const char *name, const char *desc, Handler h) {
		CLI::App *s = app.add_subcommand(name, desc);
		s->option_defaults()->always_capture_default();
		commands.emplace_back(s, h);
		return s;
	};
	auto common = [&](CLI::App *s) { s->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber); };
	auto storage_opts = [&](CLI::App *s, bool seed_required) {
		s->add_option("--delta", c.delta, "storage threshold")->check(CLI::Range(0.0, 1.0));
		s->add_option("--samples", c.samples, "Monte Carlo samples");
		s->add_option("--guard", c.guard, "guard band in standard errors");
		auto *o = s->add_option("--seed", c.seed, "seed");
		if (seed_required)
			o->required();
	};

	auto *compress = sub("compress", "compress a file with the universal binary scheme", cmd_compress);
	compress->add_option("--in", c.in)->required();
	compress->add_option("--out", c.out)->required();
	compress->add_option("--rate", c.rate, "entropy budget R")->check(CLI::Range(0.0, 1.0));
	compress->add_option("--n", c.n, "block length");
	storage_opts(compress, true);
	common(compress);

	auto *decompress = sub("decompress", "invert compress", cmd_decompress);
	decompress->add_option("--in", c.in)->required();
	decompress->add_option("--out", c.out)->required();
	decompress->add_option("--seed", c.seed, "tie-break seed")->required();

	auto sketch_opts = [&](CLI::App *s) {
		s->add_option("--a", c.a, "alphabet size");
		s->add_option("--n", c.n, "block length");
		s->add_option("--epsilon", c.epsilon, "sparsity");
		s->add_option("--method", c.method, "known|pcp|brutA|brutB");
		s->add_option("--grid", c.grid, "hull grid resolution for brutA");
		storage_opts(s, true);
		common(s);
	};
	auto *sk = sub("sketch", "build a sketch spec and optionally sketch a signal", cmd_sketch);
	sketch_opts(sk);
	sk->add_option("--spec", c.spec, "write spec to <base>.pset and <base>.json");
	sk->add_option("--in", c.in, "signal file");
	sk->add_option("--out", c.out, "measurement file");

	auto *rec = sub("recover", "recover a signal from measurements", cmd_recover);
	rec->add_option("--spec", c.spec, "spec base path")->required();
	rec->add_option("--in", c.in, "measurement file")->required();
	rec->add_option("--out", c.out);

	auto *ss = sub("storage-set", "compute a storage set", cmd_storage_set);
	ss->add_option("--dist", c.dist, "distribution, comma separated (default: binary with entropy --rate)");
	ss->add_option("--rate", c.rate);
	ss->add_option("--n", c.n);
	ss->add_option("--mode", c.mode, "exact|mc|bec|auto");
	ss->add_option("--spec", c.spec, "write the PSET file here");
	ss->add_option("--out", c.out, "CSV output");
	storage_opts(ss, false);
	common(ss);

	auto *ec = sub("eta-curve", "CSV of eta(a, eps)", cmd_eta_curve);
	ec->add_option("--a", c.a);
	ec->add_option("--grid", c.grid, "number of eps points");
	ec->add_option("--out", c.out);

	auto *es = sub("eta-star-curve", "CSV of the brut search result over eps", cmd_eta_star_curve);
	es->add_option("--a", c.a);
	es->add_option("--n", c.n);
	es->add_option("--variant", c.variant, "A|B");
	es->add_option("--grid", c.grid, "number of eps points");
	es->add_option("--out", c.out);
	storage_opts(es, true);
	common(es);

	auto *dr = sub("dom-region", "membership grid over the ternary simplex", cmd_dom_region);
	dr->add_option("--dist", c.dist, "anchor distribution");
	dr->add_option("--region", c.region, "dominated_by_c|dominates_c|dominated_by_h|dominates_h");
	dr->add_option("--grid", c.grid, "barycentric resolution");
	dr->add_option("--out", c.out);

	auto *co = sub("compound", "compound storage-rate bounds", cmd_compound);
	co->add_option("--p", c.p);
	co->add_option("--q", c.q);
	co->add_option("--level", c.level);
	co->add_option("--format", c.format, "text|csv|sigma");
	co->add_option("--out", c.out);

	auto *tr = sub("trials", "round-trip success rate", cmd_trials);
	tr->add_option("--kind", c.kind, "universal|sketch");
	tr->add_option("--dist", c.dist, "source distribution");
	tr->add_option("--rate", c.rate);
	tr->add_option("--trials", c.trials);
	tr->add_option("--out", c.out);
	sketch_opts(tr);

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e) {
		const int r = app.exit(e);
		return r == 0 ? ok : config;
	}

	for (auto &[s, h] : commands) {
		if (!s->parsed())
			continue;
		Params params{{"command", s->get_name()}};
		if (const CLI::Option *o = s->get_option_no_throw("--seed"))
			c.seed_given = o->count() > 0;
		for (const CLI::Option *o : s->get_options()) {
			if (o->get_lnames().empty() || o->get_lnames()[0] == "help")
				continue;
			params.emplace_back(o->get_lnames()[0], o->count() ? o->results()[0] : o->get_default_str());
		}
		try {
			return h(c, params);
		} catch (const Error &e) {
			std::fprintf(stderr, "upc %s: %s\n", s->get_name().c_str(), e.what());
			return exit_code(e.code());
		} catch (const std::exception &e) {
			std::fprintf(stderr, "upc %s: %s\n", s->get_name().c_str(), e.what());
			return other;
		}
	}
	return other;
}

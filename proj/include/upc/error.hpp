#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace upc {

enum class Errc {
	invalid_argument,
	indeterminate_spectrum,
	not_divisible,
	unsupported_alphabet,
	resource_limit,
	infeasible,
	format,
	io,
};

inline const char *errc_name(Errc code)
{
	switch (code) {
	case Errc::invalid_argument: return "invalid-argument";
	case Errc::indeterminate_spectrum: return "indeterminate-spectrum";
	case Errc::not_divisible: return "not-divisible-by-criterion";
	case Errc::unsupported_alphabet: return "unsupported-alphabet";
	case Errc::resource_limit: return "resource-limit";
	case Errc::infeasible: return "infeasible";
	case Errc::format: return "format";
	case Errc::io: return "io";
	}
	return "unknown";
}

class Error : public std::runtime_error
{
public:
	Error(Errc code, const std::string &what)
		: std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code)
	{
	}
	Errc code() const noexcept { return code_; }

private:
	Errc code_;
};

/// Malformed container; offset is the byte position at which decoding gave up.
class FormatError : public Error
{
public:
	FormatError(std::size_t offset, const std::string &what)
		: Error(Errc::format, what + " at offset " + std::to_string(offset)), offset_(offset)
	{
	}
	std::size_t offset() const noexcept { return offset_; }

private:
	std::size_t offset_;
};

[[noreturn]] inline void fail(Errc code, const std::string &what)
{
	throw Error(code, what);
}

inline void require(bool cond, const char *what)
{
	if (!cond)
		throw Error(Errc::invalid_argument, what);
}

} // namespace upc

#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace upc {

using Params = std::vector<std::pair<std::string, std::string>>;

inline std::string fmt_real(double v)
{
	char buf[40];
	std::snprintf(buf, sizeof buf, "%.12g", v);
	return buf;
}

/// "# params: k=v k=v ..." comment line heading every CSV.
inline void write_params(std::ostream &os, const Params &params)
{
	os << "# params:";
	for (const auto &[k, v] : params)
		os << ' ' << k << '=' << v;
	os << '\n';
}

inline void write_row(std::ostream &os, const std::vector<std::string> &cells)
{
	for (std::size_t k = 0; k < cells.size(); ++k)
		os << (k ? "," : "") << cells[k];
	os << '\n';
}

} // namespace upc

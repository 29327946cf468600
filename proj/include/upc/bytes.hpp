#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace upc {

class ByteWriter
{
public:
	void raw(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
	void u8(std::uint8_t v) { buf_.push_back(v); }
	void u16(std::uint16_t v) { le(v, 2); }
	void u32(std::uint32_t v) { le(v, 4); }
	void u64(std::uint64_t v) { le(v, 8); }
	void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
	void bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

	std::size_t size() const { return buf_.size(); }
	const std::vector<std::uint8_t> &data() const { return buf_; }
	std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
	void le(std::uint64_t v, int width)
	{
		for (int k = 0; k < width; ++k)
			buf_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
	}
	std::vector<std::uint8_t> buf_;
};

/// Little-endian reader; every failure carries the offending offset.
class ByteReader
{
public:
	explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

	std::size_t offset() const { return pos_; }
	std::size_t remaining() const { return data_.size() - pos_; }

	void expect(std::string_view magic, const char *what)
	{
		const std::size_t at = pos_;
		need(magic.size(), what);
		if (std::memcmp(data_.data() + pos_, magic.data(), magic.size()) != 0)
			throw FormatError(at, std::string("bad ") + what);
		pos_ += magic.size();
	}
	std::uint8_t u8(const char *what) { return static_cast<std::uint8_t>(le(1, what)); }
	std::uint16_t u16(const char *what) { return static_cast<std::uint16_t>(le(2, what)); }
	std::uint32_t u32(const char *what) { return static_cast<std::uint32_t>(le(4, what)); }
	std::uint64_t u64(const char *what) { return le(8, what); }
	double f64(const char *what) { return std::bit_cast<double>(le(8, what)); }
	std::span<const std::uint8_t> bytes(std::size_t count, const char *what)
	{
		need(count, what);
		auto s = data_.subspan(pos_, count);
		pos_ += count;
		return s;
	}

private:
	void need(std::size_t count, const char *what)
	{
		if (remaining() < count)
			throw FormatError(pos_, std::string("truncated ") + what);
	}
	std::uint64_t le(int width, const char *what)
	{
		need(width, what);
		std::uint64_t v = 0;
		for (int k = 0; k < width; ++k)
			v |= static_cast<std::uint64_t>(data_[pos_ + k]) << (8 * k);
		pos_ += width;
		return v;
	}

	std::span<const std::uint8_t> data_;
	std::size_t pos_ = 0;
};

} // namespace upc

#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "sqf/core/error.hpp"

namespace sqf::binary {

/// Little-endian writer independent of host byte order.
class Writer {
public:
	explicit Writer(std::ostream &out) : out_(out) {}

	void bytes(const void *data, std::size_t n) { out_.write(static_cast<const char *>(data), static_cast<std::streamsize>(n)); }

	template <typename T>
	    requires std::is_integral_v<T>
	void integer(T value) {
		using U = std::make_unsigned_t<T>;
		auto u = static_cast<U>(value);
		unsigned char buf[sizeof(T)];
		for (std::size_t i = 0; i < sizeof(T); ++i) {
			buf[i] = static_cast<unsigned char>(u & 0xffu);
			u = static_cast<U>(u >> 8);
		}
		bytes(buf, sizeof(T));
	}

	void u8(std::uint8_t v) { integer(v); }
	void u32(std::uint32_t v) { integer(v); }
	void u64(std::uint64_t v) { integer(v); }
	void i64(std::int64_t v) { integer(v); }
	void f64(double v) { integer(std::bit_cast<std::uint64_t>(v)); }

	void string(const std::string &s) {
		u32(static_cast<std::uint32_t>(s.size()));
		bytes(s.data(), s.size());
	}

	void f64s(const std::vector<double> &values) {
		for (double v : values) {
			f64(v);
		}
	}

private:
	std::ostream &out_;
};

class Reader {
public:
	explicit Reader(std::istream &in, std::string context) : in_(in), context_(std::move(context)) {}

	void bytes(void *data, std::size_t n) {
		in_.read(static_cast<char *>(data), static_cast<std::streamsize>(n));
		if (static_cast<std::size_t>(in_.gcount()) != n) {
			throw InputFormatError(context_ + ": truncated file");
		}
	}

	template <typename T>
	    requires std::is_integral_v<T>
	T integer() {
		unsigned char buf[sizeof(T)];
		bytes(buf, sizeof(T));
		using U = std::make_unsigned_t<T>;
		U u = 0;
		for (std::size_t i = sizeof(T); i-- > 0;) {
			u = static_cast<U>((u << 8) | buf[i]);
		}
		return static_cast<T>(u);
	}

	std::uint8_t u8() { return integer<std::uint8_t>(); }
	std::uint32_t u32() { return integer<std::uint32_t>(); }
	std::uint64_t u64() { return integer<std::uint64_t>(); }
	std::int64_t i64() { return integer<std::int64_t>(); }
	double f64() { return std::bit_cast<double>(integer<std::uint64_t>()); }

	std::string string(std::size_t max_length = 1u << 20) {
		const auto n = u32();
		if (n > max_length) {
			throw InputFormatError(context_ + ": implausible string length");
		}
		std::string s(n, '\0');
		bytes(s.data(), n);
		return s;
	}

	std::vector<double> f64s(std::size_t n) {
		std::vector<double> out(n);
		for (auto &v : out) {
			v = f64();
		}
		return out;
	}

	void expect_magic(const char (&magic)[5]) {
		char buf[4];
		bytes(buf, 4);
		if (std::string(buf, 4) != std::string(magic, 4)) {
			throw InputFormatError(context_ + ": bad magic, expected '" + std::string(magic, 4) + "'");
		}
	}

	const std::string &context() const { return context_; }

private:
	std::istream &in_;
	std::string context_;
};

} // namespace sqf::binary

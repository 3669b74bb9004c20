#pragma once

#include <cstdint>
#include <string_view>

namespace sqf {

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a(std::string_view text, std::uint64_t hash = 0xcbf29ce484222325ULL) {
	for (char c : text) {
		hash ^= static_cast<std::uint8_t>(c);
		hash *= 0x100000001b3ULL;
	}
	return hash;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
	x += 0x9e3779b97f4a7c15ULL;
	x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
	x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
	return x ^ (x >> 31);
}

/// Expands a master seed into an independent stream seed for `component`, optionally per item.
///
/// seed = splitmix64(splitmix64(master ^ fnv1a(component)) + index)
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view component, std::uint64_t index = 0) {
	return splitmix64(splitmix64(master ^ fnv1a(component)) + index);
}

} // namespace sqf

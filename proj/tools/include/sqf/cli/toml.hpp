#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace sqf::cli::toml {

/// Value of the supported TOML subset: strings, integers, floats, booleans and
/// single-line arrays of those.
struct Value {
	enum class Kind { string, integer, floating, boolean, array };

	Kind kind = Kind::string;
	std::string text;
	std::int64_t integer = 0;
	double floating = 0.0;
	bool boolean = false;
	std::vector<Value> items;
	int line = 0;

	const char *kindName() const;
};

struct Entry {
	std::string key;
	Value value;
};

struct Table {
	std::string name;
	int line = 0;
	std::vector<Entry> entries;

	const Value *find(const std::string &key) const;
};

/// Tables in file order; keys before the first header land in a table named "".
struct Document {
	std::vector<Table> tables;

	const Table *find(const std::string &name) const;
};

/// Parses `[table]` headers, `key = value` pairs and `#` comments.
/// Throws ConfigError("<source>:<line>: ...") on anything outside the subset.
Document parse(const std::string &text, const std::string &source = "config");
Document parse_file(const std::string &path);

/// Round-trippable renderings used when writing resolved configs.
std::string quote(const std::string &s);
std::string format_float(double v);

} // namespace sqf::cli::toml

#include "sqf/cli/toml.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sqf/core/error.hpp"

namespace sqf::cli::toml {

const char *Value::kindName() const {
	switch (kind) {
	case Kind::string:
		return "string";
	case Kind::integer:
		return "integer";
	case Kind::floating:
		return "float";
	case Kind::boolean:
		return "boolean";
	case Kind::array:
		return "array";
	}
	return "value";
}

const Value *Table::find(const std::string &key) const {
	for (const auto &e : entries) {
		if (e.key == key) {
			return &e.value;
		}
	}
	return nullptr;
}

const Table *Document::find(const std::string &name) const {
	for (const auto &t : tables) {
		if (t.name == name) {
			return &t;
		}
	}
	return nullptr;
}

namespace {

class LineParser {
public:
	LineParser(const std::string &line, int number, const std::string &source)
	    : s_(line), line_(number), source_(source) {}

	[[noreturn]] void fail(const std::string &message) const {
		throw ConfigError(source_ + ":" + std::to_string(line_) + ": " + message);
	}

	void skipSpace() {
		while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) {
			++pos_;
		}
	}

	bool atEnd() {
		skipSpace();
		return pos_ >= s_.size() || s_[pos_] == '#';
	}

	char peek() { return pos_ < s_.size() ? s_[pos_] : '\0'; }

	void expect(char c) {
		skipSpace();
		if (peek() != c) {
			fail(std::string("expected '") + c + "'");
		}
		++pos_;
	}

	std::string bareKey() {
		skipSpace();
		const std::size_t start = pos_;
		while (pos_ < s_.size()) {
			const char c = s_[pos_];
			if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.') {
				++pos_;
			} else {
				break;
			}
		}
		if (start == pos_) {
			fail("expected a key");
		}
		return s_.substr(start, pos_ - start);
	}

	Value value() {
		skipSpace();
		Value v;
		v.line = line_;
		const char c = peek();
		if (c == '"') {
			v.kind = Value::Kind::string;
			v.text = quoted();
			return v;
		}
		if (c == '[') {
			++pos_;
			v.kind = Value::Kind::array;
			skipSpace();
			if (peek() == ']') {
				++pos_;
				return v;
			}
			while (true) {
				v.items.push_back(value());
				skipSpace();
				if (peek() == ',') {
					++pos_;
					skipSpace();
					if (peek() == ']') {
						++pos_;
						return v;
					}
					continue;
				}
				if (peek() == ']') {
					++pos_;
					return v;
				}
				fail("expected ',' or ']' in array");
			}
		}
		const std::size_t start = pos_;
		while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#' && s_[pos_] != ' ' &&
		       s_[pos_] != '\t') {
			++pos_;
		}
		const std::string token = s_.substr(start, pos_ - start);
		if (token.empty()) {
			fail("missing value");
		}
		if (token == "true" || token == "false") {
			v.kind = Value::Kind::boolean;
			v.boolean = token == "true";
			return v;
		}
		std::string digits;
		for (char ch : token) {
			if (ch != '_') {
				digits += ch;
			}
		}
		const bool integral = digits.find_first_of(".eEni") == std::string::npos;
		errno = 0;
		char *end = nullptr;
		if (integral) {
			const long long parsed = std::strtoll(digits.c_str(), &end, 10);
			if (end != digits.c_str() + digits.size() || errno == ERANGE) {
				fail("invalid value '" + token + "'");
			}
			v.kind = Value::Kind::integer;
			v.integer = parsed;
			return v;
		}
		const double parsed = std::strtod(digits.c_str(), &end);
		if (end != digits.c_str() + digits.size() || !std::isfinite(parsed)) {
			fail("invalid value '" + token + "'");
		}
		v.kind = Value::Kind::floating;
		v.floating = parsed;
		return v;
	}

private:
	std::string quoted() {
		++pos_;
		std::string out;
		while (pos_ < s_.size()) {
			const char c = s_[pos_++];
			if (c == '"') {
				return out;
			}
			if (c == '\\') {
				if (pos_ >= s_.size()) {
					break;
				}
				const char e = s_[pos_++];
				switch (e) {
				case '"':
					out += '"';
					break;
				case '\\':
					out += '\\';
					break;
				case 'n':
					out += '\n';
					break;
				case 't':
					out += '\t';
					break;
				default:
					fail(std::string("unsupported escape '\\") + e + "'");
				}
				continue;
			}
			out += c;
		}
		fail("unterminated string");
	}

	const std::string &s_;
	std::size_t pos_ = 0;
	int line_;
	const std::string &source_;
};

} // namespace

Document parse(const std::string &text, const std::string &source) {
	Document doc;
	doc.tables.push_back({"", 0, {}});
	std::istringstream in(text);
	std::string line;
	int number = 0;
	while (std::getline(in, line)) {
		++number;
		if (!line.empty() && line.back() == '\r') {
			line.pop_back();
		}
		LineParser p(line, number, source);
		if (p.atEnd()) {
			continue;
		}
		if (p.peek() == '[') {
			p.expect('[');
			const std::string name = p.bareKey();
			p.expect(']');
			if (!p.atEnd()) {
				p.fail("unexpected text after table header");
			}
			if (doc.find(name) != nullptr) {
				p.fail("duplicate table [" + name + "]");
			}
			doc.tables.push_back({name, number, {}});
			continue;
		}
		const std::string key = p.bareKey();
		p.expect('=');
		Value v = p.value();
		if (!p.atEnd()) {
			p.fail("unexpected text after value of '" + key + "'");
		}
		auto &table = doc.tables.back();
		if (table.find(key) != nullptr) {
			p.fail("duplicate key '" + key + "'");
		}
		table.entries.push_back({key, std::move(v)});
	}
	return doc;
}

Document parse_file(const std::string &path) {
	std::ifstream in(path);
	if (!in) {
		throw ConfigError("cannot open config file '" + path + "'");
	}
	std::ostringstream ss;
	ss << in.rdbuf();
	return parse(ss.str(), path);
}

std::string quote(const std::string &s) {
	std::string out = "\"";
	for (char c : s) {
		switch (c) {
		case '"':
			out += "\\\"";
			break;
		case '\\':
			out += "\\\\";
			break;
		case '\n':
			out += "\\n";
			break;
		case '\t':
			out += "\\t";
			break;
		default:
			out += c;
		}
	}
	return out + "\"";
}

std::string format_float(double v) {
	char buf[64];
	std::snprintf(buf, sizeof buf, "%.17g", v);
	std::string s = buf;
	if (s.find_first_of(".eE") == std::string::npos) {
		s += ".0";
	}
	return s;
}

} // namespace sqf::cli::toml

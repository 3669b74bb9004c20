#include "sqf/core/types.hpp"

#include "sqf/core/error.hpp"

namespace sqf {

const VariableScaler &ScalerParams::get(const std::string &name) const {
	for (std::size_t i = 0; i < names.size(); ++i) {
		if (names[i] == name) {
			return variables[i];
		}
	}
	throw ValidationError("no scaler for variable '" + name + "'");
}

} // namespace sqf

#include "nextpm/model.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace nextpm {

SystemState SystemState::fresh(const SystemConfig& config) {
    SystemState st;
    st.s = 0;
    st.horizon = config.horizon;
    st.window = config.window;
    st.r = std::min(config.window, config.horizon);
    st.last_maintenance.assign(config.components.size(), 0);
    return st;
}

void validate(const SystemState& state) {
    if (state.s < 0 || state.s > state.r || state.r > state.horizon)
        throw std::invalid_argument("state requires 0 <= s <= r <= T (s=" + std::to_string(state.s) +
                                    ", r=" + std::to_string(state.r) + ", T=" + std::to_string(state.horizon) + ")");
    for (std::size_t j = 0; j < state.last_maintenance.size(); ++j) {
        const int tj = state.last_maintenance[j];
        if (tj < 0 || tj > state.s)
            throw std::invalid_argument("state requires 0 <= t_j <= s (component index " + std::to_string(j) + ")");
    }
}

}  // namespace nextpm

#pragma once

#include <cstddef>
#include <vector>

#include "sqf/core/types.hpp"

namespace sqf::pipeline {

/// Window over acquisition indices: history [start, start + p), targets [start + p, start + p + h).
struct Window {
	std::size_t start = 0;
	std::size_t history = 0;
	std::size_t horizon = 0;

	std::size_t end() const { return start + history + horizon; }

	friend bool operator==(const Window &, const Window &) = default;
};

/// Sliding windows in observation space, window i starting at acquisition i * shift.
///
/// By default a window is dropped when any of its points lacks a value. With
/// `allow_masked_history` only the targets must carry values and at least one history point
/// must; missing history points are then masked downstream.
std::vector<Window> generate_windows(const ObservationSeries &series, std::size_t p, std::size_t h, std::size_t shift,
                                     bool allow_masked_history = false);

/// max(0, floor((n - p - h) / shift) + 1).
std::size_t expected_window_count(std::size_t n, std::size_t p, std::size_t h, std::size_t shift);

} // namespace sqf::pipeline

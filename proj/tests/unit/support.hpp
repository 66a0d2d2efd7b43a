#pragma once

#include <cstdint>
#include <random>

#include "ac_control/config.hpp"

namespace ac::testing {

/// Default problem on a coarser mesh so unit tests stay fast.
inline RunConfig small_config(long cells = 40, long steps = 20) {
    RunConfig c;
    c.cells = cells;
    c.steps = steps;
    return c;
}

inline ModelSetup small_setup(long cells = 40, long steps = 20) { return build_validated_setup(small_config(cells, steps)); }

inline Field random_field(std::size_t n, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-scale, scale);
    Field f(n);
    for (auto& v : f) v = dist(rng);
    return f;
}

inline Trajectory constant_trajectory(const ModelSetup& setup, double value) {
    return Trajectory(setup.steps, constant_field(setup.grid, value));
}

}  // namespace ac::testing

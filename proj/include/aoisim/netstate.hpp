#pragma once

#include <cstdint>
#include <vector>

namespace aoisim::simulator {

// Per-source freshness state. AoI follows x_m(t) = t - g_m(t); the buffer
// keeps only the newest undelivered packet's generation slot (-1 = empty).
struct NetworkState {
    std::vector<long long> aoi;
    std::vector<long long> last_delivered_gen;
    std::vector<long long> buffer_gen;

    explicit NetworkState(std::size_t num_sources)
        : aoi(num_sources, 0), last_delivered_gen(num_sources, 0), buffer_gen(num_sources, -1) {}

    std::size_t num_sources() const { return aoi.size(); }

    bool eligible(std::size_t m) const {
        return buffer_gen[m] >= 0 && buffer_gen[m] > last_delivered_gen[m];
    }

    // A fresh arrival replaces whatever the buffer held.
    void arrival(std::size_t m, long long t) { buffer_gen[m] = t; }
};

}  // namespace aoisim::simulator

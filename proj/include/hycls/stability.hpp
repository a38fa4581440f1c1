#pragma once

#include <map>
#include <vector>

#include "hycls/model.hpp"

namespace hycls {

/// Divisor of the day-pair similarity sum. The verbatim formula divides by the
/// number of days n, which caps the index at (n-1)/n; AdjacentPairs divides by
/// the number of day pairs instead so a perfectly regular schedule scores 1.
enum class SiNormalization { PaperVerbatim, AdjacentPairs };

/// What a day pair with an idle reference day contributes. PerTermZero keeps
/// the rest of the history; WholeIndexZero zeroes the entire index.
enum class SiZeroDenomPolicy { PerTermZero, WholeIndexZero };

/// Stable index: day-over-day schedule similarity in [0, 1].
inline double stable_index(const ActivityMatrix& a,
                           SiNormalization norm = SiNormalization::PaperVerbatim,
                           SiZeroDenomPolicy zero_policy = SiZeroDenomPolicy::PerTermZero) {
    if (a.days < 2) return 0.0;
    double sum = 0.0;
    for (int day = 1; day < a.days; ++day) {
        int overlap = 0;
        int prev_live = 0;
        for (int slot = 0; slot < a.slots_per_day; ++slot) {
            const int prev = a.at(day - 1, slot);
            prev_live += prev;
            overlap += prev * a.at(day, slot);
        }
        if (prev_live == 0) {
            if (zero_policy == SiZeroDenomPolicy::WholeIndexZero) return 0.0;
            continue;  // idle reference day contributes 0
        }
        sum += static_cast<double>(overlap) / prev_live;
    }
    const double z = norm == SiNormalization::PaperVerbatim ? a.days : a.days - 1;
    return sum / z;
}

enum class Placement { Dedicated, Cloud };

/// Offloading state: the evolving threshold H plus per-broadcaster SI cache.
struct StabilityState {
    double threshold = 0.0;            // H, in [0, 1]
    double trigger_utilization = 0.60; // offloading inactive below this
    SiNormalization normalization = SiNormalization::PaperVerbatim;
    SiZeroDenomPolicy zero_policy = SiZeroDenomPolicy::PerTermZero;
    std::map<int, double> si_cache;    // roster ord -> SI

    double cached_si(int ord) const {
        const auto it = si_cache.find(ord);
        return it == si_cache.end() ? 0.0 : it->second;
    }
};

/// H <- mean SI of the broadcasters currently hosted in dedicated datacenters.
/// An empty set leaves H unchanged.
inline double update_threshold(StabilityState& state, const std::vector<double>& dedicated_sis) {
    if (!dedicated_sis.empty()) {
        double sum = 0.0;
        for (double si : dedicated_sis) sum += si;
        state.threshold = sum / static_cast<double>(dedicated_sis.size());
    }
    return state.threshold;
}

/// Initial placement class of an arriving broadcaster. Offloading only starts
/// once the dedicated bandwidth utilization reaches the trigger; above it,
/// SI >= H keeps the broadcaster in the dedicated datacenter.
inline Placement initial_offload(const BroadcasterProfile& b, StabilityState& state,
                                 double dedicated_bw_utilization) {
    auto it = state.si_cache.find(b.ord);
    if (it == state.si_cache.end()) {
        const double si = stable_index(b.activity, state.normalization, state.zero_policy);
        it = state.si_cache.emplace(b.ord, si).first;
    }
    if (dedicated_bw_utilization < state.trigger_utilization) return Placement::Dedicated;
    return it->second >= state.threshold ? Placement::Dedicated : Placement::Cloud;
}

}  // namespace hycls

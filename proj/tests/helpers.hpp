#pragma once

#include "sdamh/benchmark.hpp"
#include "sdamh/core.hpp"
#include "sdamh/simulate.hpp"

#include <cstdint>
#include <vector>

namespace testing {

inline sdamh::TickSeries make_series(const std::vector<double>& r, const std::vector<int>& x) {
    sdamh::TickSeries s;
    for (std::size_t i = 0; i < r.size(); ++i) {
        sdamh::TradeEvent e;
        e.index = static_cast<std::int64_t>(i + 1);
        e.ret = r[i];
        e.sign = x[i];
        s.push_back(e);
    }
    return s;
}

inline sdamh::Simulation simulate_design(const sdamh::StaticParams& p, std::size_t T, std::uint64_t seed) {
    sdamh::SimulateOptions so;
    so.include_warmup = true;
    const auto kind = sdamh::is_score_driven(p.variant) ? sdamh::ScenarioKind::ScoreDriven : sdamh::ScenarioKind::Constant;
    return sdamh::simulate(p, sdamh::ScenarioPath{kind, {}, {}}, T, seed, so);
}

inline sdamh::StaticParams as_variant(sdamh::StaticParams p, sdamh::Variant v) {
    p.variant = v;
    if (!sdamh::is_score_driven(v)) p.alpha = 0.0;
    return p;
}

}  // namespace testing

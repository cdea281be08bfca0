#pragma once

#include "prwdkc/common.hpp"
#include "prwdkc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

namespace prwdkc {

/// Normalized mutual information in [0,1], geometric-mean normalization,
/// natural-log entropies from the joint contingency table. Label ids may be
/// arbitrary integers.
inline Real nmi(const std::vector<int>& a, const std::vector<int>& b) {
    require(a.size() == b.size(), "partition length mismatch");
    require(!a.empty(), "empty partitions");
    const Real n = static_cast<Real>(a.size());

    auto compact = [](const std::vector<int>& v) {
        std::unordered_map<int, int> remap;
        std::vector<int> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            auto [it, inserted] = remap.emplace(v[i], static_cast<int>(remap.size()));
            out[i] = it->second;
        }
        return std::pair<std::vector<int>, int>(std::move(out), static_cast<int>(remap.size()));
    };
    auto [ca, ka] = compact(a);
    auto [cb, kb] = compact(b);

    std::vector<Real> joint(static_cast<std::size_t>(ka) * static_cast<std::size_t>(kb), 0.0);
    std::vector<Real> pa(static_cast<std::size_t>(ka), 0.0), pb(static_cast<std::size_t>(kb), 0.0);
    for (std::size_t i = 0; i < ca.size(); ++i) {
        joint[static_cast<std::size_t>(ca[i]) * kb + static_cast<std::size_t>(cb[i])] += 1.0;
        pa[static_cast<std::size_t>(ca[i])] += 1.0;
        pb[static_cast<std::size_t>(cb[i])] += 1.0;
    }

    Real ha = 0.0, hb = 0.0, mi = 0.0;
    for (int i = 0; i < ka; ++i)
        if (pa[static_cast<std::size_t>(i)] > 0.0) {
            const Real p = pa[static_cast<std::size_t>(i)] / n;
            ha -= p * std::log(p);
        }
    for (int j = 0; j < kb; ++j)
        if (pb[static_cast<std::size_t>(j)] > 0.0) {
            const Real p = pb[static_cast<std::size_t>(j)] / n;
            hb -= p * std::log(p);
        }
    for (int i = 0; i < ka; ++i)
        for (int j = 0; j < kb; ++j) {
            const Real nij = joint[static_cast<std::size_t>(i) * kb + static_cast<std::size_t>(j)];
            if (nij <= 0.0) continue;
            const Real pij = nij / n;
            mi += pij * std::log(pij * n * n / (pa[static_cast<std::size_t>(i)] *
                                                pb[static_cast<std::size_t>(j)]));
        }

    if (ha <= 0.0 && hb <= 0.0) return 1.0;  // both single-cluster: identical partitions
    if (ha <= 0.0 || hb <= 0.0) return 0.0;  // one is single-cluster, the other is not
    return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

inline Real nmi(const Partition& a, const Partition& b) { return nmi(a.assignment, b.assignment); }

inline Real nmi(const Partition& a, const std::vector<int>& b) { return nmi(a.assignment, b); }

}  // namespace prwdkc

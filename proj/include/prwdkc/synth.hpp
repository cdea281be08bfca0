#pragma once

#include "prwdkc/graph.hpp"
#include "prwdkc/rng.hpp"

#include <array>
#include <vector>

namespace prwdkc {

// Default instance seed; chosen so the 5-NN digraph of the generated cloud
// has the two triples of components as its weak components, the regime in
// which the two-scale structure is recoverable by diffusion.
inline constexpr uint64_t kDefaultSynthSeed = 31;

/// Multi-scale mixture of six isotropic Gaussians in the plane: sigma = 0.5,
/// equal weights realized exactly as 50 points per component, N = 300.
/// Components 0-2 form the left-hand group, 3-5 the right-hand group.
inline FeatureDataset synth_gaussians(uint64_t seed = kDefaultSynthSeed) {
    constexpr int kPerComponent = 50;
    constexpr Real kSigma = 0.5;
    constexpr std::array<std::array<Real, 2>, 6> kMeans = {{
        {-3.0, -2.0}, {0.0, -2.0}, {-1.0, 1.0}, {4.0, -2.0}, {7.0, -2.0}, {5.0, 1.0},
    }};

    Rng rng(seed);
    FeatureDataset data;
    data.name = "synthetic-gaussians";
    data.points.resize(6 * kPerComponent, 2);
    std::vector<int> labels;
    labels.reserve(6 * kPerComponent);
    Index row = 0;
    for (int c = 0; c < 6; ++c) {
        for (int p = 0; p < kPerComponent; ++p, ++row) {
            data.points(row, 0) = kMeans[static_cast<std::size_t>(c)][0] + kSigma * rng.normal();
            data.points(row, 1) = kMeans[static_cast<std::size_t>(c)][1] + kSigma * rng.normal();
            labels.push_back(c);
        }
    }
    data.labels = std::move(labels);
    return data;
}

/// Large-scale ground truth: components {0,1,2} -> 0, {3,4,5} -> 1.
inline std::vector<int> two_scale_labels(const std::vector<int>& six_class) {
    std::vector<int> out(six_class.size());
    for (std::size_t i = 0; i < six_class.size(); ++i) out[i] = six_class[i] >= 3 ? 1 : 0;
    return out;
}

}  // namespace prwdkc

// Copyright 2026-present the rfann project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>

#include "rfann/core.hpp"
#include "rfann/graph.hpp"

namespace rfann {

/// Exact brute-force answer, ascending by (distance, position).
struct ExactResult {
    std::vector<Neighbor> neighbors;
};

/// Linear scan over the ranks in query.range; exact top-min(k, |range|).
ExactResult exact_rfknn(const Dataset& dataset, const Query& query);

/// |returned positions ∩ exact positions| / min(k, |exact|).
double recall(std::span<const Neighbor> returned, const ExactResult& exact, std::uint32_t k);

struct ContainmentCheck {
    std::uint32_t h = 0;  // smallest global prefix holding >= k in-range points
    bool holds = false;   // exact RFKNN(k) ⊆ that prefix
};

// Grows the exact global h-NN prefix until it contains at least k in-range
// points, then verifies the exact range-filtered k-NN set is contained in it.
ContainmentCheck check_containment(const Dataset& dataset, std::span<const float> q,
                                   RankRange range, std::uint32_t k);

// Position of the k-th in-range element when K of N positions are marked
// in-range uniformly at random: simulated mean over `trials` draws-without-
// replacement walks.
double simulate_expected_draws(std::uint32_t n, std::uint32_t in_range, std::uint32_t k,
                               std::uint32_t trials, std::uint64_t seed);

/// Closed form k * (N + 1) / (K + 1).
double expected_draws_closed_form(std::uint32_t n, std::uint32_t in_range, std::uint32_t k);

}  // namespace rfann

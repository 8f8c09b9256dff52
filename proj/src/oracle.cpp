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

#include "rfann/oracle.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <unordered_set>

namespace rfann {

namespace {

bool
by_distance_then_position(const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.position < b.position);
}

}  // namespace

ExactResult
exact_rfknn(const Dataset& dataset, const Query& query) {
    const Rank n = static_cast<Rank>(dataset.size());
    if (query.range.l < 1 || query.range.l > query.range.r || query.range.r > n) {
        throw std::invalid_argument("query range out of bounds");
    }
    ExactResult out;
    out.neighbors.reserve(query.range.length());
    for (Rank p = query.range.l; p <= query.range.r; ++p) {
        out.neighbors.push_back({p, euclidean_distance(query.vec, dataset.point(p))});
    }
    std::sort(out.neighbors.begin(), out.neighbors.end(), by_distance_then_position);
    const std::size_t keep = std::min<std::size_t>(std::max<std::uint32_t>(query.k, 1),
                                                   out.neighbors.size());
    out.neighbors.resize(keep);
    return out;
}

double
recall(std::span<const Neighbor> returned, const ExactResult& exact, std::uint32_t k) {
    const std::size_t denom = std::min<std::size_t>(k, exact.neighbors.size());
    if (denom == 0) {
        return 1.0;
    }
    std::unordered_set<Rank> expected;
    expected.reserve(exact.neighbors.size());
    for (const Neighbor& nb : exact.neighbors) {
        expected.insert(nb.position);
    }
    std::size_t hit = 0;
    for (const Neighbor& nb : returned) {
        hit += expected.count(nb.position);
    }
    return static_cast<double>(std::min(hit, denom)) / static_cast<double>(denom);
}

ContainmentCheck
check_containment(const Dataset& dataset, std::span<const float> q, RankRange range,
                  std::uint32_t k) {
    const Rank n = static_cast<Rank>(dataset.size());
    if (k < 1 || range.r > n || range.length() < k) {
        throw std::invalid_argument("containment check requires 1 <= k <= |range|");
    }

    std::vector<Neighbor> global;
    global.reserve(n);
    for (Rank p = 1; p <= n; ++p) {
        global.push_back({p, euclidean_distance(q, dataset.point(p))});
    }
    std::sort(global.begin(), global.end(), by_distance_then_position);

    ContainmentCheck out;
    std::unordered_set<Rank> prefix;
    std::uint32_t in_range_seen = 0;
    for (std::uint32_t h = 0; h < n; ++h) {
        prefix.insert(global[h].position);
        if (range.contains(global[h].position)) {
            ++in_range_seen;
        }
        if (in_range_seen >= k) {
            out.h = h + 1;
            break;
        }
    }

    const ExactResult rf = exact_rfknn(dataset, Query{{q.begin(), q.end()}, range, k});
    out.holds = std::all_of(rf.neighbors.begin(), rf.neighbors.end(),
                            [&](const Neighbor& nb) { return prefix.count(nb.position) > 0; });
    return out;
}

double
expected_draws_closed_form(std::uint32_t n, std::uint32_t in_range, std::uint32_t k) {
    return static_cast<double>(k) * (static_cast<double>(n) + 1.0) /
           (static_cast<double>(in_range) + 1.0);
}

double
simulate_expected_draws(std::uint32_t n, std::uint32_t in_range, std::uint32_t k,
                        std::uint32_t trials, std::uint64_t seed) {
    if (k < 1 || k > in_range || in_range > n || trials < 1) {
        throw std::invalid_argument("simulation requires 1 <= k <= K <= N and trials >= 1");
    }
    std::mt19937_64 rng(seed);
    // draw without replacement; position i is in-range with probability
    // (remaining in-range) / (remaining total)
    long double total_position = 0.0L;
    for (std::uint32_t t = 0; t < trials; ++t) {
        std::uint32_t remaining_hits = in_range;
        std::uint32_t remaining = n;
        std::uint32_t found = 0;
        std::uint32_t position = 0;
        while (found < k) {
            ++position;
            const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
            if (u * remaining < remaining_hits) {
                ++found;
                --remaining_hits;
            }
            --remaining;
        }
        total_position += position;
    }
    return static_cast<double>(total_position / trials);
}

}  // namespace rfann

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

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rfann {

// 1-based attribute rank. After re-ranking, a point's rank doubles as its
// row position in the dataset, so ranks are the only point ids in the system.
using Rank = std::uint32_t;

/// Inclusive rank interval [l, r], 1-based.
struct RankRange {
    Rank l = 1;
    Rank r = 1;

    constexpr std::uint64_t length() const { return static_cast<std::uint64_t>(r) - l + 1; }
    constexpr bool contains(Rank p) const { return l <= p && p <= r; }
    constexpr bool contains(const RankRange& other) const { return l <= other.l && other.r <= r; }

    friend constexpr auto operator<=>(const RankRange&, const RankRange&) = default;
};

/// Validates 1 <= l <= r (<= n when n > 0); throws std::invalid_argument otherwise.
RankRange make_range(Rank l, Rank r, Rank n = 0);

// Vectors in attribute-rank order: row i (1-based) is the point with rank i.
// Immutable after construction; safe for concurrent reads.
class Dataset {
 public:
    Dataset(std::vector<float> vectors, std::size_t n, std::size_t dim, std::string source_label);

    std::span<const float> point(Rank rank) const {
        return {vectors_.data() + (static_cast<std::size_t>(rank) - 1) * dim_, dim_};
    }

    std::size_t size() const { return n_; }
    std::size_t dim() const { return dim_; }
    const std::string& source_label() const { return label_; }
    const std::vector<float>& raw() const { return vectors_; }
    RankRange full_range() const { return {1, static_cast<Rank>(n_)}; }

    // FNV-1a over (dim, n, vector bytes); used to bind saved indexes to their data.
    std::uint64_t content_hash() const { return hash_; }

 private:
    std::vector<float> vectors_;
    std::size_t n_;
    std::size_t dim_;
    std::string label_;
    std::uint64_t hash_;
};

struct Query {
    std::vector<float> vec;
    RankRange range;
    std::uint32_t k = 1;
};

/// Beam-search knobs. `beam` is the initial result-queue width m (clamped up
/// to k at use sites); `beam_cap` bounds the geometric expansion used when a
/// filtered search comes back short.
struct SearchParams {
    std::uint32_t beam = 64;
    std::uint32_t beam_cap = kUnboundedBeam;
    std::uint32_t expansion_factor = 2;

    static constexpr std::uint32_t kUnboundedBeam = 0xFFFFFFFFu;
};

/// Threshold c in (0, 1] gating whether a stored superset range may serve a
/// query. c == 0 means "resolve to the structure default" (1/fanout).
struct ElasticPolicy {
    double c = 0.0;
};

/// sqrt(sum (a_i - b_i)^2), accumulated in double. Throws on dimension mismatch.
double euclidean_distance(std::span<const float> a, std::span<const float> b);

/// Squared form, same accumulation; avoids the sqrt on hot paths.
double squared_distance(std::span<const float> a, std::span<const float> b);

// Maps each original index to its 1-based rank under ascending attribute
// order. Ties break by original index (stable). NaN attributes are rejected.
std::vector<Rank> rerank_attributes(std::span<const double> raw_attrs);

// Def: max over stored supersets of |query| / |stored|; nullopt when no
// stored range contains the query.
std::optional<double> elastic_factor(std::span<const RankRange> ranges, RankRange query);

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed = 0xcbf29ce484222325ull);

}  // namespace rfann

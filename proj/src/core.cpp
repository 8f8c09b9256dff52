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

#include "rfann/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rfann {

std::uint64_t
fnv1a(const void* data, std::size_t bytes, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

RankRange
make_range(Rank l, Rank r, Rank n) {
    if (l < 1 || l > r) {
        throw std::invalid_argument("rank range requires 1 <= l <= r, got [" + std::to_string(l) +
                                    ", " + std::to_string(r) + "]");
    }
    if (n > 0 && r > n) {
        throw std::invalid_argument("rank range [" + std::to_string(l) + ", " + std::to_string(r) +
                                    "] exceeds dataset size " + std::to_string(n));
    }
    return {l, r};
}

Dataset::Dataset(std::vector<float> vectors, std::size_t n, std::size_t dim, std::string source_label)
    : vectors_(std::move(vectors)), n_(n), dim_(dim), label_(std::move(source_label)) {
    if (n_ < 1 || dim_ < 1) {
        throw std::invalid_argument("dataset requires n >= 1 and dim >= 1");
    }
    if (vectors_.size() != n_ * dim_) {
        throw std::invalid_argument("dataset storage size does not match n * dim");
    }
    for (float v : vectors_) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("dataset contains a non-finite component");
        }
    }
    std::uint64_t h = fnv1a(&dim_, sizeof(dim_));
    h = fnv1a(&n_, sizeof(n_), h);
    hash_ = fnv1a(vectors_.data(), vectors_.size() * sizeof(float), h);
}

double
squared_distance(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("distance requires equal dimensionality");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc;
}

double
euclidean_distance(std::span<const float> a, std::span<const float> b) {
    return std::sqrt(squared_distance(a, b));
}

std::vector<Rank>
rerank_attributes(std::span<const double> raw_attrs) {
    if (raw_attrs.empty()) {
        throw std::invalid_argument("rerank requires at least one attribute");
    }
    for (double v : raw_attrs) {
        if (std::isnan(v)) {
            throw std::invalid_argument("attributes must be comparable (NaN rejected)");
        }
    }
    std::vector<std::uint32_t> order(raw_attrs.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return raw_attrs[a] < raw_attrs[b]; });
    std::vector<Rank> ranks(raw_attrs.size());
    for (std::uint32_t pos = 0; pos < order.size(); ++pos) {
        ranks[order[pos]] = pos + 1;
    }
    return ranks;
}

std::optional<double>
elastic_factor(std::span<const RankRange> ranges, RankRange query) {
    std::optional<double> best;
    for (const RankRange& stored : ranges) {
        if (!stored.contains(query)) {
            continue;
        }
        const double e = static_cast<double>(query.length()) / static_cast<double>(stored.length());
        if (!best || e > *best) {
            best = e;
        }
    }
    return best;
}

}  // namespace rfann

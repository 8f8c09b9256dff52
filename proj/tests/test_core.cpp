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

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "rfann/core.hpp"

using namespace rfann;

TEST_SUITE_BEGIN("core");

TEST_CASE("euclidean distance on hand-checked pairs") {
    const float a[] = {0.0f, 0.0f};
    const float b[] = {3.0f, 4.0f};
    CHECK(euclidean_distance(a, b) == doctest::Approx(5.0));
    CHECK(euclidean_distance(b, b) == 0.0);

    const float c[] = {1.0f, 2.0f, 3.0f};
    const float d[] = {4.0f, 6.0f, 3.0f};
    CHECK(euclidean_distance(c, d) == doctest::Approx(5.0));
    CHECK(euclidean_distance(c, d) == euclidean_distance(d, c));
}

TEST_CASE("euclidean distance rejects dimension mismatch") {
    const float a[] = {0.0f, 0.0f};
    const float b[] = {1.0f, 2.0f, 3.0f};
    CHECK_THROWS_AS(euclidean_distance(a, b), std::invalid_argument);
}

TEST_CASE("triangle inequality on random triples") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<float> u(-5.0f, 5.0f);
    for (int t = 0; t < 500; ++t) {
        float x[6], y[6], z[6];
        for (int i = 0; i < 6; ++i) {
            x[i] = u(rng);
            y[i] = u(rng);
            z[i] = u(rng);
        }
        const double xy = euclidean_distance(x, y);
        const double yz = euclidean_distance(y, z);
        const double xz = euclidean_distance(x, z);
        CHECK(xz <= (xy + yz) * (1.0 + 1e-5));
    }
}

TEST_CASE("rerank orders attributes ascending") {
    const double attrs[] = {0.9, 0.1, 0.5};
    CHECK(rerank_attributes(attrs) == std::vector<Rank>{3, 1, 2});

    const double ascending[] = {1.0, 2.0, 3.0, 4.0};
    CHECK(rerank_attributes(ascending) == std::vector<Rank>{1, 2, 3, 4});

    const double ties[] = {5.0, 5.0, 1.0};
    CHECK(rerank_attributes(ties) == std::vector<Rank>{2, 3, 1});
}

TEST_CASE("rerank rejects NaN") {
    const double attrs[] = {1.0, std::nan(""), 2.0};
    CHECK_THROWS_AS(rerank_attributes(attrs), std::invalid_argument);
}

TEST_CASE("rerank output is a permutation") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> attrs(1 + rng() % 200);
        for (double& a : attrs) {
            a = rng() % 5 == 0 ? 0.5 : u(rng);  // force some ties
        }
        const std::vector<Rank> ranks = rerank_attributes(attrs);
        std::vector<bool> seen(attrs.size() + 1, false);
        for (Rank r : ranks) {
            REQUIRE(r >= 1);
            REQUIRE(r <= attrs.size());
            REQUIRE(!seen[r]);
            seen[r] = true;
        }
    }
}

TEST_CASE("elastic factor picks the tightest superset") {
    const RankRange ranges[] = {{1, 8}, {1, 4}};
    auto e = elastic_factor(ranges, {1, 3});
    REQUIRE(e.has_value());
    CHECK(*e == doctest::Approx(0.75));

    CHECK(*elastic_factor(ranges, {1, 4}) == doctest::Approx(1.0));

    const RankRange only[] = {{1, 8}};
    CHECK(!elastic_factor(only, {5, 9}).has_value());
    CHECK(!elastic_factor({}, {1, 2}).has_value());
}

TEST_CASE("elastic factor is monotone in the range set") {
    std::mt19937_64 rng(37);
    auto random_range = [&](Rank n) {
        Rank a = 1 + rng() % n;
        Rank b = 1 + rng() % n;
        return RankRange{std::min(a, b), std::max(a, b)};
    };
    for (int t = 0; t < 200; ++t) {
        const Rank n = 64;
        std::vector<RankRange> ranges;
        for (int i = 0; i < 6; ++i) {
            ranges.push_back(random_range(n));
        }
        const RankRange query = random_range(n);
        const auto before = elastic_factor(ranges, query);
        ranges.push_back(random_range(n));
        const auto after = elastic_factor(ranges, query);
        if (before.has_value()) {
            REQUIRE(after.has_value());
            CHECK(*after >= *before);
        }
    }
}

TEST_CASE("dataset validates its invariants") {
    CHECK_THROWS_AS(Dataset({}, 0, 4, "empty"), std::invalid_argument);
    CHECK_THROWS_AS(Dataset({1.0f, 2.0f}, 2, 2, "short"), std::invalid_argument);
    CHECK_THROWS_AS(Dataset({1.0f, std::nanf("")}, 1, 2, "nan"), std::invalid_argument);

    const Dataset d({1.0f, 2.0f, 3.0f, 4.0f}, 2, 2, "ok");
    CHECK(d.point(1)[0] == 1.0f);
    CHECK(d.point(2)[1] == 4.0f);
    CHECK(d.full_range() == RankRange{1, 2});
    CHECK(d.content_hash() == Dataset({1.0f, 2.0f, 3.0f, 4.0f}, 2, 2, "other").content_hash());
}

TEST_CASE("make_range validates bounds") {
    CHECK_THROWS_AS(make_range(3, 2), std::invalid_argument);
    CHECK_THROWS_AS(make_range(0, 2), std::invalid_argument);
    CHECK_THROWS_AS(make_range(1, 5, 4), std::invalid_argument);
    CHECK(make_range(2, 5).length() == 4);
}

TEST_SUITE_END();

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

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "rfann/harness.hpp"
#include "rfann/storage.hpp"

using namespace rfann;

namespace {

struct TempFile {
    std::filesystem::path path;

    explicit TempFile(const std::string& name)
        : path(std::filesystem::temp_directory_path() / name) {}
    ~TempFile() { std::filesystem::remove(path); }
};

std::vector<char>
slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE_BEGIN("storage");

TEST_CASE("half index survives a save/load round trip byte-for-byte") {
    auto dataset = synthesize_dataset(300, 6, 4, 501).dataset;
    const HalfIndex index = HalfIndex::build(dataset, HalfIndexParams{}, GraphParams{});

    TempFile f1("rfann_half_a.idx");
    TempFile f2("rfann_half_b.idx");
    const std::uint64_t bytes = save_index(index, f1.path);
    CHECK(bytes == std::filesystem::file_size(f1.path));
    CHECK(peek_index_kind(f1.path) == IndexKind::Half);

    const HalfIndex loaded = load_half_index(f1.path, dataset);
    save_index(loaded, f2.path);
    CHECK(slurp(f1.path) == slurp(f2.path));

    REQUIRE(loaded.snapshots().size() == index.snapshots().size());
    for (std::size_t i = 0; i < index.snapshots().size(); ++i) {
        CHECK(loaded.snapshots()[i].range == index.snapshots()[i].range);
        CHECK(serialize_graph(loaded.snapshots()[i].graph) ==
              serialize_graph(index.snapshots()[i].graph));
    }
}

TEST_CASE("loaded half index answers queries identically") {
    auto dataset = synthesize_dataset(300, 6, 4, 503).dataset;
    const HalfIndex index = HalfIndex::build(dataset, HalfIndexParams{}, GraphParams{});
    TempFile f("rfann_half_q.idx");
    save_index(index, f.path);
    const HalfIndex loaded = load_half_index(f.path, dataset);

    const VectorFile qvecs = synthesize_queries(16, 6, 4, 505);
    SearchParams params;
    params.beam = 12;
    std::mt19937_64 rng(507);
    for (int t = 0; t < 30; ++t) {
        Query q{{qvecs.row(t % 16).begin(), qvecs.row(t % 16).end()},
                {1, static_cast<Rank>(1 + rng() % 300)},
                10};
        const HalfIndex::QueryResult a = index.query(q, params);
        const HalfIndex::QueryResult b = loaded.query(q, params);
        CHECK(a.neighbors == b.neighbors);
        CHECK(a.stats == b.stats);
        CHECK(a.snapshot_range == b.snapshot_range);
    }
}

TEST_CASE("tree index round trip preserves structure and counters") {
    auto dataset = synthesize_dataset(400, 6, 4, 509).dataset;
    TreeParams tp;
    tp.leaf_threshold = 32;
    const TreeIndex index = TreeIndex::build(dataset, tp, GraphParams{});

    TempFile f1("rfann_tree_a.idx");
    TempFile f2("rfann_tree_b.idx");
    save_index(index, f1.path);
    CHECK(peek_index_kind(f1.path) == IndexKind::Tree);

    const TreeIndex loaded = load_tree_index(f1.path, dataset);
    save_index(loaded, f2.path);
    CHECK(slurp(f1.path) == slurp(f2.path));

    CHECK(loaded.build_insert_count() == index.build_insert_count());
    CHECK(loaded.count_stored_nodes() == index.count_stored_nodes());
    REQUIRE(loaded.nodes().size() == index.nodes().size());
    for (const auto& [range, graph] : index.nodes()) {
        REQUIRE(loaded.nodes().count(range) == 1);
        CHECK(serialize_graph(loaded.nodes().at(range)) == serialize_graph(graph));
    }

    const VectorFile qvecs = synthesize_queries(8, 6, 4, 511);
    SearchParams params;
    params.beam = 12;
    std::mt19937_64 rng(513);
    for (int t = 0; t < 30; ++t) {
        Rank a = 1 + rng() % 400;
        Rank b = 1 + rng() % 400;
        Query q{{qvecs.row(t % 8).begin(), qvecs.row(t % 8).end()},
                {std::min(a, b), std::max(a, b)},
                10};
        const TreeIndex::QueryResult x = index.query(q, params);
        const TreeIndex::QueryResult y = loaded.query(q, params);
        CHECK(x.neighbors == y.neighbors);
        CHECK(x.stats == y.stats);
    }
}

TEST_CASE("an empty tree serializes to a header-only file") {
    auto dataset = synthesize_dataset(32, 4, 4, 515).dataset;
    TreeParams tp;
    tp.leaf_threshold = 64;  // larger than n: nothing is indexed
    const TreeIndex index = TreeIndex::build(dataset, tp, GraphParams{});
    REQUIRE(index.nodes().empty());

    TempFile f("rfann_tree_empty.idx");
    save_index(index, f.path);
    const TreeIndex loaded = load_tree_index(f.path, dataset);
    CHECK(loaded.nodes().empty());
    CHECK(loaded.count_stored_nodes() == 0);
}

TEST_CASE("load rejects the wrong dataset, corruption and version skew") {
    auto dataset = synthesize_dataset(200, 5, 4, 517).dataset;
    const HalfIndex index = HalfIndex::build(dataset, HalfIndexParams{}, GraphParams{});
    TempFile f("rfann_reject.idx");
    save_index(index, f.path);

    SUBCASE("hash mismatch") {
        auto other = synthesize_dataset(200, 5, 4, 519).dataset;
        CHECK_THROWS_AS(load_half_index(f.path, other), DatasetHashMismatchError);
    }

    SUBCASE("kind mismatch") {
        CHECK_THROWS_AS(load_tree_index(f.path, dataset), CorruptFileError);
    }

    SUBCASE("truncation") {
        std::vector<char> bytes = slurp(f.path);
        bytes.resize(bytes.size() / 2);
        std::ofstream out(f.path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.close();
        CHECK_THROWS_AS(load_half_index(f.path, dataset), CorruptFileError);
    }

    SUBCASE("bit flip") {
        std::vector<char> bytes = slurp(f.path);
        bytes[bytes.size() / 2] ^= 0x40;
        std::ofstream out(f.path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.close();
        CHECK_THROWS_AS(load_half_index(f.path, dataset), CorruptFileError);
    }

    SUBCASE("version mismatch") {
        std::vector<char> bytes = slurp(f.path);
        bytes[4] = 9;  // version field follows the 4 magic bytes
        // refresh the trailing checksum so only the version is wrong
        const std::uint64_t sum = fnv1a(bytes.data(), bytes.size() - 8);
        std::memcpy(bytes.data() + bytes.size() - 8, &sum, 8);
        std::ofstream out(f.path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.close();
        CHECK_THROWS_AS(load_half_index(f.path, dataset), VersionMismatchError);
    }
}

TEST_CASE("loaded graphs pass the structural invariants") {
    auto dataset = synthesize_dataset(256, 5, 4, 521).dataset;
    TreeParams tp;
    tp.leaf_threshold = 16;
    const TreeIndex index = TreeIndex::build(dataset, tp, GraphParams{});
    TempFile f("rfann_tree_valid.idx");
    save_index(index, f.path);
    const TreeIndex loaded = load_tree_index(f.path, dataset);
    for (const auto& [range, graph] : loaded.nodes()) {
        graph.validate_structure();  // throws on violation
        CHECK(graph.entry_point() != 0);
    }
}

TEST_SUITE_END();

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

#include "rfann/storage.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace rfann {

namespace {

constexpr char kMagic[4] = {'R', 'F', 'I', 'X'};

class Writer {
 public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) {
            buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void bytes(const std::vector<std::uint8_t>& b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

    std::vector<std::uint8_t> take() { return std::move(buf_); }
    const std::vector<std::uint8_t>& data() const { return buf_; }

 private:
    std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
    explicit Reader(std::vector<std::uint8_t> data) : data_(std::move(data)) {}

    std::uint8_t u8() { return take(1)[0]; }
    std::uint32_t u32() {
        const std::uint8_t* p = take(4);
        return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
               static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        const std::uint8_t* p = take(8);
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
        }
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }

    std::size_t offset() const { return off_; }
    std::size_t size() const { return data_.size(); }
    const std::vector<std::uint8_t>& data() const { return data_; }

 private:
    const std::uint8_t* take(std::size_t n) {
        if (off_ + n > data_.size()) {
            throw CorruptFileError("truncated index file at byte offset " + std::to_string(off_));
        }
        const std::uint8_t* p = data_.data() + off_;
        off_ += n;
        return p;
    }

    std::vector<std::uint8_t> data_;
    std::size_t off_ = 0;
};

void
write_graph(Writer& w, const GraphIndex& graph) {
    w.u64(graph.size());
    w.u32(graph.entry_point());
    for (Rank pos : graph.members_sorted()) {
        w.u32(pos);
        const int level = graph.level_of(pos);
        w.u32(static_cast<std::uint32_t>(level));
        const auto& layers = graph.layers_of(pos);
        for (int l = 0; l <= level; ++l) {
            w.u32(static_cast<std::uint32_t>(layers[l].size()));
            for (Rank nb : layers[l]) {
                w.u32(nb);
            }
        }
    }
}

GraphIndex
read_graph(Reader& r, const GraphParams& params) {
    const std::uint64_t count = r.u64();
    const Rank entry = r.u32();
    std::vector<GraphIndex::NodeSpec> nodes;
    nodes.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        GraphIndex::NodeSpec ns;
        ns.position = r.u32();
        const std::uint32_t level = r.u32();
        if (level > 64) {
            throw CorruptFileError("implausible node level at byte offset " +
                                   std::to_string(r.offset()));
        }
        ns.level = static_cast<int>(level);
        ns.layers.resize(level + 1);
        for (std::uint32_t l = 0; l <= level; ++l) {
            const std::uint32_t degree = r.u32();
            ns.layers[l].reserve(degree);
            for (std::uint32_t e = 0; e < degree; ++e) {
                ns.layers[l].push_back(r.u32());
            }
        }
        nodes.push_back(std::move(ns));
    }
    try {
        return GraphIndex::from_parts(params, std::move(nodes), entry);
    } catch (const std::exception& e) {
        throw CorruptFileError(std::string("invalid graph in index file: ") + e.what());
    }
}

void
write_header(Writer& w, IndexKind kind, std::uint64_t dataset_hash, const GraphParams& gp) {
    for (char c : kMagic) {
        w.u8(static_cast<std::uint8_t>(c));
    }
    w.u32(kIndexFormatVersion);
    w.u8(static_cast<std::uint8_t>(kind));
    w.u64(dataset_hash);
    w.u32(gp.max_degree);
    w.u32(gp.ef_construction);
    w.f64(gp.level_scale);
    w.u64(gp.seed);
}

std::uint64_t
finish(Writer& w, const std::filesystem::path& path) {
    const std::uint64_t checksum = fnv1a(w.data().data(), w.data().size());
    w.u64(checksum);
    std::vector<std::uint8_t> bytes = w.take();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw StorageError("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw StorageError("write failed for " + path.string());
    }
    return bytes.size();
}

Reader
open_checked(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw StorageError("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (bytes.size() < 4 + 4 + 1 + 8 + 8) {
        throw CorruptFileError("index file too small: " + path.string());
    }
    const std::size_t body = bytes.size() - 8;
    std::uint64_t stored = 0;
    for (int i = 0; i < 8; ++i) {
        stored |= static_cast<std::uint64_t>(bytes[body + i]) << (8 * i);
    }
    if (fnv1a(bytes.data(), body) != stored) {
        throw CorruptFileError("checksum mismatch in " + path.string());
    }
    bytes.resize(body);
    return Reader(std::move(bytes));
}

struct Header {
    IndexKind kind;
    std::uint64_t dataset_hash;
    GraphParams graph_params;
};

Header
read_header(Reader& r) {
    for (char c : kMagic) {
        if (r.u8() != static_cast<std::uint8_t>(c)) {
            throw CorruptFileError("bad magic bytes");
        }
    }
    const std::uint32_t version = r.u32();
    if (version != kIndexFormatVersion) {
        throw VersionMismatchError("unsupported index format version " + std::to_string(version));
    }
    Header h{};
    const std::uint8_t kind = r.u8();
    if (kind > 1) {
        throw CorruptFileError("unknown index kind " + std::to_string(kind));
    }
    h.kind = static_cast<IndexKind>(kind);
    h.dataset_hash = r.u64();
    h.graph_params.max_degree = r.u32();
    h.graph_params.ef_construction = r.u32();
    h.graph_params.level_scale = r.f64();
    h.graph_params.seed = r.u64();
    return h;
}

void
check_dataset(const Header& h, const Dataset& dataset) {
    if (h.dataset_hash != dataset.content_hash()) {
        throw DatasetHashMismatchError("index was built for a different dataset");
    }
}

}  // namespace

std::vector<std::uint8_t>
serialize_graph(const GraphIndex& graph) {
    Writer w;
    write_graph(w, graph);
    return w.take();
}

std::uint64_t
save_index(const HalfIndex& index, const std::filesystem::path& path) {
    Writer w;
    write_header(w, IndexKind::Half, index.dataset()->content_hash(), index.graph_params());
    w.u32(index.params().base);
    w.u8(static_cast<std::uint8_t>(index.params().direction));
    w.u32(static_cast<std::uint32_t>(index.snapshots().size()));
    for (const RangedIndex& snap : index.snapshots()) {
        w.u32(snap.range.l);
        w.u32(snap.range.r);
        write_graph(w, snap.graph);
    }
    return finish(w, path);
}

std::uint64_t
save_index(const TreeIndex& index, const std::filesystem::path& path) {
    Writer w;
    write_header(w, IndexKind::Tree, index.dataset()->content_hash(), index.graph_params());
    w.u32(index.params().fanout);
    w.u32(index.params().leaf_threshold);
    w.f64(index.params().elastic.c);
    w.u64(index.build_insert_count());
    w.u32(static_cast<std::uint32_t>(index.nodes().size()));
    for (const auto& [range, graph] : index.nodes()) {
        w.u32(range.l);
        w.u32(range.r);
        write_graph(w, graph);
    }
    return finish(w, path);
}

IndexKind
peek_index_kind(const std::filesystem::path& path) {
    Reader r = open_checked(path);
    return read_header(r).kind;
}

HalfIndex
load_half_index(const std::filesystem::path& path, std::shared_ptr<const Dataset> dataset) {
    if (!dataset) {
        throw std::invalid_argument("load requires a dataset");
    }
    Reader r = open_checked(path);
    const Header h = read_header(r);
    if (h.kind != IndexKind::Half) {
        throw CorruptFileError("index file does not hold a half-bounded index");
    }
    check_dataset(h, *dataset);

    HalfIndexParams params;
    params.base = r.u32();
    const std::uint8_t dir = r.u8();
    if (dir > 1) {
        throw CorruptFileError("unknown anchor direction");
    }
    params.direction = static_cast<AnchorSide>(dir);

    const std::uint32_t count = r.u32();
    std::vector<RangedIndex> snapshots;
    snapshots.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const Rank l = r.u32();
        const Rank rr = r.u32();
        GraphIndex g = read_graph(r, h.graph_params);
        snapshots.push_back(RangedIndex{{l, rr}, std::move(g)});
    }
    try {
        return HalfIndex::restore(std::move(dataset), params, h.graph_params, std::move(snapshots));
    } catch (const std::runtime_error& e) {
        throw CorruptFileError(std::string("inconsistent half index: ") + e.what());
    }
}

TreeIndex
load_tree_index(const std::filesystem::path& path, std::shared_ptr<const Dataset> dataset) {
    if (!dataset) {
        throw std::invalid_argument("load requires a dataset");
    }
    Reader r = open_checked(path);
    const Header h = read_header(r);
    if (h.kind != IndexKind::Tree) {
        throw CorruptFileError("index file does not hold a segment-tree index");
    }
    check_dataset(h, *dataset);

    TreeParams params;
    params.fanout = r.u32();
    params.leaf_threshold = r.u32();
    params.elastic.c = r.f64();
    const std::uint64_t inserts = r.u64();

    const std::uint32_t count = r.u32();
    std::map<RankRange, GraphIndex> nodes;
    for (std::uint32_t i = 0; i < count; ++i) {
        const Rank l = r.u32();
        const Rank rr = r.u32();
        GraphIndex g = read_graph(r, h.graph_params);
        if (!nodes.emplace(RankRange{l, rr}, std::move(g)).second) {
            throw CorruptFileError("duplicate range in index file");
        }
    }
    try {
        return TreeIndex::restore(std::move(dataset), params, h.graph_params, std::move(nodes),
                                  inserts);
    } catch (const std::runtime_error& e) {
        throw CorruptFileError(std::string("inconsistent tree index: ") + e.what());
    }
}

}  // namespace rfann

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
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "rfann/half_index.hpp"
#include "rfann/tree_index.hpp"

namespace rfann {

// Deterministic little-endian index files: identical indexes serialize to
// identical bytes. Vectors are not stored; the file is bound to its dataset
// by content hash. Layout documented in docs/index_format.md.

class StorageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class CorruptFileError : public StorageError {
    using StorageError::StorageError;
};

class VersionMismatchError : public StorageError {
    using StorageError::StorageError;
};

class DatasetHashMismatchError : public StorageError {
    using StorageError::StorageError;
};

enum class IndexKind : std::uint8_t { Half = 0, Tree = 1 };

constexpr std::uint32_t kIndexFormatVersion = 1;

/// Returns the number of bytes written.
std::uint64_t save_index(const HalfIndex& index, const std::filesystem::path& path);
std::uint64_t save_index(const TreeIndex& index, const std::filesystem::path& path);

IndexKind peek_index_kind(const std::filesystem::path& path);

HalfIndex load_half_index(const std::filesystem::path& path,
                          std::shared_ptr<const Dataset> dataset);
TreeIndex load_tree_index(const std::filesystem::path& path,
                          std::shared_ptr<const Dataset> dataset);

/// Canonical byte image of one graph (nodes ascending by position, layers in
/// order); the building block of the index files, exposed for equality and
/// isolation checks.
std::vector<std::uint8_t> serialize_graph(const GraphIndex& graph);

}  // namespace rfann

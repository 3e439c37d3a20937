/* Copyright 2026 The Newton-GRAPE Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "grape/types.hpp"

// Memoisation of expensive matrix functions keyed by a cryptographic digest
// of the argument. Looking a matrix up costs one hashing pass over its
// stored values, independent of how many entries the cache holds.
namespace grape::cache {

enum class hash_algorithm { sha256, sha1, md5 };

// Streaming hash: a sequence of update() calls digests the concatenation of
// all chunks as a single message.
class digester {
 public:
  virtual ~digester() = default;
  virtual void update(std::span<const std::byte> chunk) = 0;
  virtual std::vector<std::uint8_t> finish() = 0;
};

using digester_factory = std::function<std::unique_ptr<digester>()>;

digester_factory make_digester_factory(hash_algorithm algorithm);

struct cache_key {
  std::vector<std::uint8_t> digest;
  std::string function_tag;
  std::string scalar_params;

  std::string hex() const;
  friend bool operator==(const cache_key &, const cache_key &) = default;
};

// Canonical little-endian IEEE-754 encoding of the scalars entering a function.
std::string encode_scalars(std::initializer_list<double> values);

// Full matrices: dimensions followed by the raw column-major value bytes.
cache_key matrix_digest(const cx_mat &m, std::string_view tag, std::string_view scalars,
                        const digester_factory &hasher = make_digester_factory(hash_algorithm::sha256));

// Sparse matrices: index arrays, value array and dimensions of the compressed
// representation. A sparse and a dense copy of one matrix hash differently.
cache_key matrix_digest(const sp_cx_mat &m, std::string_view tag, std::string_view scalars,
                        const digester_factory &hasher = make_digester_factory(hash_algorithm::sha256));

struct cache_stats {
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::size_t puts = 0;
  std::size_t bytes_stored = 0;
};

struct cache_config {
  // Matrices of dimension <= threshold are recomputed rather than cached.
  std::size_t dimension_threshold = 512;
  // Compare the stored argument element-by-element on every hit.
  bool verify_on_hit = false;
  // Directory-of-files backend; one file per entry named by the hex digest.
  std::optional<std::filesystem::path> directory;
  hash_algorithm hash = hash_algorithm::sha256;
};

class expm_cache {
 public:
  using compute_fn = std::function<cx_mat(const cx_mat &)>;

  explicit expm_cache(cache_config config = {}, compute_fn compute = {});

  const cache_config &config() const { return config_; }
  const digester_factory &hasher() const { return hasher_; }

  // Counts a hit or a miss. `argument` is only consulted when verify_on_hit.
  std::optional<cx_mat> lookup(const cache_key &key, const cx_mat *argument = nullptr);
  void store(const cache_key &key, const cx_mat &value, const cx_mat *argument = nullptr);

  cx_mat compute(const cx_mat &a) const { return compute_(a); }

  cache_stats stats() const;
  std::size_t size() const;
  // Drops all entries, in memory and on disk.
  void clear();

  // Messages about backend failures that were recovered from.
  std::vector<std::string> warnings() const;

 private:
  struct entry {
    cx_mat value;
    std::optional<cx_mat> argument;
  };

  std::optional<entry> load_file(const std::string &hex);
  void write_file(const std::string &hex, const entry &e);
  void warn(std::string message);

  cache_config config_;
  compute_fn compute_;
  digester_factory hasher_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, entry> entries_;
  std::vector<std::string> warnings_;
  std::atomic<std::size_t> hits_{0}, misses_{0}, puts_{0}, bytes_{0};
};

// exp(-i h dt), served from the cache when h is larger than the configured
// threshold. Results are bit-identical with and without caching.
cx_mat cached_expm(expm_cache &store, const cx_mat &h, double dt);

// On-disk entry format (all integers and floats little-endian):
//   "GEXP" | u32 version = 1 | u64 rows | u64 cols | rows*cols x (f64 re, f64 im)
// values in column-major order.
void write_matrix_file(const std::filesystem::path &path, const cx_mat &m);
cx_mat read_matrix_file(const std::filesystem::path &path);

}  // namespace grape::cache

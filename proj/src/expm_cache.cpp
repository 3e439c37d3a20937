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

#include "grape/expm_cache.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iostream>
#include <mutex>

#include "grape/expm.hpp"

namespace grape::cache {

namespace {

class evp_digester final : public digester {
 public:
  explicit evp_digester(const EVP_MD *md) : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, md, nullptr) != 1)
      throw std::runtime_error("hash initialisation failed");
  }
  ~evp_digester() override { EVP_MD_CTX_free(ctx_); }
  evp_digester(const evp_digester &) = delete;
  evp_digester &operator=(const evp_digester &) = delete;

  void update(std::span<const std::byte> chunk) override {
    if (!chunk.empty() && EVP_DigestUpdate(ctx_, chunk.data(), chunk.size()) != 1)
      throw std::runtime_error("hash update failed");
  }

  std::vector<std::uint8_t> finish() override {
    std::array<unsigned char, EVP_MAX_MD_SIZE> buf{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, buf.data(), &len) != 1)
      throw std::runtime_error("hash finalisation failed");
    return {buf.begin(), buf.begin() + len};
  }

 private:
  EVP_MD_CTX *ctx_;
};

void put_u64(std::string &out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const unsigned char *p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{p[i]} << (8 * i);
  return v;
}

template <class T>
std::span<const std::byte> bytes_of(const T *data, std::size_t count) {
  return {reinterpret_cast<const std::byte *>(data), count * sizeof(T)};
}

std::span<const std::byte> bytes_of(std::string_view s) {
  return {reinterpret_cast<const std::byte *>(s.data()), s.size()};
}

void hash_header(digester &h, std::string_view tag, std::string_view kind) {
  h.update(bytes_of(tag));
  const std::byte separator{0};
  h.update({&separator, 1});
  h.update(bytes_of(kind));
}

std::string dims_bytes(std::uint64_t rows, std::uint64_t cols) {
  std::string out;
  put_u64(out, rows);
  put_u64(out, cols);
  return out;
}

}  // namespace

digester_factory make_digester_factory(hash_algorithm algorithm) {
  switch (algorithm) {
    case hash_algorithm::sha256:
      return [] { return std::make_unique<evp_digester>(EVP_sha256()); };
    case hash_algorithm::sha1:
      return [] { return std::make_unique<evp_digester>(EVP_sha1()); };
    case hash_algorithm::md5:
      return [] { return std::make_unique<evp_digester>(EVP_md5()); };
  }
  throw invalid_input("unknown hash algorithm");
}

std::string cache_key::hex() const {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(digest.size() * 2);
  for (auto byte : digest) {
    out.push_back(digits[byte >> 4]);
    out.push_back(digits[byte & 0xf]);
  }
  return out;
}

std::string encode_scalars(std::initializer_list<double> values) {
  std::string out;
  for (double v : values) put_u64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

cache_key matrix_digest(const cx_mat &m, std::string_view tag, std::string_view scalars,
                        const digester_factory &hasher) {
  static_assert(std::endian::native == std::endian::little,
                "raw value hashing assumes a little-endian host");
  auto h = hasher();
  hash_header(*h, tag, "full");
  h->update(bytes_of(dims_bytes(m.rows(), m.cols())));
  h->update(bytes_of(m.data(), static_cast<std::size_t>(m.size())));
  h->update(bytes_of(scalars));
  return {h->finish(), std::string(tag), std::string(scalars)};
}

cache_key matrix_digest(const sp_cx_mat &m, std::string_view tag, std::string_view scalars,
                        const digester_factory &hasher) {
  if (!m.isCompressed()) throw invalid_input("sparse digest needs a compressed matrix");
  auto h = hasher();
  hash_header(*h, tag, "sparse");
  h->update(bytes_of(m.outerIndexPtr(), static_cast<std::size_t>(m.outerSize()) + 1));
  h->update(bytes_of(m.innerIndexPtr(), static_cast<std::size_t>(m.nonZeros())));
  h->update(bytes_of(m.valuePtr(), static_cast<std::size_t>(m.nonZeros())));
  h->update(bytes_of(dims_bytes(m.rows(), m.cols())));
  h->update(bytes_of(scalars));
  return {h->finish(), std::string(tag), std::string(scalars)};
}

void write_matrix_file(const std::filesystem::path &path, const cx_mat &m) {
  std::string buf = "GEXP";
  buf.append({1, 0, 0, 0});
  put_u64(buf, static_cast<std::uint64_t>(m.rows()));
  put_u64(buf, static_cast<std::uint64_t>(m.cols()));
  buf.reserve(buf.size() + static_cast<std::size_t>(m.size()) * 16);
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    put_u64(buf, std::bit_cast<std::uint64_t>(m.data()[k].real()));
    put_u64(buf, std::bit_cast<std::uint64_t>(m.data()[k].imag()));
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

cx_mat read_matrix_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < 24 || std::memcmp(buf.data(), "GEXP", 4) != 0 || buf[4] != 1)
    throw std::runtime_error("bad cache file header: " + path.string());
  const auto rows = get_u64(buf.data() + 8);
  const auto cols = get_u64(buf.data() + 16);
  if (buf.size() != 24 + rows * cols * 16)
    throw std::runtime_error("truncated cache file: " + path.string());
  cx_mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const unsigned char *p = buf.data() + 24;
  for (Eigen::Index k = 0; k < m.size(); ++k, p += 16)
    m.data()[k] = {std::bit_cast<double>(get_u64(p)), std::bit_cast<double>(get_u64(p + 8))};
  return m;
}

expm_cache::expm_cache(cache_config config, compute_fn compute)
    : config_(std::move(config)),
      compute_(compute ? std::move(compute) : compute_fn([](const cx_mat &a) { return expm(a); })),
      hasher_(make_digester_factory(config_.hash)) {
  if (config_.directory) {
    std::error_code ec;
    std::filesystem::create_directories(*config_.directory, ec);
    if (ec) warn("cannot create cache directory: " + ec.message());
  }
}

std::optional<expm_cache::entry> expm_cache::load_file(const std::string &hex) {
  if (!config_.directory) return std::nullopt;
  const auto path = *config_.directory / hex;
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    entry e{read_matrix_file(path), std::nullopt};
    if (config_.verify_on_hit) {
      auto arg_path = path;
      arg_path += ".arg";
      if (std::filesystem::exists(arg_path, ec)) e.argument = read_matrix_file(arg_path);
    }
    return e;
  } catch (const std::exception &ex) {
    warn(std::string("cache read failed, recomputing: ") + ex.what());
    return std::nullopt;
  }
}

void expm_cache::write_file(const std::string &hex, const entry &e) {
  if (!config_.directory) return;
  try {
    const auto path = *config_.directory / hex;
    write_matrix_file(path, e.value);
    if (e.argument) {
      auto arg_path = path;
      arg_path += ".arg";
      write_matrix_file(arg_path, *e.argument);
    }
  } catch (const std::exception &ex) {
    warn(std::string("cache write failed: ") + ex.what());
  }
}

void expm_cache::warn(std::string message) {
  std::cerr << "warning: " << message << '\n';
  std::unique_lock lock(mutex_);
  warnings_.push_back(std::move(message));
}

std::optional<cx_mat> expm_cache::lookup(const cache_key &key, const cx_mat *argument) {
  const auto hex = key.hex();
  std::optional<entry> found;
  {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(hex); it != entries_.end()) found = it->second;
  }
  if (!found) {
    found = load_file(hex);
    if (found) {
      std::unique_lock lock(mutex_);
      entries_.try_emplace(hex, *found);
    }
  }
  if (found && config_.verify_on_hit && argument) {
    if (!found->argument || *found->argument != *argument) found.reset();
  }
  if (!found) {
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  return std::move(found->value);
}

void expm_cache::store(const cache_key &key, const cx_mat &value, const cx_mat *argument) {
  entry e{value, std::nullopt};
  if (config_.verify_on_hit && argument) e.argument = *argument;
  const auto hex = key.hex();
  write_file(hex, e);
  std::unique_lock lock(mutex_);
  auto [it, inserted] = entries_.insert_or_assign(hex, std::move(e));
  ++puts_;
  if (inserted) bytes_ += static_cast<std::size_t>(value.size()) * sizeof(cx);
}

cache_stats expm_cache::stats() const {
  return {hits_.load(), misses_.load(), puts_.load(), bytes_.load()};
}

std::size_t expm_cache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void expm_cache::clear() {
  std::unique_lock lock(mutex_);
  entries_.clear();
  bytes_ = 0;
  if (config_.directory) {
    std::error_code ec;
    for (const auto &f : std::filesystem::directory_iterator(*config_.directory, ec))
      std::filesystem::remove(f.path(), ec);
  }
}

std::vector<std::string> expm_cache::warnings() const {
  std::shared_lock lock(mutex_);
  return warnings_;
}

cx_mat cached_expm(expm_cache &store, const cx_mat &h, double dt) {
  if (h.rows() != h.cols()) throw invalid_input("cached_expm: matrix must be square");
  const cx_mat generator = cx{0.0, -dt} * h;
  if (static_cast<std::size_t>(h.rows()) <= store.config().dimension_threshold)
    return store.compute(generator);
  const auto key = matrix_digest(h, "expm", encode_scalars({dt}), store.hasher());
  if (auto hit = store.lookup(key, &h)) return std::move(*hit);
  cx_mat value = store.compute(generator);
  store.store(key, value, &h);
  return value;
}

}  // namespace grape::cache

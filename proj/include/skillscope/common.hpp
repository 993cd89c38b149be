#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace skillscope {

/// Error raised for bad input, bad configuration or violated preconditions.
/// `code()` is a short machine-readable reason such as "corpus_empty" or
/// "zero_variance:Cognitive"; `what()` carries the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  explicit Error(std::string code) : std::runtime_error(code), code_(code) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Resolves a bundled resource (stopword list, lemma table, scheme files).
/// SKILLSCOPE_DATA_DIR in the environment overrides the compiled-in root.
std::filesystem::path resource_path(std::string_view relative);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// 64-bit FNV-1a; stable across platforms, used for manifest and report hashes.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

// RFC 4180 CSV. Quoted fields may contain separators, doubled quotes and newlines.
using CsvRow = std::vector<std::string>;
std::vector<CsvRow> parse_csv(std::string_view text);
std::string csv_escape(std::string_view field);
std::string csv_line(const std::vector<std::string>& fields);

/// Worker count from SKILLSCOPE_THREADS (default: hardware concurrency, at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, n) over contiguous chunks. Each index is visited
/// exactly once, so writes to slot i give results independent of worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Shortest round-trip decimal representation of a double.
std::string format_double(double value);
/// Fixed-point rendering with `digits` decimals.
std::string fixed(double value, int digits);

}  // namespace skillscope

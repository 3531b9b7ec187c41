#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <unistd.h>
#include <string>
#include <vector>

#ifndef INTEND_TEST_DATA_DIR
#define INTEND_TEST_DATA_DIR "."
#endif

namespace testutil {

inline std::filesystem::path data_dir() { return INTEND_TEST_DATA_DIR; }

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Unique fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    path_ = base / ("intend-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
                    std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Deterministic word soup for fuzzed metric configurations.
class WordSoup {
 public:
  explicit WordSoup(std::uint64_t seed) : rng_(seed) {}

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

  std::string word() {
    static const std::vector<std::string> vocab = {
        "man",  "woman", "bag",   "knife", "night", "noon",  "ran",   "walked",
        "red",  "green", "tall",  "short", "gate",  "booth", "car",   "bike",
        "fire", "smoke", "angry", "calm",  "debt",  "money", "north", "south",
    };
    return vocab[below(vocab.size())];
  }

  std::vector<std::string> words(std::size_t min_len, std::size_t max_len) {
    const std::size_t n = min_len + below(max_len - min_len + 1);
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(word());
    return out;
  }

  static std::string join(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
      if (!out.empty()) out += " ";
      out += t;
    }
    return out;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace testutil

#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "gpmal/dataset.hpp"

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("gpmal_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name, const std::string& contents) const {
    const auto p = path_ / name;
    std::ofstream(p) << contents;
    return p;
  }

 private:
  std::filesystem::path path_;
};

/// Well-separated Gaussian blobs in the first `informative` columns plus
/// uniform noise columns, scaled to [0,1]. Labels are "c0", "c1", ...
inline gpmal::Dataset blobs(std::size_t n, std::size_t classes, std::size_t informative,
                            std::size_t noise, std::uint64_t seed, double spread = 0.05) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, spread);
  std::vector<std::vector<double>> centres(classes, std::vector<double>(informative));
  for (auto& c : centres)
    for (auto& v : c) v = u(rng);
  gpmal::Dataset d;
  d.features = gpmal::Matrix(n, informative + noise);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % classes;
    for (std::size_t f = 0; f < informative; ++f) d.features(i, f) = centres[c][f] + g(rng);
    for (std::size_t f = 0; f < noise; ++f) d.features(i, informative + f) = u(rng);
    d.labels.push_back("c" + std::to_string(c));
  }
  for (std::size_t f = 0; f < informative + noise; ++f) d.feature_names.push_back("x" + std::to_string(f));
  return gpmal::scale_min_max(std::move(d));
}

}  // namespace testing

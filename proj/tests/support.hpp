#pragma once

// Synthetic data shared by the unit tests and the acceptance runner.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "rankmerge/matrix.hpp"

namespace rankmerge::testing {

inline std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
  return out;
}

inline DataMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, const std::string& col_prefix = "S") {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  std::vector<double> values(rows * cols);
  for (auto& v : values) v = dist(rng);
  return DataMatrix(numbered("G", rows), numbered(col_prefix, cols), std::move(values));
}

inline Dataset make_dataset(DataMatrix m, const std::string& name, const std::string& label) {
  const auto cols = m.col_names();
  InfoMatrix info({"group"}, cols, std::vector<std::string>(cols.size(), label));
  return Dataset(std::move(m), std::move(info), name);
}

/// Two studies on disjoint columns sharing `features` rows; `planted` randomly
/// chosen rows of study B are shifted up by `shift`.
struct PlantedStudies {
  Dataset a;
  Dataset b;
  std::vector<std::string> planted;
};

inline PlantedStudies planted_studies(std::size_t features, std::size_t planted, std::size_t cols_a,
                                      std::size_t cols_b, double shift, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise;
  std::uniform_int_distribution<std::size_t> pick(0, features - 1);

  // Planted rows sit at random positions so they are not simply the first rows.
  std::vector<bool> is_planted(features, false);
  std::size_t chosen = 0;
  while (chosen < planted) {
    const auto r = pick(rng);
    if (!is_planted[r]) {
      is_planted[r] = true;
      ++chosen;
    }
  }

  const auto build = [&](std::size_t cols, bool shifted, const std::string& prefix) {
    std::vector<double> values(features * cols);
    for (std::size_t r = 0; r < features; ++r) {
      // Per-feature baseline differs across features, like real expression levels.
      const double base = 6.0 + 0.001 * static_cast<double>(r);
      for (std::size_t c = 0; c < cols; ++c) {
        values[r * cols + c] = base + noise(rng) + (shifted && is_planted[r] ? shift : 0.0);
      }
    }
    return DataMatrix(numbered("G", features), numbered(prefix, cols), std::move(values));
  };

  PlantedStudies out{make_dataset(build(cols_a, false, "A"), "studyA", "A"),
                     make_dataset(build(cols_b, true, "B"), "studyB", "B"), {}};
  for (std::size_t r = 0; r < features; ++r) {
    if (is_planted[r]) out.planted.push_back("G" + std::to_string(r + 1));
  }
  return out;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  static std::uint64_t counter = 0;
  auto dir = std::filesystem::temp_directory_path() /
             ("rankmerge_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace rankmerge::testing

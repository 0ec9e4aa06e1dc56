#pragma once

// Target voltage matrices (row-major, rows x cols) for hold and ledger runs.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "qlocksim/csv.hpp"

namespace qlocksim {

/// Independent uniform voltages in [lo, hi].
inline std::vector<double> uniform_targets(std::size_t rows, std::size_t cols, double lo, double hi,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = dist(rng);
  return v;
}

/// Each column gets a mean drawn from [mean_lo, mean_hi]; entries scatter
/// around it with standard deviation `rms` along the column.
inline std::vector<double> column_gaussian_targets(std::size_t rows, std::size_t cols, double rms, std::uint64_t seed,
                                                   double mean_lo = -1.5, double mean_hi = -0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mean_dist(mean_lo, mean_hi);
  std::normal_distribution<double> scatter(0.0, rms);
  std::vector<double> means(cols);
  for (auto& m : means) m = mean_dist(rng);
  std::vector<double> v(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) v[r * cols + c] = means[c] + scatter(rng);
  return v;
}

/// Headerless CSV of `rows` lines with `cols` voltages each.
inline std::vector<double> load_targets(const std::string& path, std::size_t rows, std::size_t cols) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open targets file '" + path + "'");
  std::vector<double> v;
  v.reserve(rows * cols);
  std::string line;
  std::size_t r = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != cols)
      throw std::runtime_error("targets file row " + std::to_string(r + 1) + " has " + std::to_string(fields.size()) +
                               " values, expected " + std::to_string(cols));
    for (const auto& f : fields) v.push_back(csv_number(f));
    ++r;
  }
  if (r != rows)
    throw std::runtime_error("targets file has " + std::to_string(r) + " rows, expected " + std::to_string(rows));
  return v;
}

}  // namespace qlocksim

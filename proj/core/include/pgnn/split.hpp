#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pgnn/dataset.hpp"

namespace pgnn {

struct SplitScheme {
  enum class Kind {
    PerClusterCounts,     // first `train` rows -> train, next `valid` -> valid, rest -> test
    LastOneOut,           // last row -> test, second to last -> valid when q_i >= 3
    RandomOnePerCluster,  // one random row -> test, one more -> valid when q_i >= 3
  };
  Kind kind = Kind::PerClusterCounts;
  std::size_t train = 6;
  std::size_t valid = 2;
  std::size_t test = 2;
  std::uint64_t seed = 0;

  static SplitScheme counts(std::size_t train, std::size_t valid, std::size_t test);
  static SplitScheme last_one_out();
  static SplitScheme random_one_per_cluster(std::uint64_t seed);
  // "6,2,2", "last-one-out" or "random-one:<seed>".
  static SplitScheme parse(const std::string& text);
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
  std::vector<std::size_t> test;
};

struct SplitResult {
  ClusteredDataset train;
  ClusteredDataset valid;
  ClusteredDataset test;
};

// Row indices of each part, each sorted ascending. Throws SplitError naming
// the first cluster that is too small for the scheme.
SplitIndices split_indices(const ClusteredDataset& ds, const SplitScheme& scheme);

SplitResult split(const ClusteredDataset& ds, const SplitScheme& scheme);

}  // namespace pgnn

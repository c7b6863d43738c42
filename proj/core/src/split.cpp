#include "pgnn/split.hpp"

#include <algorithm>
#include <charconv>

#include "pgnn/error.hpp"
#include "pgnn/rng.hpp"

namespace pgnn {

SplitScheme SplitScheme::counts(std::size_t train, std::size_t valid, std::size_t test) {
  SplitScheme s;
  s.kind = Kind::PerClusterCounts;
  s.train = train;
  s.valid = valid;
  s.test = test;
  return s;
}

SplitScheme SplitScheme::last_one_out() {
  SplitScheme s;
  s.kind = Kind::LastOneOut;
  return s;
}

SplitScheme SplitScheme::random_one_per_cluster(std::uint64_t seed) {
  SplitScheme s;
  s.kind = Kind::RandomOnePerCluster;
  s.seed = seed;
  return s;
}

SplitScheme SplitScheme::parse(const std::string& text) {
  if (text == "last-one-out") return last_one_out();
  if (text.rfind("random-one", 0) == 0) {
    std::uint64_t seed = 0;
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
      const char* b = text.data() + colon + 1;
      const char* e = text.data() + text.size();
      auto [ptr, ec] = std::from_chars(b, e, seed);
      if (ec != std::errc() || ptr != e) throw UsageError("bad split seed in '" + text + "'");
    }
    return random_one_per_cluster(seed);
  }
  std::size_t parts[3] = {0, 0, 0};
  std::size_t k = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  while (k < 3) {
    auto [ptr, ec] = std::from_chars(p, end, parts[k]);
    if (ec != std::errc()) break;
    ++k;
    p = ptr;
    if (p == end) break;
    if (*p != ',') break;
    ++p;
  }
  if (k != 3 || p != end) {
    throw UsageError("split scheme '" + text + "' is not 'a,b,c', 'last-one-out' or 'random-one:<seed>'");
  }
  return counts(parts[0], parts[1], parts[2]);
}

SplitIndices split_indices(const ClusteredDataset& ds, const SplitScheme& scheme) {
  SplitIndices out;
  const auto groups = ds.rows_by_cluster();
  Rng rng(scheme.seed);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& rows = groups[i];
    const std::size_t q = rows.size();
    const std::string& label = ds.cluster_labels()[i];
    switch (scheme.kind) {
      case SplitScheme::Kind::PerClusterCounts: {
        const std::size_t need = scheme.train + scheme.valid + scheme.test;
        if (scheme.train == 0) throw SplitError("split: training count must be positive");
        if (q < need) {
          throw SplitError("split: cluster '" + label + "' has " + std::to_string(q) +
                           " observations, scheme needs " + std::to_string(need));
        }
        for (std::size_t j = 0; j < q; ++j) {
          if (j < scheme.train) {
            out.train.push_back(rows[j]);
          } else if (j < scheme.train + scheme.valid) {
            out.valid.push_back(rows[j]);
          } else {
            out.test.push_back(rows[j]);
          }
        }
        break;
      }
      case SplitScheme::Kind::LastOneOut:
      case SplitScheme::Kind::RandomOnePerCluster: {
        if (q < 2) {
          throw SplitError("split: cluster '" + label + "' has " + std::to_string(q) +
                           " observation(s), needs at least 2");
        }
        std::vector<std::size_t> order = rows;
        if (scheme.kind == SplitScheme::Kind::RandomOnePerCluster) {
          // Move the test pick, then the validation pick, to the back.
          std::swap(order[rng.index(q)], order[q - 1]);
          if (q >= 3) std::swap(order[rng.index(q - 1)], order[q - 2]);
        }
        out.test.push_back(order[q - 1]);
        std::size_t train_end = q - 1;
        if (q >= 3) {
          out.valid.push_back(order[q - 2]);
          train_end = q - 2;
        }
        for (std::size_t j = 0; j < train_end; ++j) out.train.push_back(order[j]);
        break;
      }
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.valid.begin(), out.valid.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

SplitResult split(const ClusteredDataset& ds, const SplitScheme& scheme) {
  const SplitIndices idx = split_indices(ds, scheme);
  return {ds.subset(idx.train), ds.subset(idx.valid), ds.subset(idx.test)};
}

}  // namespace pgnn

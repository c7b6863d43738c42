#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pgnn/dense_net.hpp"

namespace pgnn {

// Per-cluster q_i and y_{i+}.
struct ClusterAggregates {
  std::vector<std::size_t> sizes;
  std::vector<std::int64_t> count_sums;

  std::size_t cluster_count() const noexcept { return sizes.size(); }
};

// Observations (x_ij, cluster i, y_ij) over a dense cluster index space
// [0, n). Immutable once built; subsets keep the parent's index space, so a
// cluster may be empty in a subset.
class ClusteredDataset {
 public:
  ClusteredDataset() = default;

  // Validates and computes the aggregates. `labels` may be empty, in which
  // case clusters are labelled by their index.
  ClusteredDataset(Matrix features, std::vector<std::size_t> cluster_index,
                   std::vector<std::int64_t> counts, std::size_t cluster_count,
                   std::vector<std::string> labels = {},
                   std::vector<std::string> feature_names = {});

  std::size_t size() const noexcept { return counts_.size(); }
  std::size_t feature_count() const noexcept { return features_.cols(); }
  std::size_t cluster_count() const noexcept { return aggregates_.sizes.size(); }

  const Matrix& features() const noexcept { return features_; }
  std::span<const double> x(std::size_t row) const { return features_.row(row); }
  std::size_t cluster(std::size_t row) const { return cluster_[row]; }
  std::int64_t y(std::size_t row) const { return counts_[row]; }
  std::span<const std::size_t> cluster_index() const noexcept { return cluster_; }
  std::span<const std::int64_t> counts() const noexcept { return counts_; }

  const ClusterAggregates& aggregates() const noexcept { return aggregates_; }
  std::size_t cluster_size(std::size_t i) const { return aggregates_.sizes[i]; }
  std::int64_t cluster_count_sum(std::size_t i) const { return aggregates_.count_sums[i]; }

  const std::vector<std::string>& cluster_labels() const noexcept { return labels_; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }

  // Simulation ground truth u_i, one per cluster, when known.
  const std::optional<std::vector<double>>& true_u() const noexcept { return true_u_; }
  void set_true_u(std::vector<double> u);

  // Rows in the given order; cluster index space and labels are shared.
  ClusteredDataset subset(std::span<const std::size_t> rows) const;

  // Rows grouped by cluster, in dataset order within each cluster.
  std::vector<std::vector<std::size_t>> rows_by_cluster() const;

  // Re-checks every invariant; throws on violation.
  void validate() const;

 private:
  Matrix features_;
  std::vector<std::size_t> cluster_;
  std::vector<std::int64_t> counts_;
  ClusterAggregates aggregates_;
  std::vector<std::string> labels_;
  std::vector<std::string> feature_names_;
  std::optional<std::vector<double>> true_u_;
};

}  // namespace pgnn

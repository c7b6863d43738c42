#include "pgnn/dataset.hpp"

#include <cmath>

#include "pgnn/error.hpp"

namespace pgnn {

ClusteredDataset::ClusteredDataset(Matrix features, std::vector<std::size_t> cluster_index,
                                   std::vector<std::int64_t> counts, std::size_t cluster_count,
                                   std::vector<std::string> labels,
                                   std::vector<std::string> feature_names)
    : features_(std::move(features)),
      cluster_(std::move(cluster_index)),
      counts_(std::move(counts)),
      labels_(std::move(labels)),
      feature_names_(std::move(feature_names)) {
  if (features_.rows() != counts_.size() || cluster_.size() != counts_.size()) {
    throw ShapeError("ClusteredDataset: features, cluster index and counts disagree in length");
  }
  if (labels_.empty()) {
    labels_.reserve(cluster_count);
    for (std::size_t i = 0; i < cluster_count; ++i) labels_.push_back(std::to_string(i));
  }
  if (labels_.size() != cluster_count) throw ShapeError("ClusteredDataset: label count != cluster count");
  if (feature_names_.empty()) {
    for (std::size_t k = 0; k < features_.cols(); ++k) feature_names_.push_back("x" + std::to_string(k + 1));
  }
  if (feature_names_.size() != features_.cols()) throw ShapeError("ClusteredDataset: feature name count mismatch");

  aggregates_.sizes.assign(cluster_count, 0);
  aggregates_.count_sums.assign(cluster_count, 0);
  for (std::size_t r = 0; r < counts_.size(); ++r) {
    if (cluster_[r] >= cluster_count) {
      throw DomainError("ClusteredDataset: cluster index out of range at row " + std::to_string(r));
    }
    if (counts_[r] < 0) throw DomainError("ClusteredDataset: negative count at row " + std::to_string(r));
    ++aggregates_.sizes[cluster_[r]];
    aggregates_.count_sums[cluster_[r]] += counts_[r];
  }
}

void ClusteredDataset::set_true_u(std::vector<double> u) {
  if (u.size() != cluster_count()) throw ShapeError("set_true_u: one value per cluster required");
  true_u_ = std::move(u);
}

ClusteredDataset ClusteredDataset::subset(std::span<const std::size_t> rows) const {
  Matrix x(rows.size(), feature_count());
  std::vector<std::size_t> c;
  std::vector<std::int64_t> y;
  c.reserve(rows.size());
  y.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t r = rows[k];
    if (r >= size()) throw ShapeError("subset: row index out of range");
    const auto src = features_.row(r);
    std::copy(src.begin(), src.end(), x.row(k).begin());
    c.push_back(cluster_[r]);
    y.push_back(counts_[r]);
  }
  ClusteredDataset out(std::move(x), std::move(c), std::move(y), cluster_count(), labels_, feature_names_);
  out.true_u_ = true_u_;
  return out;
}

std::vector<std::vector<std::size_t>> ClusteredDataset::rows_by_cluster() const {
  std::vector<std::vector<std::size_t>> groups(cluster_count());
  for (std::size_t i = 0; i < cluster_count(); ++i) groups[i].reserve(aggregates_.sizes[i]);
  for (std::size_t r = 0; r < size(); ++r) groups[cluster_[r]].push_back(r);
  return groups;
}

void ClusteredDataset::validate() const {
  std::vector<std::size_t> sizes(cluster_count(), 0);
  std::vector<std::int64_t> sums(cluster_count(), 0);
  for (std::size_t r = 0; r < size(); ++r) {
    if (cluster_[r] >= cluster_count()) throw DomainError("validate: cluster index out of range");
    if (counts_[r] < 0) throw DomainError("validate: negative count");
    ++sizes[cluster_[r]];
    sums[cluster_[r]] += counts_[r];
  }
  if (sizes != aggregates_.sizes || sums != aggregates_.count_sums) {
    throw StateError("validate: stale cluster aggregates");
  }
  for (double v : features_.flat()) {
    if (!std::isfinite(v)) throw DomainError("validate: non-finite feature value");
  }
}

}  // namespace pgnn

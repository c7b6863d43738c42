#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pgnn/dataset.hpp"

namespace pgnn {

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// Splits one CSV line on commas. Fields are not quoted in any format this
// library writes; surrounding whitespace is trimmed.
std::vector<std::string> split_csv_line(const std::string& line);

// Reads `cluster_id,y,x1,...,xp`. An optional `true_u` column (any position
// after y) is taken as per-cluster ground truth, not as a feature. Cluster
// ids are re-indexed densely in first-appearance order; the original ids
// become the cluster labels. When `require_y` is false a missing y column is
// accepted and y is set to 0.
ClusteredDataset load_csv(const std::string& path, bool require_y = true);
ClusteredDataset read_csv(std::istream& in, bool require_y = true);

// Writes the dataset in the format load_csv reads. With `with_true_u` the
// per-cluster truth is appended to every row.
void write_csv(const ClusteredDataset& ds, const std::string& path, bool with_true_u = false);
void write_csv(const ClusteredDataset& ds, std::ostream& out, bool with_true_u = false);

// `cluster_id,true_u`, one row per cluster.
void write_true_u_csv(const ClusteredDataset& ds, const std::string& path);

}  // namespace pgnn

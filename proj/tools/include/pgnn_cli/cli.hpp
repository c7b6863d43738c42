#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pgnn/dataset.hpp"
#include "pgnn/model.hpp"

namespace pgnn::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 2,
  kData = 3,
  kNumerical = 4,
};

// Runs one command line (argv[0] is the program name). All output goes to
// `out` and diagnostics to `err`; the return value is the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Flat `key = value` lines; '#' starts a comment. Throws UsageError on
// malformed lines and duplicate keys.
std::map<std::string, std::string> parse_config(std::istream& in, const std::string& origin);

// Re-indexes `data` onto the model's cluster labels. Clusters the model has
// not seen get indices past model.cluster_count(), in first-appearance order.
ClusteredDataset align_to_model(const ClusteredDataset& data, const PgModel& model);

// Re-indexes `data` onto the cluster labels of `reference`; unknown labels
// are a data error.
ClusteredDataset align_to_labels(const ClusteredDataset& data, const std::vector<std::string>& labels);

}  // namespace pgnn::cli

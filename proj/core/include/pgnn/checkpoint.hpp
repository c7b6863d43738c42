#pragma once

#include <string>

#include "pgnn/model.hpp"

namespace pgnn {

inline constexpr const char* kCheckpointSchema = "pgnn.checkpoint/1";

// Versioned JSON document: schema tag, mode, dimensions, flat weight arrays,
// v_table, log_lambda and the cluster label map. Doubles are written in
// shortest round-trip form, so a load reproduces the model exactly.
std::string checkpoint_to_string(const PgModel& model);
PgModel checkpoint_from_string(const std::string& text);

void checkpoint_save(const PgModel& model, const std::string& path);
PgModel checkpoint_load(const std::string& path);

}  // namespace pgnn

#include "pgnn/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pgnn/error.hpp"

namespace pgnn {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.flat().begin(), m.flat().end())}};
}

Matrix matrix_from_json(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != m.flat().size()) throw CheckpointError("checkpoint: matrix data length mismatch");
  std::copy(data.begin(), data.end(), m.flat().begin());
  return m;
}

}  // namespace

std::string checkpoint_to_string(const PgModel& model) {
  model.validate();
  json layers = json::array();
  for (const auto& l : model.net.layers) {
    layers.push_back({{"activation", to_string(l.activation)}, {"weight", matrix_to_json(l.weight)}, {"bias", l.bias}});
  }
  json doc;
  doc["schema"] = kCheckpointSchema;
  doc["mode"] = to_string(model.mode);
  doc["input_width"] = model.input_width();
  doc["leaky_slope"] = model.net.leaky_slope;
  doc["layers"] = std::move(layers);
  if (model.attention) {
    const auto& a = *model.attention;
    doc["attention"] = {{"head_count", a.head_count},
                        {"embed_dim", a.embed_dim},
                        {"query", matrix_to_json(a.query)},
                        {"key_scale", matrix_to_json(a.key_scale)},
                        {"key_bias", matrix_to_json(a.key_bias)}};
  } else {
    doc["attention"] = nullptr;
  }
  doc["v"] = model.v;
  doc["log_lambda"] = model.log_lambda;
  doc["clusters"] = model.cluster_labels;
  return doc.dump(1) + "\n";
}

PgModel checkpoint_from_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint: not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("schema") || doc["schema"] != kCheckpointSchema) {
    throw CheckpointError(std::string("checkpoint: schema tag mismatch (expected ") + kCheckpointSchema + ")");
  }
  try {
    PgModel m;
    m.mode = mode_from_string(doc.at("mode").get<std::string>());
    m.net.leaky_slope = doc.at("leaky_slope").get<double>();
    for (const auto& jl : doc.at("layers")) {
      DenseLayer l;
      l.activation = activation_from_string(jl.at("activation").get<std::string>());
      l.weight = matrix_from_json(jl.at("weight"));
      l.bias = jl.at("bias").get<std::vector<double>>();
      m.net.layers.push_back(std::move(l));
    }
    const auto& ja = doc.at("attention");
    if (!ja.is_null()) {
      AttentionSelector a;
      a.head_count = ja.at("head_count").get<std::size_t>();
      a.embed_dim = ja.at("embed_dim").get<std::size_t>();
      a.query = matrix_from_json(ja.at("query"));
      a.key_scale = matrix_from_json(ja.at("key_scale"));
      a.key_bias = matrix_from_json(ja.at("key_bias"));
      m.attention = std::move(a);
    }
    m.v = doc.at("v").get<std::vector<double>>();
    m.log_lambda = doc.at("log_lambda").get<double>();
    m.cluster_labels = doc.at("clusters").get<std::vector<std::string>>();
    m.validate();
    if (m.input_width() != doc.at("input_width").get<std::size_t>()) {
      throw CheckpointError("checkpoint: input_width disagrees with the layer shapes");
    }
    return m;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint: malformed document: ") + e.what());
  } catch (const CheckpointError&) {
    throw;
  } catch (const Error& e) {
    throw CheckpointError(std::string("checkpoint: invalid model: ") + e.what());
  }
}

void checkpoint_save(const PgModel& model, const std::string& path) {
  const std::string text = checkpoint_to_string(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("checkpoint: cannot open '" + path + "' for writing");
  out << text;
}

PgModel checkpoint_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str());
}

}  // namespace pgnn

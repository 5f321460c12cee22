#include "surgeflow/model_io.hpp"

#include <fstream>
#include <json.hpp>

#include "surgeflow/errors.hpp"

namespace surgeflow::forecast {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* name) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ValidationError(std::string("model field is not a matrix: ") + name);
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j[r].size() != cols)
      throw ValidationError(std::string("ragged matrix rows in field: ") + name);
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::MatrixXd& column) {
  json out = json::array();
  for (Eigen::Index r = 0; r < column.rows(); ++r) out.push_back(column(r, 0));
  return out;
}

Eigen::MatrixXd vector_from_json(const json& j, const char* name) {
  if (!j.is_array()) throw ValidationError(std::string("model field is not an array: ") + name);
  Eigen::MatrixXd m(j.size(), 1);
  for (std::size_t r = 0; r < j.size(); ++r) m(r, 0) = j[r].get<double>();
  return m;
}

}  // namespace

void save_model(const LstmModel& model, const std::filesystem::path& path) {
  json doc;
  doc["format"] = kModelFormat;
  doc["hidden_size"] = model.hidden_size;
  doc["output_size"] = model.output_size;
  doc["gate_order"] = {"input", "forget", "cell", "output"};
  json iw = json::array(), rw = json::array(), gb = json::array();
  for (int g = 0; g < kGateCount; ++g) {
    iw.push_back(vector_to_json(model.input_weights[g]));
    rw.push_back(matrix_to_json(model.recurrent_weights[g]));
    gb.push_back(vector_to_json(model.gate_biases[g]));
  }
  doc["input_weights"] = std::move(iw);
  doc["recurrent_weights"] = std::move(rw);
  doc["gate_biases"] = std::move(gb);
  doc["dense_weights"] = matrix_to_json(model.dense_weights);
  doc["dense_bias"] = vector_to_json(model.dense_bias);
  doc["scaler"] = {{"min", model.scaler.min}, {"max", model.scaler.max}};

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write model file: " + path.string());
  out << doc.dump(2) << '\n';
}

LstmModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open model file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValidationError("malformed model JSON: " + std::string(e.what()));
  }
  if (doc.value("format", "") != kModelFormat)
    throw ValidationError("unknown model format (expected surgeflow-lstm/1)");

  LstmModel m;
  m.hidden_size = doc.at("hidden_size").get<int>();
  m.output_size = doc.value("output_size", static_cast<int>(kOutputHours));
  for (int g = 0; g < kGateCount; ++g) {
    m.input_weights[g] = vector_from_json(doc.at("input_weights").at(g), "input_weights");
    m.recurrent_weights[g] =
        matrix_from_json(doc.at("recurrent_weights").at(g), "recurrent_weights");
    m.gate_biases[g] = vector_from_json(doc.at("gate_biases").at(g), "gate_biases");
  }
  m.dense_weights = matrix_from_json(doc.at("dense_weights"), "dense_weights");
  m.dense_bias = vector_from_json(doc.at("dense_bias"), "dense_bias");
  m.scaler.min = doc.at("scaler").at("min").get<double>();
  m.scaler.max = doc.at("scaler").at("max").get<double>();
  if (!m.shapes_consistent()) throw ValidationError("inconsistent model shapes");
  if (!m.all_finite()) throw ValidationError("non-finite model weights");
  return m;
}

void save_history(const TrainReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write history file: " + path.string());
  out << "epoch,train_loss,val_loss\n";
  char buf[64];
  for (std::size_t e = 0; e < report.train_loss.size(); ++e) {
    out << (e + 1) << ',';
    std::snprintf(buf, sizeof buf, "%.17g", report.train_loss[e]);
    out << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", report.val_loss[e]);
    out << buf << '\n';
  }
}

}  // namespace surgeflow::forecast

#include "dtlstm/checkpoint.hpp"

#include "dtlstm/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace dtlstm {

using nlohmann::ordered_json;
using Eigen::Index;

namespace {

ordered_json tensor_json(const Eigen::MatrixXd& m) {
  ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  j["data"] = std::move(data);
  return j;
}

Eigen::MatrixXd tensor_from(const ordered_json& j, Index rows, Index cols, const std::string& what) {
  if (j.at("rows").get<Index>() != rows || j.at("cols").get<Index>() != cols) {
    throw FormatError("checkpoint tensor " + what + " has unexpected shape");
  }
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Index>(data.size()) != rows * cols) {
    throw FormatError("checkpoint tensor " + what + " has " + std::to_string(data.size()) + " entries");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

}  // namespace

std::string checkpoint_to_string(const Checkpoint& ckpt) {
  const LstmParams& p = ckpt.params;
  ordered_json j;
  j["format"] = "dtlstm-lstm-checkpoint";
  j["version"] = kCheckpointVersion;
  j["gate_order"] = kGateOrder;
  j["input_dim"] = p.input_dim();
  j["hidden"] = p.hidden_sizes();
  j["classes"] = p.classes();
  ordered_json layers = ordered_json::array();
  for (const auto& l : p.layers) {
    ordered_json lj;
    lj["W"] = tensor_json(l.W);
    lj["U"] = tensor_json(l.U);
    lj["b"] = tensor_json(l.b);
    layers.push_back(std::move(lj));
  }
  j["layers"] = std::move(layers);
  j["W_out"] = tensor_json(p.W_out);
  j["b_out"] = tensor_json(p.b_out);
  j["train_config"] = ordered_json::parse(train_config_to_json(ckpt.config));
  return j.dump() + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "dtlstm-lstm-checkpoint") {
      throw FormatError("not an LSTM checkpoint");
    }
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw FormatError("unsupported checkpoint version " + std::to_string(version));
    }
    if (j.at("gate_order").get<std::string>() != kGateOrder) {
      throw FormatError("checkpoint gate order '" + j.at("gate_order").get<std::string>() + "' is not " +
                        kGateOrder);
    }
    const Index input_dim = j.at("input_dim").get<Index>();
    const auto hidden = j.at("hidden").get<std::vector<Index>>();
    const Index classes = j.at("classes").get<Index>();
    Checkpoint ckpt;
    ckpt.params = LstmParams::zeros(input_dim, hidden, classes);
    const auto& layers = j.at("layers");
    if (layers.size() != hidden.size()) throw FormatError("checkpoint layer count mismatch");
    for (std::size_t l = 0; l < hidden.size(); ++l) {
      LayerParams& lp = ckpt.params.layers[l];
      const std::string tag = "layer" + std::to_string(l);
      lp.W = tensor_from(layers[l].at("W"), lp.W.rows(), lp.W.cols(), tag + ".W");
      lp.U = tensor_from(layers[l].at("U"), lp.U.rows(), lp.U.cols(), tag + ".U");
      lp.b = tensor_from(layers[l].at("b"), lp.b.rows(), 1, tag + ".b");
    }
    ckpt.params.W_out = tensor_from(j.at("W_out"), classes, hidden.back(), "W_out");
    ckpt.params.b_out = tensor_from(j.at("b_out"), classes, 1, "b_out");
    ckpt.params.check();
    ckpt.config = train_config_from_json(j.at("train_config").dump());
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  } catch (const ShapeError& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputNotFound("cannot write checkpoint: " + path);
  out << checkpoint_to_string(ckpt);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputNotFound("cannot open checkpoint: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_string(buf.str());
}

}  // namespace dtlstm

#include "emtk/model_io.hpp"

#include <bit>
#include <cstring>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

#include "emtk/error.hpp"
#include "emtk/hash.hpp"

namespace emtk {

void ModelBundle::validate() const {
  const std::size_t d = schema.size();
  const std::size_t n = registry.size();
  if (kind == ModelKind::Network) {
    if (!forests.empty()) throw Error(ErrorCode::SchemaMismatch, "network bundle holds forests");
    if (nets.empty()) throw Error(ErrorCode::SchemaMismatch, "network bundle holds no nets");
    if (standardizers.size() != nets.size()) {
      throw Error(ErrorCode::SchemaMismatch, "one standardizer per net is required");
    }
    const bool mt = nets.size() == 1 && nets[0].config().selector_dim > 0;
    if (!mt && nets.size() != n) {
      throw Error(ErrorCode::SchemaMismatch, "single-task bundles need one net per channel");
    }
    for (std::size_t i = 0; i < nets.size(); ++i) {
      const auto& c = nets[i].config();
      if (c.input_dim != d || standardizers[i].feature_dim() != d) {
        throw Error(ErrorCode::SchemaMismatch,
                    fmt::format("net {} expects {} features, schema has {}", i, c.input_dim, d));
      }
      if (c.selector_dim != (mt ? n : 0)) throw Error(ErrorCode::SchemaMismatch, "selector width does not match registry");
      if (standardizers[i].channel_count() != n) {
        throw Error(ErrorCode::SchemaMismatch, "standardizer channel count does not match registry");
      }
    }
  } else {
    if (!nets.empty()) throw Error(ErrorCode::SchemaMismatch, "forest bundle holds nets");
    if (forests.size() != n) throw Error(ErrorCode::SchemaMismatch, "forest bundles need one forest per channel");
    for (const auto& f : forests) {
      if (f.feature_dim() != d) throw Error(ErrorCode::SchemaMismatch, "forest feature dimension does not match schema");
    }
  }
}

namespace {

constexpr std::size_t kPrefix = 4 + 4 + 8;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_uint(std::string_view in, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + static_cast<std::size_t>(i)])) << (8 * i);
  }
  return v;
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  double f64() {
    need(8);
    const double v = std::bit_cast<double>(get_uint(data_, pos_, 8));
    pos_ += 8;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    const auto v = get_uint(data_, pos_, 8);
    pos_ += 8;
    return v;
  }
  std::string_view bytes(std::size_t n) {
    need(n);
    const auto v = data_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw Error(ErrorCode::CorruptFile, "model payload is truncated");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

const char* magic_for(ModelKind kind) { return kind == ModelKind::Network ? "EMMT" : "EMRF"; }

}  // namespace

std::string serialize_model(const ModelBundle& model) {
  model.validate();
  nlohmann::json header;
  header["model_id"] = model.model_id;
  header["kind"] = model.kind == ModelKind::Network ? "network" : "forest";
  header["schema"] = model.schema.to_json();
  header["registry"] = model.registry.to_json();
  header["standardizers"] = nlohmann::json::array();
  for (const auto& s : model.standardizers) header["standardizers"].push_back(s.to_json());
  header["nets"] = nlohmann::json::array();
  for (const auto& n : model.nets) header["nets"].push_back({{"config", n.config().to_json()}});
  header["forests"] = nlohmann::json::array();
  for (const auto& f : model.forests) {
    nlohmann::json counts = nlohmann::json::array();
    for (const auto& t : f.trees()) counts.push_back(t.nodes().size());
    header["forests"].push_back({{"config", f.config().to_json()}, {"feature_dim", f.feature_dim()}, {"node_counts", counts}});
  }
  header["training"] = model.training;
  const std::string text = header.dump();

  std::string payload;
  put_u64(payload, text.size());
  payload += text;
  for (const auto& n : model.nets) {
    for (const auto& l : n.layers()) {
      for (double w : l.weights) put_f64(payload, w);
      for (double b : l.bias) put_f64(payload, b);
    }
  }
  for (const auto& f : model.forests) {
    for (const auto& t : f.trees()) {
      for (const auto& node : t.nodes()) {
        put_f64(payload, static_cast<double>(node.feature));
        put_f64(payload, node.threshold);
        put_f64(payload, static_cast<double>(node.left));
        put_f64(payload, static_cast<double>(node.right));
        put_f64(payload, node.value);
      }
    }
  }

  std::string out(magic_for(model.kind), 4);
  put_u32(out, kModelFormatVersion);
  put_u64(out, fnv1a64(payload));
  out += payload;
  return out;
}

ModelBundle deserialize_model(std::string_view bytes) {
  if (bytes.size() < kPrefix) throw Error(ErrorCode::CorruptFile, "model file is truncated");
  const auto magic = bytes.substr(0, 4);
  ModelBundle model;
  if (magic == "EMMT") {
    model.kind = ModelKind::Network;
  } else if (magic == "EMRF") {
    model.kind = ModelKind::Forest;
  } else {
    throw Error(ErrorCode::CorruptFile, "not an emtk model file");
  }
  const auto version = static_cast<std::uint32_t>(get_uint(bytes, 4, 4));
  if (version != kModelFormatVersion) {
    throw Error(ErrorCode::VersionMismatch,
                fmt::format("model format version {} is not supported (expected {})", version, kModelFormatVersion));
  }
  const auto payload = bytes.substr(kPrefix);
  if (get_uint(bytes, 8, 8) != fnv1a64(payload)) throw Error(ErrorCode::CorruptFile, "model checksum mismatch");

  Reader r(payload);
  const auto len = r.u64();
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(r.bytes(len));
    model.model_id = header.at("model_id").get<std::string>();
    model.schema = FeatureSchema::from_json(header.at("schema"));
    model.registry = PropertyRegistry::from_json(header.at("registry"));
    for (const auto& s : header.at("standardizers")) model.standardizers.push_back(Standardizer::from_json(s));
    for (const auto& n : header.at("nets")) {
      const auto config = MTNetConfig::from_json(n.at("config"));
      auto net = init_network(config);
      for (auto& l : net.layers()) {
        for (double& w : l.weights) w = r.f64();
        for (double& b : l.bias) b = r.f64();
      }
      model.nets.push_back(std::move(net));
    }
    for (const auto& f : header.at("forests")) {
      const auto config = ForestConfig::from_json(f.at("config"));
      std::vector<DecisionTree> trees;
      for (const auto& count : f.at("node_counts")) {
        const auto n_nodes = count.get<std::size_t>();
        std::vector<TreeNode> nodes(n_nodes);
        for (auto& node : nodes) {
          node.feature = static_cast<int>(r.f64());
          node.threshold = r.f64();
          node.left = static_cast<std::size_t>(r.f64());
          node.right = static_cast<std::size_t>(r.f64());
          node.value = r.f64();
          if (node.feature >= 0 && (node.left >= n_nodes || node.right >= n_nodes)) {
            throw Error(ErrorCode::CorruptFile, "tree node points outside its tree");
          }
        }
        trees.emplace_back(std::move(nodes));
      }
      model.forests.emplace_back(config, f.at("feature_dim").get<std::size_t>(), std::move(trees));
    }
    model.training = header.value("training", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptFile, fmt::format("malformed model header: {}", e.what()));
  }
  if (!r.done()) throw Error(ErrorCode::CorruptFile, "trailing bytes after model payload");
  model.validate();
  return model;
}

void save_model(const ModelBundle& model, const std::string& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write model '{}'", path));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, fmt::format("failed writing model '{}'", path));
}

ModelBundle load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open model '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

std::vector<ChannelPrediction> predict_matrix(const ModelBundle& model, std::span<const double> features) {
  if (features.size() != model.schema.size()) {
    throw Error(ErrorCode::SchemaMismatch,
                fmt::format("feature vector has {} values, model schema has {}", features.size(), model.schema.size()));
  }
  std::vector<ChannelPrediction> out;
  const auto& reg = model.registry;
  for (std::size_t c = 0; c < reg.size(); ++c) {
    double value = 0.0;
    if (model.kind == ModelKind::Forest) {
      value = reg.at(c).inverse(model.forests[c].predict(features));
    } else {
      const std::size_t k = model.multitask() ? 0 : c;
      const auto x = model.standardizers[k].apply_features(features);
      value = model.standardizers[k].invert_target(c, model.nets[k].forward_channel(x, c), reg);
    }
    out.push_back({reg.at(c).name(), value});
  }
  return out;
}

}  // namespace emtk

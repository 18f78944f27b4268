#include "tbcnn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <map>

#include "json.hpp"
#include "tbcnn/config.hpp"
#include "tbcnn/error.hpp"

namespace tbcnn {

namespace {

using nlohmann::json;

constexpr std::string_view kModelMagic = "TBCNN-CKPT";
constexpr std::string_view kRaeMagic = "TBCNN-RAE";

void write_container(std::ostream& out, std::string_view magic, json header,
                     const std::vector<const Parameter*>& arrays) {
  json list = json::array();
  for (const Parameter* p : arrays) {
    list.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
  }
  header["arrays"] = std::move(list);
  const std::string text = header.dump();
  out << magic << ' ' << kCheckpointVersion << '\n' << text.size() << '\n' << text << '\n';
  std::vector<char> bytes;
  for (const Parameter* p : arrays) {
    for (const double v : p->value.data()) {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
    }
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed to write checkpoint");
}

struct Container {
  json header;
  std::map<std::string, Matrix> arrays;
};

Container read_container(std::istream& in, std::string_view magic) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty checkpoint");
  const std::string expected = std::string(magic) + ' ';
  if (line.rfind(expected, 0) != 0) {
    throw DataError("not a " + std::string(magic) + " file (magic line '" + line.substr(0, 40) +
                    "')");
  }
  if (line.substr(expected.size()) != std::to_string(kCheckpointVersion)) {
    throw DataError("checkpoint version " + line.substr(expected.size()) +
                    " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  if (!std::getline(in, line)) throw DataError("checkpoint header length missing");
  std::size_t length = 0;
  try {
    length = std::stoul(line);
  } catch (const std::exception&) {
    throw DataError("bad checkpoint header length '" + line + "'");
  }
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (static_cast<std::size_t>(in.gcount()) != length || in.get() != '\n') {
    throw DataError("checkpoint header truncated");
  }
  Container c;
  try {
    c.header = json::parse(text);
    for (const auto& a : c.header.at("arrays")) {
      const auto name = a.at("name").get<std::string>();
      Matrix m(a.at("rows").get<std::size_t>(), a.at("cols").get<std::size_t>());
      std::vector<char> bytes(m.data().size() * 8);
      in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
        throw DataError("checkpoint payload truncated in array " + name);
      }
      auto values = m.data();
      for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) {
          bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + b]))
                  << (8 * b);
        }
        values[i] = std::bit_cast<double>(bits);
      }
      if (!c.arrays.emplace(name, std::move(m)).second) {
        throw DataError("duplicate array " + name + " in checkpoint");
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint header: ") + e.what());
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError("trailing bytes after checkpoint payload");
  }
  return c;
}

void fill(Parameter& p, std::map<std::string, Matrix>& arrays) {
  const auto it = arrays.find(p.name);
  if (it == arrays.end()) throw DataError("checkpoint lacks array " + p.name);
  const Matrix& m = it->second;
  if (m.rows() != p.value.rows() || m.cols() != p.value.cols()) {
    throw DataError("array " + p.name + " is " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()) + ", model expects " +
                    std::to_string(p.value.rows()) + "x" + std::to_string(p.value.cols()));
  }
  p.value = m;
  arrays.erase(it);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

void save_checkpoint(std::ostream& out, const Model& model, const TrainConfig& config) {
  const ModelShape& s = model.shape();
  json header;
  header["variant"] = std::string(to_string(s.variant));
  header["shape"] = {{"n_e", s.n_e},
                     {"n_c", s.n_c},
                     {"n_h", s.n_h},
                     {"num_classes", s.num_classes},
                     {"pooling", std::string(to_string(s.pooling))},
                     {"k", s.k},
                     {"alpha", s.alpha}};
  header["config"] = to_json(config);
  header["labels"] = model.labels().names();
  const auto& tokens = model.vocab().tokens();
  header["vocabulary"] = std::vector<std::string>(tokens.begin(), tokens.end() - 1);
  header["dep_types"] = model.inventory().dedicated();
  write_container(out, kModelMagic, std::move(header), model.parameters());
}

void save_checkpoint_file(const std::filesystem::path& path, const Model& model,
                          const TrainConfig& config) {
  auto out = open_out(path);
  save_checkpoint(out, model, config);
}

Checkpoint load_checkpoint(std::istream& in) {
  Container c = read_container(in, kModelMagic);
  Checkpoint ckpt;
  try {
    const json& h = c.header;
    ckpt.config = config_from_json(h.at("config"));
    ModelShape s;
    s.variant = parse_variant(h.at("variant").get<std::string>());
    const json& sh = h.at("shape");
    s.n_e = sh.at("n_e").get<std::size_t>();
    s.n_c = sh.at("n_c").get<std::size_t>();
    s.n_h = sh.at("n_h").get<std::size_t>();
    s.num_classes = sh.at("num_classes").get<std::size_t>();
    s.pooling = parse_pooling(sh.at("pooling").get<std::string>());
    s.k = sh.at("k").get<std::size_t>();
    s.alpha = sh.at("alpha").get<double>();
    Vocabulary vocab(h.at("vocabulary").get<std::vector<std::string>>());
    EmbeddingTable table;
    table.vectors.value = Matrix(vocab.size(), s.n_e);
    DepTypeInventory inventory(h.at("dep_types").get<std::vector<std::string>>());
    LabelSet labels(h.at("labels").get<std::vector<std::string>>());
    Rng unused(0);
    ckpt.model = Model(s, std::move(vocab), std::move(table), std::move(inventory),
                       CompositionParams::zeros(s.n_e), std::move(labels), unused);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint header: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("inconsistent checkpoint: ") + e.what());
  } catch (const ContractError& e) {
    throw DataError(std::string("inconsistent checkpoint: ") + e.what());
  }
  for (Parameter* p : ckpt.model.parameters()) fill(*p, c.arrays);
  if (!c.arrays.empty()) {
    throw DataError("checkpoint has unexpected array " + c.arrays.begin()->first);
  }
  return ckpt;
}

Checkpoint load_checkpoint_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return load_checkpoint(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_rae(std::ostream& out, const CompositionParams& params) {
  json header;
  header["n_e"] = params.dim();
  write_container(out, kRaeMagic, std::move(header), params.all());
}

void save_rae_file(const std::filesystem::path& path, const CompositionParams& params) {
  auto out = open_out(path);
  save_rae(out, params);
}

CompositionParams load_rae(std::istream& in) {
  Container c = read_container(in, kRaeMagic);
  std::size_t n_e = 0;
  try {
    n_e = c.header.at("n_e").get<std::size_t>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed composition header: ") + e.what());
  }
  CompositionParams params = CompositionParams::zeros(n_e);
  for (Parameter* p : params.all()) fill(*p, c.arrays);
  if (!c.arrays.empty()) {
    throw DataError("composition file has unexpected array " + c.arrays.begin()->first);
  }
  return params;
}

CompositionParams load_rae_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return load_rae(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace tbcnn

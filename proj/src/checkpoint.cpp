#include "annealil/neural/checkpoint.hpp"

#include "json.hpp"

#include <charconv>
#include <fstream>

namespace annealil::neural {

namespace {
constexpr int kCheckpointVersion = 1;
}

const char* head_kind_name(HeadKind kind) {
  switch (kind) {
    case HeadKind::categorical: return "categorical";
    case HeadKind::gaussian: return "gaussian";
    case HeadKind::scalar: return "scalar";
  }
  return "?";
}

HeadKind parse_head_kind(const std::string& name) {
  if (name == "categorical") return HeadKind::categorical;
  if (name == "gaussian") return HeadKind::gaussian;
  if (name == "scalar") return HeadKind::scalar;
  throw std::invalid_argument("unknown head kind: " + name);
}

void save_checkpoint(const Network<double>& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
  const NetSpec& s = net.spec();
  nlohmann::json header = {{"format", "annealil-checkpoint"}, {"version", kCheckpointVersion},
                           {"input_dim", s.input_dim},        {"hidden", s.hidden},
                           {"head", head_kind_name(s.head)},  {"head_size", s.head_size},
                           {"num_params", net.num_params()}};
  out << header.dump() << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < net.num_params(); ++i) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, net.params()[i]);
    out.write(buf, end - buf);
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path.string());
}

Network<double> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("checkpoint: missing header");

  NetSpec spec;
  Eigen::Index count = 0;
  try {
    const auto header = nlohmann::json::parse(line);
    if (header.at("format") != "annealil-checkpoint") throw std::runtime_error("checkpoint: bad format tag");
    if (header.at("version").get<int>() > kCheckpointVersion) throw std::runtime_error("checkpoint: unsupported version");
    spec.input_dim = header.at("input_dim").get<int>();
    spec.hidden = header.at("hidden").get<std::vector<int>>();
    spec.head = parse_head_kind(header.at("head").get<std::string>());
    spec.head_size = header.at("head_size").get<int>();
    count = header.at("num_params").get<Eigen::Index>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("checkpoint header: ") + e.what());
  }

  Network<double> net(spec);
  if (net.num_params() != count) throw std::runtime_error("checkpoint: parameter count does not match architecture");
  for (Eigen::Index i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("checkpoint: truncated at parameter " + std::to_string(i));
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    if (ec != std::errc() || ptr != line.data() + line.size()) {
      throw std::runtime_error("checkpoint: bad parameter at index " + std::to_string(i));
    }
    net.params()[i] = value;
  }
  return net;
}

}  // namespace annealil::neural

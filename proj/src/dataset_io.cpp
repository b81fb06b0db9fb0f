#include "annealil/expert.hpp"

#include "json.hpp"

#include <fstream>

namespace annealil {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "annealil-dataset";
constexpr int kVersion = 1;

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_json_array(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open dataset for writing: " + path.string());

  json header = {{"format", kFormat},
                 {"version", kVersion},
                 {"env_id", dataset.env_id},
                 {"obs_dim", dataset.obs_dim},
                 {"action_kind", dataset.action_spec.kind == ActionKind::discrete ? "discrete" : "continuous"},
                 {"action_size", dataset.action_spec.size},
                 {"num_trajectories", dataset.trajectories.size()}};
  out << header.dump() << '\n';

  for (std::size_t i = 0; i < dataset.trajectories.size(); ++i) {
    json steps = json::array();
    for (const Transition& t : dataset.trajectories[i]) {
      steps.push_back({{"obs", to_vector(t.obs)}, {"action", to_vector(t.action)}, {"reward", t.reward}, {"done", t.done}});
    }
    out << json{{"index", i}, {"steps", std::move(steps)}}.dump() << '\n';
  }
  if (!out) throw std::runtime_error("failed writing dataset: " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DatasetError(-1, "missing header");

  Dataset data;
  std::size_t expected = 0;
  try {
    const json header = json::parse(line);
    if (header.at("format") != kFormat) throw DatasetError(-1, "not an annealil dataset");
    if (header.at("version").get<int>() > kVersion) throw DatasetError(-1, "unsupported version");
    data.env_id = header.at("env_id").get<std::string>();
    data.obs_dim = header.at("obs_dim").get<int>();
    const auto kind = header.at("action_kind").get<std::string>();
    if (kind != "discrete" && kind != "continuous") throw DatasetError(-1, "bad action_kind '" + kind + "'");
    data.action_spec = {kind == "discrete" ? ActionKind::discrete : ActionKind::continuous,
                        header.at("action_size").get<int>()};
    expected = header.at("num_trajectories").get<std::size_t>();
  } catch (const json::exception& e) {
    throw DatasetError(-1, e.what());
  }

  const auto action_len = data.action_spec.kind == ActionKind::discrete ? 1 : data.action_spec.size;
  for (std::size_t i = 0; i < expected; ++i) {
    const long rec = static_cast<long>(i);
    if (!std::getline(in, line)) throw DatasetError(rec, "missing record (file truncated)");
    Trajectory traj;
    try {
      const json j = json::parse(line);
      if (j.at("index").get<std::size_t>() != i) throw DatasetError(rec, "out-of-order record");
      for (const json& s : j.at("steps")) {
        Transition t{from_json_array(s.at("obs")), from_json_array(s.at("action")), s.at("reward").get<double>(),
                     s.at("done").get<bool>()};
        if (t.obs.size() != data.obs_dim) throw DatasetError(rec, "observation length mismatch");
        if (t.action.size() != action_len) throw DatasetError(rec, "action length mismatch");
        traj.push_back(std::move(t));
      }
    } catch (const json::exception& e) {
      throw DatasetError(rec, e.what());
    }
    data.trajectories.push_back(std::move(traj));
  }
  while (std::getline(in, line)) {
    if (!line.empty()) throw DatasetError(static_cast<long>(expected), "unexpected trailing record");
  }
  return data;
}

}  // namespace annealil

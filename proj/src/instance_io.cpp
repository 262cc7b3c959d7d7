#include "urllc/instance_io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace urllc {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "urllc-instance/1";

json config_to_json(const NetworkConfig& c) {
  return json{{"num_antennas", c.num_antennas},   {"num_users", c.num_users},
              {"cell_radius_m", c.cell_radius_m}, {"ref_distance_m", c.ref_distance_m},
              {"pathloss_exponent", c.pathloss_exponent}, {"noise_sigma", c.noise_sigma},
              {"snr_db", c.snr_db}};
}

NetworkConfig config_from_json(const json& j) {
  NetworkConfig c;
  c.num_antennas = j.at("num_antennas").get<int>();
  c.num_users = j.at("num_users").get<int>();
  c.cell_radius_m = j.value("cell_radius_m", c.cell_radius_m);
  c.ref_distance_m = j.value("ref_distance_m", c.ref_distance_m);
  c.pathloss_exponent = j.value("pathloss_exponent", c.pathloss_exponent);
  c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
  c.snr_db = j.value("snr_db", c.snr_db);
  c.validate();
  return c;
}

}  // namespace

Instance make_instance(const NetworkConfig& config, std::uint64_t seed) {
  return Instance{config, seed, draw_channels(config, seed)};
}

void write_instance(std::ostream& out, const Instance& instance) {
  const auto& r = instance.realization;
  json users = json::array();
  for (int k = 0; k < r.num_users(); ++k) {
    json channel = json::array();
    for (Eigen::Index j = 0; j < r.channels[k].size(); ++j) {
      channel.push_back({r.channels[k][j].real(), r.channels[k][j].imag()});
    }
    users.push_back({{"position_m", {r.positions_m[k][0], r.positions_m[k][1]}},
                     {"distance_m", r.distances_m[k]},
                     {"noise_sigma", r.noise_sigmas[k]},
                     {"channel", std::move(channel)}});
  }
  json doc{{"format", kFormat},
           {"config", config_to_json(instance.config)},
           {"seed", instance.seed},
           {"users", std::move(users)}};
  out << doc.dump(2) << '\n';
}

Instance read_instance(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("instance file is not valid JSON: ") + e.what());
  }
  if (doc.value("format", std::string{}) != kFormat) {
    throw std::runtime_error("instance file has unknown format tag");
  }
  Instance inst;
  inst.config = config_from_json(doc.at("config"));
  inst.seed = doc.value("seed", std::uint64_t{0});

  std::vector<Eigen::VectorXcd> channels;
  std::vector<double> sigmas;
  std::vector<std::array<double, 2>> positions;
  for (const auto& u : doc.at("users")) {
    const auto& ch = u.at("channel");
    Eigen::VectorXcd h(static_cast<Eigen::Index>(ch.size()));
    for (std::size_t j = 0; j < ch.size(); ++j) {
      h[static_cast<Eigen::Index>(j)] = {ch[j].at(0).get<double>(), ch[j].at(1).get<double>()};
    }
    channels.push_back(std::move(h));
    sigmas.push_back(u.at("noise_sigma").get<double>());
    const auto& p = u.at("position_m");
    positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  }
  if (static_cast<int>(channels.size()) != inst.config.num_users) {
    throw std::runtime_error("instance user count does not match its config");
  }
  for (const auto& h : channels) {
    if (h.size() != inst.config.num_antennas) {
      throw std::runtime_error("instance channel length does not match the antenna count");
    }
  }
  inst.realization =
      ChannelRealization::from_channels(std::move(channels), std::move(sigmas), std::move(positions));
  // Keep stored distances verbatim (positions are rounded through text).
  const auto& users = doc.at("users");
  for (std::size_t k = 0; k < users.size(); ++k) {
    inst.realization.distances_m[k] = users[k].value("distance_m", inst.realization.distances_m[k]);
  }
  return inst;
}

void save_instance(const std::string& path, const Instance& instance) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_instance(out, instance);
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_instance(in);
}

}  // namespace urllc

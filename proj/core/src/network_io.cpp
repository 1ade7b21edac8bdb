#include "tvws/network_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tvws/errors.hpp"
#include "tvws/numerics.hpp"

namespace tvws {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw std::runtime_error(origin + ": " + what);
}

}  // namespace

Network parse_network(std::istream& in, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(origin, std::string("not valid JSON: ") + e.what());
  }

  try {
    const int num_channels = doc.at("num_channels").get<int>();
    const double bandwidth_hz = doc.at("bandwidth_hz").get<double>();
    const double noise_dbm = doc.at("noise_dbm").get<double>();
    const double pathloss_exp = doc.at("pathloss_exp").get<double>();

    const json& ap_rows = doc.at("aps");
    if (!ap_rows.is_array() || ap_rows.empty())
      fail(origin, "\"aps\" must be a non-empty array");

    std::vector<AccessPoint> aps;
    aps.reserve(ap_rows.size());
    for (const json& row : ap_rows) {
      AccessPoint ap;
      ap.id = row.at("id").get<int>();  // 1-based in files
      ap.x_m = row.at("x_m").get<double>();
      ap.y_m = row.at("y_m").get<double>();
      ap.tx_power_w = row.at("power_mw").get<double>() * 1e-3;
      ap.channels = row.at("channels").get<std::vector<int>>();
      ap.active_prob = row.at("active_prob").get<double>();
      ap.rx_distance_m = row.at("rx_distance_m").get<double>();
      aps.push_back(std::move(ap));
    }

    std::sort(aps.begin(), aps.end(),
              [](const AccessPoint& a, const AccessPoint& b) { return a.id < b.id; });
    for (std::size_t n = 0; n < aps.size(); ++n) {
      if (aps[n].id != static_cast<int>(n) + 1)
        fail(origin, "AP ids must be exactly 1..N (missing or duplicate id " +
                         std::to_string(n + 1) + ")");
      aps[n].id = static_cast<int>(n);  // 0-based internally
      std::sort(aps[n].channels.begin(), aps[n].channels.end());
    }

    return Network(std::move(aps), num_channels, bandwidth_hz,
                   dbm_to_watts(noise_dbm), pathloss_exp);
  } catch (const json::exception& e) {
    fail(origin, std::string("bad network document: ") + e.what());
  }
}

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open network file");
  return parse_network(in, path);
}

void write_network(const Network& net, std::ostream& out) {
  json doc;
  doc["schema_version"] = 1;
  doc["num_channels"] = net.num_channels();
  doc["bandwidth_hz"] = net.bandwidth_hz();
  doc["noise_dbm"] = watts_to_dbm(net.noise_watts());
  doc["pathloss_exp"] = net.pathloss_exp();
  json rows = json::array();
  for (const AccessPoint& ap : net.aps()) {
    json row;
    row["id"] = ap.id + 1;  // 1-based in files
    row["x_m"] = ap.x_m;
    row["y_m"] = ap.y_m;
    row["power_mw"] = ap.tx_power_w * 1e3;
    row["channels"] = ap.channels;
    row["active_prob"] = ap.active_prob;
    row["rx_distance_m"] = ap.rx_distance_m;
    rows.push_back(std::move(row));
  }
  doc["aps"] = std::move(rows);
  out << doc.dump(2) << "\n";
}

void save_network(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  write_network(net, out);
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace tvws

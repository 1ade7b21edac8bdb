#pragma once

#include <iosfwd>
#include <string>

#include "tvws/net_model.hpp"

namespace tvws {

/// Network files are JSON documents with top-level fields num_channels,
/// bandwidth_hz, noise_dbm, pathloss_exp and an "aps" array of records
/// {id, x_m, y_m, power_mw, channels, active_prob, rx_distance_m}.
/// AP ids and channel indices are 1-based in files; noise is in dBm and
/// power in mW, converted to watts at ingestion.
Network load_network(const std::string& path);
Network parse_network(std::istream& in, const std::string& origin);

void save_network(const Network& net, const std::string& path);
void write_network(const Network& net, std::ostream& out);

}  // namespace tvws

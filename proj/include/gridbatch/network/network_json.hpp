#pragma once

#include <string>
#include <string_view>

#include "gridbatch/network/transmission_network.hpp"

namespace gridbatch::network {

inline constexpr std::string_view kTransmissionSchema = "gridbatch.transmission/1";

/// Canonical JSON text of a network (schema gridbatch.transmission/1, see
/// README). Doubles are written in shortest round-trip form, so
/// network_from_json(network_to_json(n)) == n.
std::string network_to_json(const TransmissionNetwork& net);

/// Throws ParseError naming the offending JSON path, NetworkError for
/// structural problems.
TransmissionNetwork network_from_json(std::string_view text);

}  // namespace gridbatch::network

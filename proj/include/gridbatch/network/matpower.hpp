#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gridbatch/network/transmission_network.hpp"

namespace gridbatch::network {

/// Parse the bus/gen/branch/baseMVA subset of a MATPOWER version 2 case.
///
/// Powers are divided by baseMVA, angles converted to radians, a zero tap
/// ratio read as 1.0. The bus-type column decides the kind; a PV bus without
/// an in-service generator becomes PQ. Generators at one bus are summed and
/// must agree on Vg. Other mpc fields (gencost, bus_name, ...) are skipped.
/// Non-fatal findings are appended to `warnings` when given.
///
/// Throws ParseError (with line number) for malformed rows, duplicate bus
/// ids, unknown bus references, unsupported bus types or a missing slack,
/// and NetworkError for structural problems found by validate().
TransmissionNetwork parse_matpower_case(std::string_view text, std::vector<std::string>* warnings = nullptr);

}  // namespace gridbatch::network

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gridbatch::distribution {

struct ReferenceVoltage {
    std::string node;
    double vmag_pu = 0.0;
    double vang_deg = 0.0;
};

/// Reads `node,vmag_pu,vang_deg` rows. Throws ParseError with the line number
/// for a wrong header, a short row, a non-finite or unparsable number, or a
/// repeated node id.
std::vector<ReferenceVoltage> parse_reference_csv(std::string_view text);

}  // namespace gridbatch::distribution

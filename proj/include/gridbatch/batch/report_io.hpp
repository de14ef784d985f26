#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

#include "gridbatch/batch/run_batch.hpp"

namespace gridbatch::batch {

inline constexpr std::string_view kReportSchema = "gridbatch.report/1";

/// Run description written alongside the records.
struct ReportMeta {
    std::string kind;  ///< "tx" or "dist"
    std::string case_name;
    std::uint64_t seed = 0;
    double spread = 0.0;
};

/// JSON report (schema gridbatch.report/1). Every timing-dependent value is
/// inside the top-level "timing" object. Non-finite residuals become null.
void write_report_json(std::ostream& os, const BatchReport& rep, const ReportMeta& meta);

/// One row per scenario: index,converged,iterations,residual,diagnostic,wall_time.
/// wall_time is always the last column.
void write_report_csv(std::ostream& os, const BatchReport& rep);

/// Long format: index,element,vm,va_deg. Requires kept solutions.
void write_solutions_csv(std::ostream& os, const BatchReport& rep);

}  // namespace gridbatch::batch

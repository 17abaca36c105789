#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

#include "sfrlab/cost.hpp"

namespace sfrlab {

/// One published (name, flops, params) row, with discrepancy annotations
/// where the printed value is internally inconsistent.
struct ReferenceRow {
    std::string name;            // printed row label
    std::string preset;          // preset id to evaluate
    double published_flops = 0;      // as printed (already scaled to raw counts)
    double published_params = 0;     // as printed (raw count)
    double flops_tolerance = 0;  // relative; 0 means exact after table rounding
    double params_tolerance = 0;
    double round_unit_flops = 0; // table printing granularity (raw count)
    double round_unit_params = 0;
    // When set, the row is "flagged": the computed value is compared against
    // the derived correction and both figures are reported.
    std::optional<std::int64_t> derived_params;
    std::optional<std::int64_t> derived_flops;
    bool informational = false; // best-effort reconstruction, never gates exit
    std::string annotation;
};

struct ReferenceTable {
    std::string id; // "table2" | "table3" | "table4"
    TensorShape input;
    std::vector<ReferenceRow> rows;
};

ReferenceTable reference_table(const std::string& id); // throws on unknown id

enum class DiffStatus { Pass, Fail, Flagged };

struct DiffRow {
    std::string name;
    std::string metric; // "flops" | "params"
    std::int64_t computed = 0;
    double published = 0;
    double delta = 0;     // computed - published
    double rel_delta = 0; // delta / published
    DiffStatus status = DiffStatus::Pass;
    std::string annotation;
};

struct DiffReport {
    std::string table;
    std::vector<DiffRow> rows;
    bool all_unflagged_pass = true;
};

/// Evaluates every row's preset at the table's input shape and diffs the
/// computed totals against the printed values.
DiffReport verify_against_reference(const ReferenceTable& table);

nlohmann::json diff_report_to_json(const DiffReport& report);
std::string diff_status_name(DiffStatus s);

} // namespace sfrlab

#include "sfrlab/reference.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "sfrlab/presets.hpp"

namespace sfrlab {

namespace {

constexpr double M = 1e6;
constexpr double G = 1e9;
constexpr double K = 1e3;

ReferenceRow row(std::string name, std::string preset, double flops, double params) {
    ReferenceRow r;
    r.name = std::move(name);
    r.preset = std::move(preset);
    r.published_flops = flops;
    r.published_params = params;
    return r;
}

ReferenceTable table2() {
    ReferenceTable t;
    t.id = "table2";
    t.input = TensorShape(64, 64, 128);
    // Printed at 0.01 M FLOPs; params printed exactly (in K).
    auto exact_row = [](std::string name, std::string preset, double flops_m,
                        double params_k) {
        ReferenceRow r = row(std::move(name), std::move(preset), flops_m * M, params_k * K);
        r.round_unit_flops = 0.01 * M;
        r.round_unit_params = 1.0; // raw-count equality
        return r;
    };
    t.rows.push_back(exact_row("Bt", "block:Bt", 72.09, 17.1792));
    t.rows.back().derived_params = 17792;
    t.rows.back().annotation =
        "printed 17.1792 K is unreachable under the fitted counting convention; "
        "suspected digit-insertion typo for 17.792 K";
    t.rows.push_back(exact_row("Bt+Fac", "block:Bt-Fac", 59.64, 14.784));
    t.rows.push_back(exact_row("Bt+Dw", "block:Bt-Dw", 35.52, 8.864));
    t.rows.push_back(exact_row("Bt+Fac+Dw", "block:Bt-Fac-Dw", 35.26, 8.832));
    t.rows.push_back(exact_row("Non-bt", "block:NonBt", 1209.01, 295.424));
    t.rows.push_back(exact_row("Non-bt+Fac", "block:NonBt-Fac", 807.40, 197.120));
    t.rows.back().derived_params = 197632;
    t.rows.back().annotation =
        "printed FLOPs match BN after each 1D conv (807,403,520) but printed params "
        "match BN per pair; internally inconsistent, convention kept";
    t.rows.push_back(exact_row("Non-bt+Dw", "block:NonBt-Dw", 145.75, 36.096));
    t.rows.push_back(exact_row("Non-bt+Fac+Dw", "block:NonBt-Fac-Dw", 143.65, 35.840));
    return t;
}

ReferenceRow whole_net_row(std::string name, std::string preset, double flops_g,
                           double params_m) {
    // The published whole-network accounting of the initial block and decoder
    // is not disclosed; 5% tolerance.
    ReferenceRow r = row(std::move(name), std::move(preset), flops_g * G, params_m * M);
    r.flops_tolerance = 0.05;
    r.params_tolerance = 0.05;
    return r;
}

ReferenceTable table3() {
    ReferenceTable t;
    t.id = "table3";
    t.input = TensorShape(512, 512, 3);
    t.rows.push_back(whole_net_row("ESFNet-base", "esfnet-base", 2.514, 0.1775));
    t.rows.push_back(whole_net_row("ESF-ENet-down", "esf-enet-down", 2.744, 0.22));
    t.rows.push_back(whole_net_row("ESF-shuffle-down", "esf-shuffle-down", 2.513, 0.18));
    t.rows.push_back(whole_net_row("ESF-trans2x4x", "esf-trans2x4x", 2.112, 0.17));
    t.rows.back().informational = true;
    t.rows.back().annotation = "decoder reconstructed from prose only; not gated";
    t.rows.push_back(whole_net_row("ESF-trans8x", "esf-trans8x", 1.131, 0.10));
    t.rows.back().informational = true;
    t.rows.back().annotation =
        "decoder reconstructed from prose only; the zero-inserted-grid FLOPs "
        "convention charges k^2 taps per output, which overcounts sparse "
        "rate-8 transposed convs; not gated";
    t.rows.push_back(whole_net_row("ESF-interp8x", "esf-interp8x", 0.527, 0.09));
    t.rows.back().informational = true;
    t.rows.back().annotation = "decoder reconstructed from prose only; not gated";
    t.rows.push_back(whole_net_row("ESF-mini", "esf-mini", 2.373, 0.14));
    t.rows.push_back(whole_net_row("ESF-mini-ex", "esf-mini-ex", 2.299, 0.14));
    t.rows.back().derived_params = 132755;
    t.rows.back().annotation =
        "printed 0.14 M is coarse 2-digit rounding; the convention gives "
        "132,755 (5.2% below), consistent with base minus the six dropped blocks";
    return t;
}

ReferenceTable table4() {
    ReferenceTable t;
    t.id = "table4";
    t.input = TensorShape(512, 512, 3);
    t.rows.push_back(whole_net_row("Ours-base", "esfnet-base", 2.513, 0.18));
    t.rows.push_back(whole_net_row("Ours-mini", "esf-mini", 2.372, 0.14));
    t.rows.push_back(whole_net_row("Ours-mini-ex", "esf-mini-ex", 2.299, 0.14));
    t.rows.back().derived_params = 132755;
    t.rows.back().annotation = "see table3 ESF-mini-ex";
    return t;
}

DiffRow diff_metric(const ReferenceRow& row, const std::string& metric,
                    std::int64_t computed) {
    DiffRow d;
    d.name = row.name;
    d.metric = metric;
    d.computed = computed;
    d.published = metric == "flops" ? row.published_flops : row.published_params;
    d.delta = static_cast<double>(computed) - d.published;
    d.rel_delta = d.published != 0 ? d.delta / d.published : 0.0;
    d.annotation = row.annotation;

    const auto& derived = metric == "flops" ? row.derived_flops : row.derived_params;
    double tolerance = metric == "flops" ? row.flops_tolerance : row.params_tolerance;
    double round_unit = metric == "flops" ? row.round_unit_flops : row.round_unit_params;

    if (row.informational) {
        d.status = DiffStatus::Flagged;
    } else if (derived) {
        // Annotated discrepancy: the derived correction must match exactly.
        d.status = computed == *derived ? DiffStatus::Flagged : DiffStatus::Fail;
        if (d.status == DiffStatus::Fail)
            d.annotation = "computed value no longer matches the derived correction " +
                           std::to_string(*derived);
    } else if (tolerance > 0) {
        d.status = std::abs(d.rel_delta) <= tolerance ? DiffStatus::Pass : DiffStatus::Fail;
    } else {
        // Exact after table rounding.
        d.status = std::abs(d.delta) < round_unit / 2 ? DiffStatus::Pass : DiffStatus::Fail;
    }
    return d;
}

} // namespace

ReferenceTable reference_table(const std::string& id) {
    if (id == "table2") return table2();
    if (id == "table3") return table3();
    if (id == "table4") return table4();
    throw std::invalid_argument("unknown reference table: " + id);
}

DiffReport verify_against_reference(const ReferenceTable& table) {
    DiffReport report;
    report.table = table.id;
    for (const auto& row : table.rows) {
        CostReport cost = graph_cost(build_preset(row.preset), table.input);
        DiffRow flops = diff_metric(row, "flops", cost.total.flops);
        DiffRow params = diff_metric(row, "params", cost.total.params);
        for (const auto& d : {flops, params})
            if (d.status == DiffStatus::Fail) report.all_unflagged_pass = false;
        report.rows.push_back(std::move(flops));
        report.rows.push_back(std::move(params));
    }
    return report;
}

std::string diff_status_name(DiffStatus s) {
    switch (s) {
    case DiffStatus::Pass: return "pass";
    case DiffStatus::Fail: return "fail";
    case DiffStatus::Flagged: return "flagged";
    }
    return "?";
}

nlohmann::json diff_report_to_json(const DiffReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& d : report.rows) {
        nlohmann::json r{{"name", d.name},         {"metric", d.metric},
                         {"computed", d.computed}, {"published", d.published},
                         {"delta", d.delta},       {"status", diff_status_name(d.status)}};
        if (!d.annotation.empty()) r["annotation"] = d.annotation;
        rows.push_back(std::move(r));
    }
    return nlohmann::json{{"table", report.table},
                          {"rows", rows},
                          {"all_unflagged_pass", report.all_unflagged_pass}};
}

} // namespace sfrlab

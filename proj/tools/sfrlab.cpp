#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "sfrlab/arch_json.hpp"
#include "sfrlab/cost.hpp"
#include "sfrlab/executor.hpp"
#include "sfrlab/image_io.hpp"
#include "sfrlab/kernels.hpp"
#include "sfrlab/lower.hpp"
#include "sfrlab/metrics.hpp"
#include "sfrlab/presets.hpp"
#include "sfrlab/receptive_field.hpp"
#include "sfrlab/reference.hpp"

namespace {

using namespace sfrlab;

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;
constexpr int kExitVerify = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

TensorShape parse_input_size(const std::string& text) {
    int h = 0, w = 0, c = 0;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%dx%dx%d%c", &h, &w, &c, &extra) != 3 || h < 1 || w < 1 ||
        c < 1)
        throw UsageError("--input must be HxWxC with positive dimensions, got '" + text + "'");
    return TensorShape(h, w, c);
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

/// Resolves --preset/--arch into a graph plus its natural input shape.
struct ArchSource {
    std::string preset;
    std::string arch_file;

    void add_flags(CLI::App* cmd) {
        auto* p = cmd->add_option("--preset", preset, "preset id (see `presets`)");
        auto* a = cmd->add_option("--arch", arch_file, "architecture JSON file");
        p->excludes(a);
    }

    ParsedArch resolve() const {
        if (!preset.empty() && !arch_file.empty())
            throw UsageError("--preset and --arch are mutually exclusive");
        if (!preset.empty())
            return ParsedArch{build_preset(preset), preset_default_input(preset)};
        if (!arch_file.empty()) return graph_from_json_string(read_file(arch_file));
        throw UsageError("one of --preset or --arch is required");
    }
};

std::string human_shape(const TensorShape& s) {
    return std::to_string(s.height) + "x" + std::to_string(s.width) + "x" +
           std::to_string(s.channels);
}

nlohmann::json cost_report_to_json(const CostReport& r) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& id : r.node_order) {
        const CostEntry& e = r.per_node.at(id);
        const TensorShape& out = r.shapes.at(id).out;
        nodes.push_back(nlohmann::json{{"id", id},
                                       {"out_shape", {out.height, out.width, out.channels}},
                                       {"flops", e.flops},
                                       {"params", e.params}});
    }
    return nlohmann::json{
        {"preset", r.preset},
        {"input", {r.input.height, r.input.width, r.input.channels}},
        {"nodes", nodes},
        {"total_flops", r.total.flops},
        {"total_params", r.total.params},
        {"receptive_field", r.receptive_field},
        {"feature_stride", r.feature_stride},
        {"activation_peak_bytes", r.activation_peak_bytes},
    };
}

int cmd_analyze(const ArchSource& src, const std::string& input_flag, bool as_json) {
    ParsedArch arch = src.resolve();
    TensorShape input = input_flag.empty() ? arch.input : parse_input_size(input_flag);
    CostReport report = graph_cost(arch.graph, input);

    if (as_json) {
        std::cout << cost_report_to_json(report).dump(2) << "\n";
        return kExitOk;
    }
    std::printf("%-32s %-14s %16s %12s\n", "node", "output", "flops", "params");
    for (const auto& id : report.node_order) {
        const CostEntry& e = report.per_node.at(id);
        std::printf("%-32s %-14s %16lld %12lld\n", id.c_str(),
                    human_shape(report.shapes.at(id).out).c_str(),
                    static_cast<long long>(e.flops), static_cast<long long>(e.params));
    }
    std::printf("%-32s %-14s %16lld %12lld\n", "total", "",
                static_cast<long long>(report.total.flops),
                static_cast<long long>(report.total.params));
    std::printf("receptive_field=%d feature_stride=%d activation_peak_bytes=%lld\n",
                report.receptive_field, report.feature_stride,
                static_cast<long long>(report.activation_peak_bytes));
    return kExitOk;
}

int cmd_rf(const ArchSource& src) {
    ParsedArch arch = src.resolve();
    auto trace = receptive_field_trace(arch.graph);
    std::printf("%-32s %14s %16s\n", "node", "feature_stride", "receptive_field");
    for (const auto& [id, info] : trace)
        std::printf("%-32s %14d %16d\n", id.c_str(), info.feature_stride, info.rf);
    if (!trace.empty())
        std::printf("encoder_end=%s receptive_field=%d\n", trace.back().first.c_str(),
                    trace.back().second.rf);
    return kExitOk;
}

int cmd_verify(const std::string& table_id, bool as_json) {
    ReferenceTable table;
    try {
        table = reference_table(table_id);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    DiffReport report = verify_against_reference(table);
    if (as_json) {
        std::cout << diff_report_to_json(report).dump(2) << "\n";
    } else {
        std::printf("%-18s %-7s %16s %16s %-8s %s\n", "row", "metric", "computed", "printed",
                    "status", "note");
        for (const auto& d : report.rows)
            std::printf("%-18s %-7s %16lld %16.0f %-8s %s\n", d.name.c_str(), d.metric.c_str(),
                        static_cast<long long>(d.computed), d.published,
                        diff_status_name(d.status).c_str(), d.annotation.c_str());
        std::printf("all_unflagged_pass=%s\n", report.all_unflagged_pass ? "true" : "false");
    }
    return report.all_unflagged_pass ? kExitOk : kExitVerify;
}

int cmd_lower(const ArchSource& src, const std::string& out_path) {
    ParsedArch arch = src.resolve();
    std::string text = graph_to_json_string(lower(arch.graph), arch.input);
    if (out_path.empty()) {
        std::cout << text;
        return kExitOk;
    }
    std::ofstream os(out_path, std::ios::binary);
    os << text;
    if (!os) throw std::runtime_error("failed writing '" + out_path + "'");
    return kExitOk;
}

int cmd_init_weights(const ArchSource& src, std::uint64_t seed, const std::string& out_path) {
    ParsedArch arch = src.resolve();
    save_weights(init_weights(lower(arch.graph), seed), out_path);
    return kExitOk;
}

void dump_tap(const Tensor& t, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    auto put_u32 = [&](std::uint32_t v) { os.write(reinterpret_cast<char*>(&v), 4); };
    put_u32(static_cast<std::uint32_t>(t.channels()));
    put_u32(static_cast<std::uint32_t>(t.height()));
    put_u32(static_cast<std::uint32_t>(t.width()));
    os.write(reinterpret_cast<const char*>(t.data().data()),
             static_cast<std::streamsize>(t.data().size() * sizeof(float)));
    if (!os) throw std::runtime_error("failed writing tap '" + path + "'");
}

int cmd_infer(const ArchSource& src, const std::string& weights_path,
              const std::string& image_path, const std::string& out_path,
              const std::vector<std::string>& tap_nodes) {
    ParsedArch arch = src.resolve();
    NetworkGraph lowered = lower(arch.graph);
    WeightStore weights = load_weights(weights_path);

    Image img = read_image(image_path);
    if (img.height % 8 != 0 || img.width % 8 != 0)
        throw std::runtime_error("input is " + std::to_string(img.width) + "x" +
                                 std::to_string(img.height) +
                                 "; both sides must be divisible by 8 (three stride-2 "
                                 "stages) - pad or crop the image first");
    if (img.channels != arch.input.channels)
        throw std::runtime_error("image has " + std::to_string(img.channels) +
                                 " channels, the network expects " +
                                 std::to_string(arch.input.channels));

    // Normalize to [0, 1]; no mean subtraction.
    Tensor input(img.channels, img.height, img.width);
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                input.at(c, y, x) = static_cast<float>(img.at(y, x, c)) / 255.0f;

    std::set<std::string> taps(tap_nodes.begin(), tap_nodes.end());
    ForwardResult result = forward(lowered, weights, input, taps);
    Tensor classes = kernels::argmax_channels(result.output);

    std::vector<std::uint8_t> mask(static_cast<std::size_t>(img.height) * img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            mask[static_cast<std::size_t>(y) * img.width + x] =
                classes.at(0, y, x) > 0.5f ? 1 : 0;
    write_mask(mask, img.height, img.width, out_path);

    for (const auto& node : tap_nodes) {
        std::string safe_node = node;
        for (char& ch : safe_node)
            if (ch == '/') ch = '_';
        std::string file = out_path + "." + safe_node + ".tap";
        dump_tap(result.taps.at(node), file);
        std::printf("tap %s -> %s\n", node.c_str(), file.c_str());
    }
    std::printf("mask written to %s (%dx%d)\n", out_path.c_str(), img.width, img.height);
    return kExitOk;
}

int cmd_iou(const std::string& pred_path, const std::string& gt_path) {
    int ph = 0, pw = 0, gh = 0, gw = 0;
    auto pred = read_mask(pred_path, ph, pw);
    auto gt = read_mask(gt_path, gh, gw);
    if (ph != gh || pw != gw)
        throw std::runtime_error("mask sizes differ: " + std::to_string(pw) + "x" +
                                 std::to_string(ph) + " vs " + std::to_string(gw) + "x" +
                                 std::to_string(gh));
    ConfusionCounts c = confusion_counts(pred, gt);
    std::printf("tp=%lld fp=%lld fn=%lld tn=%lld\n", static_cast<long long>(c.tp),
                static_cast<long long>(c.fp), static_cast<long long>(c.fn),
                static_cast<long long>(c.tn));
    std::printf("iou=%.4f\n", iou(c));
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sfrlab: segmentation-network architecture analysis and inference"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    auto* presets_cmd = app.add_subcommand("presets", "list preset architecture ids");

    auto* analyze_cmd = app.add_subcommand("analyze", "per-layer cost report");
    ArchSource analyze_src;
    analyze_src.add_flags(analyze_cmd);
    std::string analyze_input;
    bool analyze_json = false, analyze_table = false;
    analyze_cmd->add_option("--input", analyze_input, "input size HxWxC");
    analyze_cmd->add_flag("--json", analyze_json, "JSON report");
    analyze_cmd->add_flag("--table", analyze_table, "aligned text table (default)");

    auto* rf_cmd = app.add_subcommand("rf", "receptive-field trace to the encoder end");
    ArchSource rf_src;
    rf_src.add_flags(rf_cmd);

    auto* verify_cmd = app.add_subcommand("verify", "diff computed costs against published rows");
    std::string verify_table;
    bool verify_json = false;
    verify_cmd->add_option("--table", verify_table, "table2 | table3 | table4")->required();
    verify_cmd->add_flag("--json", verify_json, "JSON report");

    auto* lower_cmd = app.add_subcommand("lower", "write the primitive-layer JSON");
    ArchSource lower_src;
    lower_src.add_flags(lower_cmd);
    std::string lower_out;
    lower_cmd->add_option("--out", lower_out, "output file (default stdout)");

    auto* init_cmd = app.add_subcommand("init-weights", "write seeded initial weights");
    ArchSource init_src;
    init_src.add_flags(init_cmd);
    std::uint64_t init_seed = 0;
    std::string init_out;
    init_cmd->add_option("--seed", init_seed, "RNG seed")->required();
    init_cmd->add_option("--out", init_out, "output .sfrw file")->required();

    auto* infer_cmd = app.add_subcommand("infer", "segment an image");
    ArchSource infer_src;
    infer_src.add_flags(infer_cmd);
    std::string infer_weights, infer_image, infer_out;
    std::vector<std::string> infer_taps;
    infer_cmd->add_option("--weights", infer_weights, "weights .sfrw file")->required();
    infer_cmd->add_option("--image", infer_image, "input PNG/PGM image")->required();
    infer_cmd->add_option("--out", infer_out, "output mask file")->required();
    infer_cmd->add_option("--tap", infer_taps, "dump a node's activation (repeatable)");

    auto* iou_cmd = app.add_subcommand("iou", "score a predicted mask against ground truth");
    std::string iou_pred, iou_gt;
    iou_cmd->add_option("--pred", iou_pred, "predicted mask")->required();
    iou_cmd->add_option("--gt", iou_gt, "ground-truth mask")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*presets_cmd) {
            for (const auto& id : preset_ids()) std::cout << id << "\n";
            return kExitOk;
        }
        if (*analyze_cmd) {
            if (analyze_json && analyze_table)
                throw UsageError("--json and --table are mutually exclusive");
            return cmd_analyze(analyze_src, analyze_input, analyze_json);
        }
        if (*rf_cmd) return cmd_rf(rf_src);
        if (*verify_cmd) return cmd_verify(verify_table, verify_json);
        if (*lower_cmd) return cmd_lower(lower_src, lower_out);
        if (*init_cmd) return cmd_init_weights(init_src, init_seed, init_out);
        if (*infer_cmd)
            return cmd_infer(infer_src, infer_weights, infer_image, infer_out, infer_taps);
        if (*iou_cmd) return cmd_iou(iou_pred, iou_gt);
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
}

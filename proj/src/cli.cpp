#include "coldspray/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "coldspray/checkpoint.hpp"
#include "coldspray/numeric.hpp"

namespace fs = std::filesystem;

namespace coldspray::cli {

namespace {

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const std::string& path, const std::string& content) {
    if (auto dir = fs::path(path).parent_path(); !dir.empty()) {
        fs::create_directories(dir);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        raise(ErrorKind::Io, "cannot write " + path);
    }
    out << content;
}

/// One manifest per artifact-producing command: config snapshot, seeds, and
/// content digests of every input and output file.
void write_manifest(const std::string& path, const std::string& command,
                    const nlohmann::ordered_json& config, const nlohmann::ordered_json& seeds,
                    const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["version"] = kToolkitVersion;
    j["timestamp"] = iso_timestamp();
    j["config"] = config;
    j["seeds"] = seeds;
    nlohmann::ordered_json in_digests, out_digests;
    for (const auto& p : inputs) {
        in_digests[fs::path(p).filename().string()] = file_digest(p);
    }
    for (const auto& p : outputs) {
        out_digests[fs::path(p).filename().string()] = file_digest(p);
    }
    j["inputs"] = std::move(in_digests);
    j["outputs"] = std::move(out_digests);
    write_text(path, j.dump(2) + "\n");
}

std::vector<Family> parse_families(const std::string& flag) {
    if (flag == "all") {
        return {Family::GraphSage, Family::ChebSpectral, Family::TdaMlp, Family::Gat};
    }
    auto family = family_from_string(flag);
    if (!family) {
        std::string valid;
        for (const auto& name : family_names()) {
            valid += (valid.empty() ? "" : ", ") + name;
        }
        raise(ErrorKind::InvalidArgument, "unknown family '" + flag + "' (valid: " + valid + ", all)");
    }
    return {*family};
}

std::vector<std::string> parse_targets(const std::string& flag) {
    if (flag == "all") {
        return {kTargetNames.begin(), kTargetNames.end()};
    }
    if (!target_index(flag)) {
        std::string valid;
        for (const auto* name : kTargetNames) {
            valid += (valid.empty() ? "" : ", ") + std::string(name);
        }
        raise(ErrorKind::UnknownParameter, "unknown target '" + flag + "' (valid: " + valid + ", all)");
    }
    return {flag};
}

std::string history_csv(const std::vector<double>& history) {
    std::string out = "epoch,loss\n";
    for (std::size_t e = 0; e < history.size(); ++e) {
        out += std::to_string(e) + "," + format_double(history[e]) + "\n";
    }
    return out;
}

std::string predictions_csv(const std::vector<SampleRecord>& records, std::size_t target,
                            const Tensor& predicted, const SplitMasks& masks) {
    std::string out = "index,actual,predicted,split\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        out += std::to_string(i) + ",";
        if (records[i].targets[target]) {
            out += format_double(*records[i].targets[target]);
        }
        out += "," + format_double(predicted.values[i]);
        out += masks.test_mask[i] ? ",test\n" : ",train\n";
    }
    return out;
}

Checkpoint make_checkpoint(const TrainCmd& cmd, const PipelineArtifacts& artifacts,
                           const SplitMasks& masks, const std::vector<SampleRecord>& records,
                           const TrainResult& run, const TrainConfig& tc, const std::string& graph_file) {
    Checkpoint c;
    c.config = run.model.config;
    c.train_config = tc;
    c.target = tc.target;
    c.k = cmd.k;
    c.input_stats = artifacts.input_stats;
    c.target_stats = run.target_stats;
    if (run.model.config.family == Family::TdaMlp) {
        c.descriptor_stats = artifacts.descriptor_stats;
    }
    c.masks = masks;
    c.input_medians = artifacts.input_medians;
    c.nodes_raw = input_matrix(records);
    c.sigma = artifacts.graph.sigma;
    c.lambda_max = artifacts.lambda_max;
    c.graph_file = graph_file;
    c.params = run.model.params;
    c.best_epoch = run.best_epoch;
    c.best_loss = run.best_loss;
    return c;
}

} // namespace

int exit_code_for(const Error& error) {
    return error.kind() == ErrorKind::NonFiniteLoss ? 3 : 2;
}

void run_generate(const GenerateCmd& cmd) {
    if (cmd.out.empty()) {
        raise(ErrorKind::InvalidArgument, "--out is required");
    }
    OracleConfig config;
    config.n_samples = cmd.n;
    config.seed = cmd.seed;
    config.noise_std = cmd.noise;
    config.validate();

    auto records = generate(config);
    write_text(cmd.out, to_csv(records));
    const std::string sidecar = cmd.out + ".oracle.json";
    write_text(sidecar, oracle_config_to_json(config));

    nlohmann::ordered_json snapshot = {{"n", cmd.n}, {"noise", cmd.noise}, {"out", cmd.out}};
    write_manifest(cmd.out + ".manifest.json", "generate", snapshot, {{"seed", cmd.seed}}, {},
                   {cmd.out, sidecar});
}

void run_train(const TrainCmd& cmd) {
    if (cmd.out.empty()) {
        raise(ErrorKind::InvalidArgument, "--out is required");
    }
    auto families = parse_families(cmd.family);
    auto targets = parse_targets(cmd.target);

    auto records = load_csv(cmd.data);
    for (const auto& warning : range_warnings(records)) {
        std::cerr << "warning: " << warning << "\n";
    }
    auto masks = split_masks(records.size(), cmd.test_fraction, cmd.seed);

    const bool with_tda = std::find(families.begin(), families.end(), Family::TdaMlp) != families.end();
    auto artifacts = build_artifacts(records, masks, cmd.k, with_tda);

    ModelConfig base_config;
    base_config.seed = cmd.seed;
    TrainConfig tc;
    tc.max_epochs = cmd.epochs;
    tc.learning_rate = cmd.learning_rate;
    tc.seed = cmd.seed;
    tc.target = targets.front();

    auto suite = run_suite(records, masks, artifacts, families, targets, base_config, tc);

    const fs::path out_dir(cmd.out);
    fs::create_directories(out_dir);
    const std::string graph_path = (out_dir / "graph.json").string();
    write_text(graph_path, graph_to_json(artifacts.graph));

    const bool single = suite.report.entries.size() == 1;
    std::vector<std::string> written = {graph_path};
    for (std::size_t cell = 0; cell < suite.report.entries.size(); ++cell) {
        const auto& entry = suite.report.entries[cell];
        const auto& run = suite.runs[cell];
        fs::path cell_dir = single ? out_dir : out_dir / (entry.family + "_" + entry.target);
        fs::create_directories(cell_dir);
        const std::string graph_ref = single ? "graph.json" : "../graph.json";

        TrainConfig cell_tc = tc;
        cell_tc.target = entry.target;
        auto checkpoint = make_checkpoint(cmd, artifacts, masks, records, run, cell_tc, graph_ref);
        const std::string ckpt_path = (cell_dir / "checkpoint.json").string();
        save_checkpoint(checkpoint, ckpt_path);
        const std::string hist_path = (cell_dir / "history.csv").string();
        write_text(hist_path, history_csv(run.loss_history));
        const std::string pred_path = (cell_dir / "predictions.csv").string();
        write_text(pred_path,
                   predictions_csv(records, *target_index(entry.target), suite.predictions[cell], masks));
        written.insert(written.end(), {ckpt_path, hist_path, pred_path});
    }

    const std::string metrics_json_path = (out_dir / "metrics.json").string();
    write_text(metrics_json_path, metrics_to_json(suite.report));
    const std::string metrics_txt_path = (out_dir / "metrics.txt").string();
    write_text(metrics_txt_path, metrics_to_table(suite.report));
    written.insert(written.end(), {metrics_json_path, metrics_txt_path});

    nlohmann::ordered_json snapshot = {
        {"data", cmd.data},          {"family", cmd.family}, {"target", cmd.target},
        {"k", cmd.k},                {"test_frac", cmd.test_fraction},
        {"epochs", cmd.epochs},      {"lr", cmd.learning_rate},
        {"out", cmd.out},
    };
    write_manifest((out_dir / "manifest.json").string(), "train", snapshot, {{"seed", cmd.seed}},
                   {cmd.data}, written);
}

void run_evaluate(const EvaluateCmd& cmd, std::ostream& stdout_stream) {
    if (cmd.checkpoints.empty()) {
        raise(ErrorKind::InvalidArgument, "--checkpoints is required");
    }
    auto records = load_csv(cmd.data);
    Tensor raw_features = input_matrix(records);
    std::vector<bool> all_rows(records.size(), true);

    const fs::path out_dir(cmd.out);
    fs::create_directories(out_dir);

    MetricsReport report;
    std::vector<std::string> written;
    for (const auto& ckpt_path : cmd.checkpoints) {
        auto model = load_model(ckpt_path);
        if (model.meta.masks.train_mask.size() != records.size()) {
            raise(ErrorKind::MaskMismatch,
                  "dataset has " + std::to_string(records.size()) + " rows, checkpoint split covers " +
                      std::to_string(model.meta.masks.train_mask.size()));
        }
        auto inputs = checkpoint_inputs(model.meta, model.graph, raw_features);
        Tensor pred = predict(model.instance, inputs);
        for (double& v : pred.values) {
            v = v * model.meta.target_stats.std_dev + model.meta.target_stats.mean;
        }
        const auto t_idx = target_index(model.meta.target);
        Tensor actual = target_column(records, *t_idx, all_rows);
        report.entries.push_back(compute_metrics(to_string(model.meta.config.family), model.meta.target,
                                                 actual, pred, model.meta.masks));

        // Test-mask rows only, for predicted-vs-actual plots.
        std::string csv = "actual,predicted\n";
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (model.meta.masks.test_mask[i]) {
                csv += format_double(actual.values[i]) + "," + format_double(pred.values[i]) + "\n";
            }
        }
        const std::string csv_path =
            (out_dir / (std::string(to_string(model.meta.config.family)) + "_" + model.meta.target +
                        "_predictions.csv"))
                .string();
        write_text(csv_path, csv);
        written.push_back(csv_path);
    }

    const std::string metrics_json = metrics_to_json(report);
    const std::string metrics_json_path = (out_dir / "metrics.json").string();
    write_text(metrics_json_path, metrics_json);
    const std::string metrics_txt_path = (out_dir / "metrics.txt").string();
    write_text(metrics_txt_path, metrics_to_table(report));
    written.insert(written.end(), {metrics_json_path, metrics_txt_path});

    if (cmd.json_stdout) {
        stdout_stream << metrics_json;
    } else {
        stdout_stream << metrics_to_table(report);
    }

    nlohmann::ordered_json snapshot = {{"checkpoints", cmd.checkpoints}, {"data", cmd.data}, {"out", cmd.out}};
    std::vector<std::string> inputs = cmd.checkpoints;
    inputs.push_back(cmd.data);
    write_manifest((out_dir / "evaluate.manifest.json").string(), "evaluate", snapshot, {}, inputs, written);
}

void run_surface(const SurfaceCmd& cmd) {
    if (cmd.out.empty()) {
        raise(ErrorKind::InvalidArgument, "--out is required");
    }
    if (cmd.grid < 2) {
        raise(ErrorKind::InvalidArgument, "--grid must be >= 2");
    }
    const auto eq = cmd.fix.find('=');
    if (eq == std::string::npos) {
        raise(ErrorKind::InvalidArgument, "--fix expects <param>=<value|median>");
    }
    const std::string param = cmd.fix.substr(0, eq);
    const std::string value_text = cmd.fix.substr(eq + 1);
    auto fixed_idx = input_index(param);
    if (!fixed_idx) {
        raise(ErrorKind::UnknownParameter,
              "unknown input '" + param + "' (valid: velocity, particle_temp, friction)");
    }

    auto model = load_model(cmd.checkpoint);
    double fixed_value;
    if (value_text == "median") {
        fixed_value = model.meta.input_medians[*fixed_idx];
    } else {
        auto parsed = parse_double(value_text);
        if (!parsed) {
            raise(ErrorKind::InvalidArgument, "--fix value '" + value_text + "' is not numeric");
        }
        fixed_value = *parsed;
    }

    const std::array<Range, kNumInputs> ranges = {kVelocityRange, kTempRange, kFrictionRange};
    std::vector<std::size_t> free_idx;
    for (std::size_t f = 0; f < kNumInputs; ++f) {
        if (f != *fixed_idx) {
            free_idx.push_back(f);
        }
    }

    auto linspace = [&](const Range& r, std::size_t i) {
        return r.lo + (r.hi - r.lo) * static_cast<double>(i) / static_cast<double>(cmd.grid - 1);
    };

    std::string csv = std::string(kInputNames[free_idx[0]]) + "," + kInputNames[free_idx[1]] + ",prediction\n";
    for (std::size_t i = 0; i < cmd.grid; ++i) {
        const double p1 = linspace(ranges[free_idx[0]], i);
        for (std::size_t j = 0; j < cmd.grid; ++j) {
            const double p2 = linspace(ranges[free_idx[1]], j);
            std::array<double, kNumInputs> q{};
            q[*fixed_idx] = fixed_value;
            q[free_idx[0]] = p1;
            q[free_idx[1]] = p2;
            const double pred = predict_point(model, q[0], q[1], q[2]);
            csv += format_double(p1) + "," + format_double(p2) + "," + format_double(pred) + "\n";
        }
    }
    write_text(cmd.out, csv);

    nlohmann::ordered_json snapshot = {{"checkpoint", cmd.checkpoint},
                                       {"fix", cmd.fix},
                                       {"fixed_value", fixed_value},
                                       {"grid", cmd.grid},
                                       {"target", model.meta.target},
                                       {"out", cmd.out}};
    write_manifest(cmd.out + ".manifest.json", "surface", snapshot, {}, {cmd.checkpoint}, {cmd.out});
}

void run_predict(const PredictCmd& cmd, std::ostream& stdout_stream) {
    SampleRecord probe;
    probe.velocity = cmd.velocity;
    probe.particle_temp = cmd.particle_temp;
    probe.friction = cmd.friction;
    validate_records({probe});

    auto model = load_model(cmd.checkpoint);
    const double value = predict_point(model, cmd.velocity, cmd.particle_temp, cmd.friction);
    stdout_stream << model.meta.target << " " << format_double(value) << "\n";
}

} // namespace coldspray::cli

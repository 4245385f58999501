#include "grasplab/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "grasplab/loss.hpp"
#include "grasplab/verify.hpp"

namespace grasplab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const json& v) {
    // architecture
    if (key == "in_channels") cfg.arch.in_channels = v.get<std::size_t>();
    else if (key == "in_height") cfg.arch.in_height = v.get<std::size_t>();
    else if (key == "in_width") cfg.arch.in_width = v.get<std::size_t>();
    else if (key == "category_extractor")
        cfg.arch.category_extractor = extractor_from_name(v.get<std::string>());
    else if (key == "grasp_extractor")
        cfg.arch.grasp_extractor = extractor_from_name(v.get<std::string>());
    else if (key == "category_extractor_fc")
        cfg.arch.category_extractor_fc = v.get<std::vector<std::size_t>>();
    else if (key == "category_classifier_fc")
        cfg.arch.category_classifier_fc = v.get<std::vector<std::size_t>>();
    else if (key == "grasp_extractor_fc")
        cfg.arch.grasp_extractor_fc = v.get<std::vector<std::size_t>>();
    else if (key == "grasp_classifier_fc")
        cfg.arch.grasp_classifier_fc = v.get<std::vector<std::size_t>>();
    else if (key == "conv_channels1") cfg.arch.conv_channels1 = v.get<std::size_t>();
    else if (key == "conv_channels2") cfg.arch.conv_channels2 = v.get<std::size_t>();
    else if (key == "conv_kernel") cfg.arch.conv_kernel = v.get<std::size_t>();
    else if (key == "conv_stride") cfg.arch.conv_stride = v.get<std::size_t>();
    else if (key == "pool_window") cfg.arch.pool_window = v.get<std::size_t>();
    else if (key == "grasp_norm") {
        const std::string m = v.get<std::string>();
        if (m == "standardize") cfg.arch.grasp_norm = NormMode::standardize;
        else if (m == "as_written") cfg.arch.grasp_norm = NormMode::as_written;
        else throw ConfigError("config: bad grasp_norm value '" + m + "'");
    }
    // training
    else if (key == "lr") cfg.train.adam.lr = v.get<double>();
    else if (key == "beta1") cfg.train.adam.beta1 = v.get<double>();
    else if (key == "beta2") cfg.train.adam.beta2 = v.get<double>();
    else if (key == "adam_eps") cfg.train.adam.eps = v.get<double>();
    else if (key == "batch_size") cfg.train.batch_size = v.get<std::size_t>();
    else if (key == "max_outer_iterations")
        cfg.train.max_outer_iterations = v.get<std::size_t>();
    else if (key == "convergence_eps") cfg.train.convergence_eps = v.get<double>();
    else if (key == "phase_order") {
        const std::string m = v.get<std::string>();
        if (m == "category_first") cfg.train.phase_order = PhaseOrder::category_first;
        else if (m == "grasp_first") cfg.train.phase_order = PhaseOrder::grasp_first;
        else throw ConfigError("config: bad phase_order value '" + m + "'");
    } else if (key == "sigma_floor") cfg.train.sigma_floor = v.get<double>();
    else if (key == "lambda_max") cfg.train.lambda_max = v.get<double>();
    // synthetic data
    else if (key == "categories") cfg.synth.num_categories = v.get<std::size_t>();
    else if (key == "grasps") cfg.synth.num_grasps = v.get<std::size_t>();
    else if (key == "objects_per_category")
        cfg.synth.objects_per_category = v.get<std::size_t>();
    else if (key == "views_per_object") cfg.synth.views_per_object = v.get<std::size_t>();
    else if (key == "channels") cfg.synth.channels = v.get<std::size_t>();
    else if (key == "height") cfg.synth.height = v.get<std::size_t>();
    else if (key == "width") cfg.synth.width = v.get<std::size_t>();
    else if (key == "noise_level") cfg.synth.noise_level = v.get<double>();
    else if (key == "object_scale") cfg.synth.object_scale = v.get<double>();
    else if (key == "category_to_grasp")
        cfg.synth.category_to_grasp = v.get<std::vector<std::size_t>>();
    else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
    else throw ConfigError("config: unknown key '" + key + "'");
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& config_path,
                                        const std::vector<std::string>& overrides) {
    ExperimentConfig cfg;
    if (!config_path.empty()) {
        std::ifstream is(config_path);
        if (!is) throw ConfigError("config: cannot open " + config_path);
        json j;
        try {
            j = json::parse(is, nullptr, true, true);
        } catch (const json::parse_error& e) {
            throw ConfigError("config: " + std::string(e.what()));
        }
        if (!j.is_object()) throw ConfigError("config: expected a JSON object");
        for (const auto& [key, value] : j.items()) apply_config_entry(cfg, key, value);
    }
    for (const auto& ov : overrides) {
        const auto pos = ov.find('=');
        if (pos == std::string::npos) {
            throw ConfigError("config: override '" + ov + "' is not key=value");
        }
        const std::string key = ov.substr(0, pos);
        const std::string text = ov.substr(pos + 1);
        json v;
        try {
            v = json::parse(text);
        } catch (const json::parse_error&) {
            v = text;  // bare words are strings
        }
        apply_config_entry(cfg, key, v);
    }
    return cfg;
}

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    bool deterministic = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "flat JSON config file");
    cmd->add_option("--set", o.overrides, "config override key=value (repeatable)");
    cmd->add_option("--seed", o.seed, "seed override")->each([&o](const std::string&) {
        o.seed_set = true;
    });
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_flag("--deterministic", o.deterministic,
                  "exclude timestamps so outputs are byte-reproducible");
}

ExperimentConfig resolve_config(const CommonOpts& o) {
    ExperimentConfig cfg = load_experiment_config(o.config_path, o.overrides);
    if (o.seed_set) cfg.seed = o.seed;
    cfg.arch.seed = cfg.seed;
    cfg.train.seed = cfg.seed;
    cfg.synth.seed = cfg.seed;
    return cfg;
}

void write_file(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path.string());
    os << text;
}

json metrics_json(const MetricsReport& r) {
    return json{{"ga", r.ga},     {"mrc", r.mrc},           {"mf1", r.mf1},
                {"recall", r.recall}, {"precision", r.precision}, {"f1", r.f1},
                {"support", r.support}};
}

void stamp(json& j, bool deterministic) {
    if (deterministic) return;
    const auto now = std::chrono::system_clock::now();
    j["timestamp_unix"] =
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
}

// Dataset for train/ablate: a manifest when given, synthetic otherwise.
Dataset resolve_dataset(const std::string& manifest, const ExperimentConfig& cfg,
                        bool resize_to_arch) {
    if (!manifest.empty()) {
        std::optional<std::vector<std::size_t>> target;
        if (resize_to_arch) {
            target = std::vector<std::size_t>{cfg.arch.in_channels, cfg.arch.in_height,
                                              cfg.arch.in_width};
        }
        return load_manifest(manifest, target);
    }
    return synth_generate(cfg.synth);
}

DatasetSplit resolve_split(const Dataset& data, Protocol protocol, std::size_t ocs_n,
                           std::uint64_t seed) {
    switch (protocol) {
        case Protocol::wwc: return split_wwc(data, seed);
        case Protocol::boc: return split_boc(data, seed);
        case Protocol::ocs: return split_ocs(data, ocs_n, seed);
    }
    throw ConfigError("bad protocol");
}

ArchConfig arch_for_dataset(ArchConfig arch, const Dataset& data) {
    arch.num_categories = data.num_categories;
    arch.num_grasps = data.num_grasps;
    if (!data.samples.empty()) {
        arch.in_channels = data.samples[0].image.dim(0);
        arch.in_height = data.samples[0].image.dim(1);
        arch.in_width = data.samples[0].image.dim(2);
    }
    return arch;
}

int cmd_synth(const CommonOpts& o) {
    ExperimentConfig cfg = resolve_config(o);
    if (o.out_dir.empty()) throw ConfigError("synth: --out is required");
    const Dataset data = synth_generate(cfg.synth);
    save_dataset(data, o.out_dir);
    std::cout << "synth: wrote " << data.size() << " samples to " << o.out_dir << "\n";
    return 0;
}

int cmd_split(const CommonOpts& o, const std::string& manifest, const std::string& protocol,
              std::size_t ocs_n, double mask_p) {
    ExperimentConfig cfg = resolve_config(o);
    if (manifest.empty()) throw ConfigError("split: --manifest is required");
    if (o.out_dir.empty()) throw ConfigError("split: --out is required");
    const Dataset data = load_manifest(manifest);
    DatasetSplit split = resolve_split(data, protocol_from_name(protocol), ocs_n, cfg.seed);
    if (mask_p < 1.0) {
        split.train = mask_grasp_labels(split.train, mask_p, cfg.seed);
    }
    const fs::path out(o.out_dir);
    save_dataset(split.train, out / "train");
    save_dataset(split.validation, out / "validation");
    save_dataset(split.test, out / "test");
    json summary;
    summary["protocol"] = protocol;
    summary["seed"] = cfg.seed;
    summary["mask_p"] = mask_p;
    summary["train"] = json::parse(dataset_summary_json(split.train));
    summary["validation"] = json::parse(dataset_summary_json(split.validation));
    summary["test"] = json::parse(dataset_summary_json(split.test));
    if (!split.warnings.empty()) summary["warnings"] = split.warnings;
    stamp(summary, o.deterministic);
    write_file(out / "summary.json", summary.dump(2) + "\n");
    std::cout << "split: train " << split.train.size() << ", validation "
              << split.validation.size() << ", test " << split.test.size() << "\n";
    return 0;
}

int cmd_stats(const CommonOpts& o, const std::string& manifest) {
    resolve_config(o);  // validates config/overrides even though only data is read
    if (manifest.empty()) throw ConfigError("stats: --manifest is required");
    const Dataset data = load_manifest(manifest);
    const CondProbMatrix w =
        estimate_cond_matrix(dataset_labels(data), data.num_categories, data.num_grasps);
    std::ostringstream csv;
    write_w_hat_csv(w, csv, data.grasp_names);
    if (o.out_dir.empty()) {
        std::cout << csv.str();
    } else {
        const fs::path out(o.out_dir);
        write_file(out / "w_hat.csv", csv.str());
        json summary = json::parse(dataset_summary_json(data));
        if (!w.uniform_rows.empty()) summary["uniform_fallback_rows"] = w.uniform_rows;
        write_file(out / "summary.json", summary.dump(2) + "\n");
        std::cout << "stats: wrote w_hat.csv and summary.json to " << o.out_dir << "\n";
    }
    return 0;
}

int cmd_gradcheck(const CommonOpts& o, std::size_t n_models, double eps, double threshold) {
    ExperimentConfig cfg = resolve_config(o);
    const JcearGradCheck result = jcear_gradcheck(cfg.seed, n_models, eps);
    for (std::size_t k = 0; k < result.per_model.size(); ++k) {
        std::cout << "model " << k << ": max rel error " << result.per_model[k] << "\n";
    }
    std::cout << "gradcheck: " << n_models << " models, max rel error " << result.max_rel
              << " (threshold " << threshold << ")\n";
    if (!o.out_dir.empty()) {
        json j;
        j["models"] = n_models;
        j["eps"] = eps;
        j["threshold"] = threshold;
        j["max_rel_error"] = result.max_rel;
        j["per_model"] = result.per_model;
        j["pass"] = result.max_rel <= threshold;
        stamp(j, o.deterministic);
        write_file(fs::path(o.out_dir) / "gradcheck.json", j.dump(2) + "\n");
    }
    return result.max_rel <= threshold ? 0 : 1;
}

struct RunOutcome {
    TrainResult result;
    EvalResult val;
    EvalResult test;
};

RunOutcome run_training(Variant variant, const ArchConfig& arch, ModelParams& params,
                        const DatasetSplit& split, const TrainConfig& tcfg,
                        const IterationCallback& cb = {}) {
    RunOutcome out;
    out.result = train_variant(variant, arch, params, split, tcfg, cb);
    if (!split.validation.empty()) {
        out.val = evaluate(arch, params, split.validation, &out.result.w);
    }
    if (!split.test.empty()) {
        out.test = evaluate(arch, params, split.test, &out.result.w);
    }
    return out;
}

json outcome_json(const RunOutcome& o, const DatasetSplit& split) {
    json j;
    j["converged"] = o.result.converged;
    j["iterations"] = o.result.history.size();
    j["final_loss"] = o.result.final_loss;
    j["sigma"] = o.result.sigma.sigma;
    if (!split.validation.empty()) {
        j["validation"] = {{"category", metrics_json(o.val.category)},
                           {"grasp", metrics_json(o.val.grasp)},
                           {"grasp_evaluated", o.val.grasp_evaluated},
                           {"mean_gamma_l1", o.val.mean_gamma_l1}};
    }
    if (!split.test.empty()) {
        j["test"] = {{"category", metrics_json(o.test.category)},
                     {"grasp", metrics_json(o.test.grasp)},
                     {"grasp_evaluated", o.test.grasp_evaluated},
                     {"mean_gamma_l1", o.test.mean_gamma_l1}};
    }
    return j;
}

int cmd_train(const CommonOpts& o, const std::string& manifest, const std::string& protocol,
              std::size_t ocs_n, double mask_p, const std::string& variant_str,
              std::size_t checkpoint_every) {
    ExperimentConfig cfg = resolve_config(o);
    if (o.out_dir.empty()) throw ConfigError("train: --out is required");
    const Variant variant = variant_from_name(variant_str);
    const fs::path out(o.out_dir);
    fs::create_directories(out);

    const Dataset data = resolve_dataset(manifest, cfg, false);
    DatasetSplit split = resolve_split(data, protocol_from_name(protocol), ocs_n, cfg.seed);
    if (mask_p < 1.0) split.train = mask_grasp_labels(split.train, mask_p, cfg.seed);

    ArchConfig arch = arch_for_dataset(cfg.arch, data);
    ModelParams params = init_model(arch);

    IterationCallback cb;
    if (checkpoint_every > 0) {
        cb = [&](std::size_t t, const ModelParams& p) {
            if (t % checkpoint_every == 0) {
                save_checkpoint((out / ("checkpoint_" + std::to_string(t) + ".bin")).string(),
                                arch, p);
            }
        };
    }

    const RunOutcome outcome = run_training(variant, arch, params, split, cfg.train, cb);

    save_checkpoint((out / "checkpoint.bin").string(), arch, params);
    write_file(out / "history.jsonl", history_to_jsonl(outcome.result.history));
    std::ostringstream wcsv;
    write_w_hat_csv(outcome.result.w, wcsv, data.grasp_names);
    write_file(out / "w_hat.csv", wcsv.str());

    json summary;
    summary["command"] = "train";
    summary["variant"] = variant_name(variant);
    summary["protocol"] = protocol;
    summary["seed"] = cfg.seed;
    summary["mask_p"] = mask_p;
    summary["train_size"] = split.train.size();
    summary["validation_size"] = split.validation.size();
    summary["test_size"] = split.test.size();
    summary.update(outcome_json(outcome, split));
    stamp(summary, o.deterministic);
    write_file(out / "summary.json", summary.dump(2) + "\n");

    std::cout << "train: " << variant_name(variant) << " finished after "
              << outcome.result.history.size() << " iterations";
    if (!split.test.empty()) std::cout << ", test grasp GA " << outcome.test.grasp.ga;
    std::cout << "\n";
    return 0;
}

int cmd_eval(const CommonOpts& o, const std::string& checkpoint, const std::string& manifest) {
    resolve_config(o);
    if (checkpoint.empty()) throw ConfigError("eval: --checkpoint is required");
    if (manifest.empty()) throw ConfigError("eval: --manifest is required");
    auto [arch, params] = load_checkpoint(checkpoint);
    const Dataset data = load_manifest(
        manifest,
        std::vector<std::size_t>{arch.in_channels, arch.in_height, arch.in_width});
    if (data.num_categories > arch.num_categories || data.num_grasps > arch.num_grasps) {
        throw ConfigError("eval: dataset has more classes than the checkpointed model");
    }
    const EvalResult res = evaluate(arch, params, data);
    json j;
    j["command"] = "eval";
    j["samples"] = data.size();
    j["category"] = metrics_json(res.category);
    j["grasp"] = metrics_json(res.grasp);
    j["grasp_evaluated"] = res.grasp_evaluated;
    stamp(j, o.deterministic);
    const std::string text = j.dump(2) + "\n";
    if (o.out_dir.empty()) {
        std::cout << text;
    } else {
        write_file(fs::path(o.out_dir) / "metrics.json", text);
        std::cout << "eval: category GA " << res.category.ga << ", grasp GA " << res.grasp.ga
                  << "\n";
    }
    return 0;
}

int cmd_ablate(const CommonOpts& o, const std::string& manifest, const std::string& protocol,
               std::size_t ocs_n, double mask_p, std::size_t n_seeds) {
    ExperimentConfig cfg = resolve_config(o);
    if (o.out_dir.empty()) throw ConfigError("ablate: --out is required");
    const fs::path out(o.out_dir);
    fs::create_directories(out);

    json runs = json::array();
    std::map<std::string, double> mean_grasp_ga, mean_cat_ga;
    for (std::size_t s = 0; s < n_seeds; ++s) {
        const std::uint64_t seed = cfg.seed + s;
        ExperimentConfig run_cfg = cfg;
        run_cfg.seed = seed;
        run_cfg.arch.seed = seed;
        run_cfg.train.seed = seed;
        run_cfg.synth.seed = seed;
        const Dataset data = resolve_dataset(manifest, run_cfg, false);
        DatasetSplit split =
            resolve_split(data, protocol_from_name(protocol), ocs_n, seed);
        if (mask_p < 1.0) split.train = mask_grasp_labels(split.train, mask_p, seed);
        const ArchConfig arch = arch_for_dataset(run_cfg.arch, data);
        for (Variant v : {Variant::v1, Variant::v2, Variant::v3}) {
            ModelParams params = init_model(arch);
            const RunOutcome outcome = run_training(v, arch, params, split, run_cfg.train);
            json r;
            r["seed"] = seed;
            r["variant"] = variant_name(v);
            r.update(outcome_json(outcome, split));
            runs.push_back(std::move(r));
            if (!split.test.empty()) {
                mean_grasp_ga[variant_name(v)] += outcome.test.grasp.ga;
                mean_cat_ga[variant_name(v)] += outcome.test.category.ga;
            }
        }
    }
    json report;
    report["command"] = "ablate";
    report["protocol"] = protocol;
    report["mask_p"] = mask_p;
    report["seeds"] = n_seeds;
    report["base_seed"] = cfg.seed;
    report["runs"] = runs;
    json means;
    for (const auto& [name, total] : mean_grasp_ga) {
        means[name] = {{"test_grasp_ga", total / static_cast<double>(n_seeds)},
                       {"test_category_ga", mean_cat_ga[name] / static_cast<double>(n_seeds)}};
    }
    report["means"] = means;
    stamp(report, o.deterministic);
    write_file(out / "ablation.json", report.dump(2) + "\n");

    std::cout << "variant  test grasp GA  test category GA\n";
    for (const auto& name : {"v1", "v2", "v3"}) {
        if (mean_grasp_ga.count(name)) {
            std::printf("%-8s %13.4f %17.4f\n", name,
                        mean_grasp_ga[name] / static_cast<double>(n_seeds),
                        mean_cat_ga[name] / static_cast<double>(n_seeds));
        }
    }
    return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
    CLI::App app{"grasp pattern recognition laboratory"};
    app.require_subcommand(1);

    CommonOpts o_train, o_eval, o_split, o_stats, o_grad, o_synth, o_ablate;
    std::string manifest_train, manifest_eval, manifest_split, manifest_stats, manifest_ablate;
    std::string protocol_train = "wwc", protocol_split = "wwc", protocol_ablate = "boc";
    std::string variant = "v3", checkpoint;
    std::size_t ocs_n_train = 1, ocs_n_split = 1, ocs_n_ablate = 1;
    double mask_train = 1.0, mask_split = 1.0, mask_ablate = 1.0;
    std::size_t checkpoint_every = 0, gradcheck_models = 20, ablate_seeds = 5;
    double gradcheck_eps = 1e-5, gradcheck_threshold = 1e-4;

    CLI::App* train_cmd =
        app.add_subcommand("train", "train a model and emit checkpoint + history");
    add_common(train_cmd, o_train);
    train_cmd->add_option("--manifest", manifest_train,
                          "dataset manifest CSV (omitted = synthetic from config)");
    train_cmd->add_option("--protocol", protocol_train, "wwc|boc|ocs")
        ->check(CLI::IsMember({"wwc", "boc", "ocs"}));
    train_cmd->add_option("--ocs-n", ocs_n_train, "OCS labeled objects per category");
    train_cmd->add_option("--mask-p", mask_train, "retained grasp-label proportion");
    train_cmd->add_option("--variant", variant, "v1|v2|v3")
        ->check(CLI::IsMember({"v1", "v2", "v3"}));
    train_cmd->add_option("--checkpoint-every", checkpoint_every,
                          "emit checkpoint every k outer iterations (0 = final only)");

    CLI::App* eval_cmd = app.add_subcommand("eval", "metrics from checkpoint + manifest");
    add_common(eval_cmd, o_eval);
    eval_cmd->add_option("--checkpoint", checkpoint, "model checkpoint");
    eval_cmd->add_option("--manifest", manifest_eval, "dataset manifest CSV");

    CLI::App* split_cmd = app.add_subcommand("split", "write train/validation/test manifests");
    add_common(split_cmd, o_split);
    split_cmd->add_option("--manifest", manifest_split, "dataset manifest CSV");
    split_cmd->add_option("--protocol", protocol_split, "wwc|boc|ocs")
        ->check(CLI::IsMember({"wwc", "boc", "ocs"}));
    split_cmd->add_option("--ocs-n", ocs_n_split, "OCS labeled objects per category");
    split_cmd->add_option("--mask-p", mask_split, "retained grasp-label proportion");

    CLI::App* stats_cmd = app.add_subcommand("stats", "co-occurrence matrix + data summary");
    add_common(stats_cmd, o_stats);
    stats_cmd->add_option("--manifest", manifest_stats, "dataset manifest CSV");

    CLI::App* grad_cmd = app.add_subcommand("gradcheck",
                                            "autodiff vs finite-difference report");
    add_common(grad_cmd, o_grad);
    grad_cmd->add_option("--models", gradcheck_models, "number of seeded models");
    grad_cmd->add_option("--eps", gradcheck_eps, "finite-difference step");
    grad_cmd->add_option("--threshold", gradcheck_threshold, "max relative error to pass");

    CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
    add_common(synth_cmd, o_synth);

    CLI::App* ablate_cmd =
        app.add_subcommand("ablate", "run v1/v2/v3 on identical splits and seeds");
    add_common(ablate_cmd, o_ablate);
    ablate_cmd->add_option("--manifest", manifest_ablate,
                           "dataset manifest CSV (omitted = synthetic from config)");
    ablate_cmd->add_option("--protocol", protocol_ablate, "wwc|boc|ocs")
        ->check(CLI::IsMember({"wwc", "boc", "ocs"}));
    ablate_cmd->add_option("--ocs-n", ocs_n_ablate, "OCS labeled objects per category");
    ablate_cmd->add_option("--mask-p", mask_ablate, "retained grasp-label proportion");
    ablate_cmd->add_option("--seeds", ablate_seeds, "number of seeds");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 2;
    }

    try {
        if (train_cmd->parsed()) {
            return cmd_train(o_train, manifest_train, protocol_train, ocs_n_train, mask_train,
                             variant, checkpoint_every);
        }
        if (eval_cmd->parsed()) return cmd_eval(o_eval, checkpoint, manifest_eval);
        if (split_cmd->parsed()) {
            return cmd_split(o_split, manifest_split, protocol_split, ocs_n_split, mask_split);
        }
        if (stats_cmd->parsed()) return cmd_stats(o_stats, manifest_stats);
        if (grad_cmd->parsed()) {
            return cmd_gradcheck(o_grad, gradcheck_models, gradcheck_eps, gradcheck_threshold);
        }
        if (synth_cmd->parsed()) return cmd_synth(o_synth);
        if (ablate_cmd->parsed()) {
            return cmd_ablate(o_ablate, manifest_ablate, protocol_ablate, ocs_n_ablate,
                              mask_ablate, ablate_seeds);
        }
        std::cerr << app.help();
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace grasplab::cli

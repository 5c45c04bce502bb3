// Command-line front end: dataset generation, super-point caching, training,
// evaluation, ablation grids, and report emission.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pointmatch/config.hpp"
#include "pointmatch/eval.hpp"
#include "pointmatch/io.hpp"
#include "pointmatch/pipeline.hpp"

namespace fs = std::filesystem;
using namespace pointmatch;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string scheme;
    std::string ablation;
    std::uint64_t seed = 0;
    bool seed_set = false;
    long epochs = -1;
};

void add_config_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "run config file (key = value lines)");
    cmd->add_option("--scheme", flags.scheme,
                    "weak supervision scheme: ratio:F | points:K | oneclick");
    cmd->add_option("--ablation", flags.ablation,
                    "full | no-consistency | fixed-w:V | fast-decay:D");
    cmd->add_option_function<std::uint64_t>(
        "--seed",
        [&flags](std::uint64_t v) {
            flags.seed = v;
            flags.seed_set = true;
        },
        "root seed (overrides config)");
    cmd->add_option("--epochs", flags.epochs, "epoch count (overrides config)");
}

RunConfig resolve_config(const CommonFlags& flags) {
    RunConfig cfg;
    if (!flags.config_path.empty()) cfg = RunConfig::from_file(flags.config_path);
    if (flags.seed_set) cfg.seed = flags.seed;
    if (!flags.scheme.empty()) cfg.set("scheme", flags.scheme);
    if (!flags.ablation.empty()) cfg.set("ablation", flags.ablation);
    if (flags.epochs >= 0) cfg.train.epochs = flags.epochs;
    cfg.validate();
    return cfg;
}

int cmd_gen(const CommonFlags& flags, const std::string& out) {
    const RunConfig cfg = resolve_config(flags);
    generate_dataset(cfg, out);
    const auto manifest = read_manifest(fs::path(out) / "manifest.txt");
    std::cout << "generated " << manifest.size() << " scenes in " << out << "\n";
    return 0;
}

int cmd_superpoints(const CommonFlags& flags, const std::string& data) {
    const RunConfig cfg = resolve_config(flags);
    if (!fs::exists(fs::path(data) / "manifest.txt")) generate_dataset(cfg, data);
    const fs::path cache = ensure_superpoints(cfg, data);
    std::cout << "super-point cache at " << cache.string() << "\n";
    return 0;
}

int cmd_train(const CommonFlags& flags, const std::string& data, const std::string& out) {
    const RunConfig cfg = resolve_config(flags);
    const RunArtifacts art = run_train(cfg, data, out);
    std::cout << "trained " << cfg.train.epochs << " epochs; final val mIoU "
              << format_real(art.final_val_miou, 6) << "\n";
    std::cout << "metrics " << art.metrics_csv.string() << "\n";
    std::cout << "checkpoint " << art.checkpoint.string() << "\n";
    return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& data, const std::string& split,
             const std::string& out, std::size_t k_feat) {
    const MlpParams params = read_checkpoint(checkpoint);
    const auto manifest = read_manifest(fs::path(data) / "manifest.txt");

    std::vector<std::vector<long long>> conf;
    std::size_t scenes = 0;
    for (const auto& entry : manifest) {
        if (entry.split != split) continue;
        const PointCloud cloud = read_scene(fs::path(data) / entry.file);
        if (!cloud.has_gt())
            throw std::runtime_error("eval: scene " + entry.file + " has no ground truth");
        if (cloud.num_classes != params.num_classes())
            throw std::runtime_error("eval: checkpoint classes (" +
                                     std::to_string(params.num_classes()) +
                                     ") do not match dataset (" +
                                     std::to_string(cloud.num_classes) + ")");
        const Matrix feats = extract_features(cloud, k_feat);
        const ProbMatrix q = forward(params, feats);
        const ArgmaxResult pred = row_argmax(q);
        const auto scene_conf = confusion_matrix(pred.classes, cloud.gt_labels, cloud.num_classes);
        if (conf.empty()) {
            conf = scene_conf;
        } else {
            for (std::size_t i = 0; i < conf.size(); ++i)
                for (std::size_t j = 0; j < conf.size(); ++j) conf[i][j] += scene_conf[i][j];
        }
        ++scenes;
    }
    if (scenes == 0) throw std::runtime_error("eval: no scenes in split '" + split + "'");

    const IoUReport report = miou_from_confusion(conf);
    if (!out.empty()) {
        fs::create_directories(out);
        write_iou_report(fs::path(out) / "iou_report.txt", report);
    }
    std::cout << "scenes " << scenes << " split " << split << "\n";
    for (std::size_t k = 0; k < report.per_class_iou.size(); ++k) {
        std::cout << "class " << k << " iou "
                  << (report.defined[k] ? format_real(report.per_class_iou[k], 6)
                                        : std::string("-"))
                  << "\n";
    }
    std::cout << "miou " << format_real(report.miou, 6) << "\n";
    return 0;
}

int cmd_ablate(const CommonFlags& flags, const std::vector<std::string>& scheme_args,
               const std::string& out, std::size_t num_seeds) {
    RunConfig cfg = resolve_config(flags);
    std::vector<WeakScheme> schemes;
    if (scheme_args.empty()) {
        schemes.push_back(cfg.scheme);
    } else {
        for (const std::string& s : scheme_args) schemes.push_back(WeakScheme::parse(s));
    }
    fs::create_directories(out);
    const auto rows = run_ablation(cfg, schemes, num_seeds, out);
    const fs::path table = fs::path(out) / "ablation_table.txt";
    write_ablation_table(table, rows);
    std::cout << "scheme variant mean_miou\n";
    for (const auto& row : rows) {
        std::cout << row.scheme << " " << row.variant << " " << format_real(row.mean_miou, 6)
                  << "\n";
    }
    std::cout << "table " << table.string() << "\n";
    return 0;
}

int cmd_report(const std::string& metrics, const std::string& out) {
    const auto history = read_metrics_csv(metrics);
    fs::create_directories(out);
    const fs::path path = fs::path(out) / "report.txt";
    write_quality_report(path, history);
    const QualityReport q = summarize_pseudolabel_quality(history);
    std::cout << "first_quarter_logged " << q.logged_epochs << "\n";
    std::cout << "sp_ge_pt_fraction " << format_real(q.sp_ge_pt_fraction, 6) << "\n";
    std::cout << "report " << path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PointMatch consistency training on synthetic point-cloud scenes"};
    app.require_subcommand(1);

    CommonFlags gen_flags, sp_flags, train_flags, ablate_flags;
    std::string gen_out, sp_data, train_data, train_out;
    std::string eval_ckpt, eval_data, eval_split = "val", eval_out;
    std::size_t eval_k_feat = 8;
    std::vector<std::string> ablate_schemes;
    std::string ablate_out;
    std::size_t ablate_seeds = 3;
    std::string report_metrics, report_out;

    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset");
    add_config_flags(gen, gen_flags);
    gen->add_option("--out", gen_out, "dataset directory")->required();

    CLI::App* sp = app.add_subcommand("superpoints", "build the super-point cache");
    add_config_flags(sp, sp_flags);
    sp->add_option("--data", sp_data, "dataset directory")->required();

    CLI::App* train = app.add_subcommand("train", "train a model");
    add_config_flags(train, train_flags);
    train->add_option("--data", train_data, "dataset directory (generated on demand)")->required();
    train->add_option("--out", train_out, "run output directory")->required();

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint (no super-points)");
    eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
    eval->add_option("--data", eval_data, "dataset directory")->required();
    eval->add_option("--split", eval_split, "train | val (default val)");
    eval->add_option("--out", eval_out, "where to write iou_report.txt");
    eval->add_option("--k-feat", eval_k_feat, "feature neighborhood size (default 8)");

    CLI::App* ablate = app.add_subcommand("ablate", "run the ablation grid over shared seeds");
    add_config_flags(ablate, ablate_flags);
    ablate->add_option("--out", ablate_out, "work/output directory")->required();
    ablate->add_option("--schemes", ablate_schemes, "weak schemes to sweep (default: config scheme)");
    ablate->add_option("--num-seeds", ablate_seeds, "seed count (default 3)");

    CLI::App* report = app.add_subcommand("report", "pseudo-label quality report from metrics");
    report->add_option("--metrics", report_metrics, "metrics.csv from a training run")->required();
    report->add_option("--out", report_out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(gen_flags, gen_out);
        if (sp->parsed()) return cmd_superpoints(sp_flags, sp_data);
        if (train->parsed()) return cmd_train(train_flags, train_data, train_out);
        if (eval->parsed()) return cmd_eval(eval_ckpt, eval_data, eval_split, eval_out, eval_k_feat);
        if (ablate->parsed()) return cmd_ablate(ablate_flags, ablate_schemes, ablate_out, ablate_seeds);
        if (report->parsed()) return cmd_report(report_metrics, report_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

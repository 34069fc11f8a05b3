#include <CLI11.hpp>

#include <string>

#include "ggls/ggls.hpp"

namespace {

struct KernelFlagState {
    std::string kernel = "rbf";
    std::string bandwidth = "median";
    std::string mu_order = "before-projection";
    std::string config_path;
};

void add_model_flags(CLI::App& cmd, ggls::GglsConfig& cfg, KernelFlagState& kf) {
    cmd.add_option("--beta", cfg.beta, "Laplacian regularization weight");
    cmd.add_option("--gamma", cfg.gamma, "Source label fitting weight");
    cmd.add_option("--lambda1", cfg.lambda1, "Row-sparsity (l2,1) weight");
    cmd.add_option("--lambda2", cfg.lambda2, "Kernel ridge weight");
    cmd.add_option("--dim", cfg.subspace_dim, "Subspace dimension for manifold features");
    cmd.add_option("--neighbors", cfg.neighbor_count, "Neighbor count for graph and attention");
    cmd.add_option("--iterations", cfg.max_iterations, "Maximum training iterations");
    cmd.add_option("--kernel", kf.kernel, "Kernel function: rbf or linear");
    cmd.add_option("--bandwidth", kf.bandwidth, "RBF bandwidth: 'median' or a positive sigma");
    cmd.add_flag("--no-landmark", cfg.no_landmark, "Disable attention landmark selection");
    cmd.add_flag("--no-manifold", cfg.no_manifold, "Disable manifold feature learning");
    cmd.add_flag("--no-kernel", cfg.no_kernel, "Use the raw feature Gram matrix as K");
    cmd.add_option("--mu-order", kf.mu_order,
                   "Balance factor update: before-projection or after-projection");
    cmd.add_flag("!--no-normalize", cfg.normalize_features,
                 "Disable z-score + unit-norm preprocessing");
    cmd.add_option("--seed", cfg.seed, "Seed recorded with the run");
    cmd.add_option("--config", kf.config_path,
                   "Flat key = value configuration file; flags override file values");
}

/// Command-line strings become typed config values; config-file entries
/// apply afterwards for every key not explicitly set on the command line.
void finalize_config(const CLI::App& cmd, ggls::GglsConfig& cfg, const KernelFlagState& kf) {
    cfg.kernel.kind = ggls::kernel_kind_from_string(kf.kernel);
    ggls::set_bandwidth_from_string(cfg.kernel, kf.bandwidth);
    cfg.mu_update_order = ggls::mu_order_from_string(kf.mu_order);
    if (kf.config_path.empty()) return;
    for (const ggls::ConfigFileEntry& entry : ggls::parse_config_file(kf.config_path)) {
        const CLI::Option* opt = cmd.get_option_no_throw("--" + entry.key);
        if (opt != nullptr && opt->count() > 0) continue; // flags win
        ggls::apply_config_entry(cfg, entry);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grassmannian graph-attentional landmark selection for domain adaptation"};
    app.require_subcommand(1);

    ggls::AdaptOptions adapt;
    KernelFlagState adapt_kf;
    CLI::App* adapt_cmd = app.add_subcommand("adapt", "Train on a source/target pair and label the target");
    adapt_cmd->add_option("--source", adapt.source_path, "Source feature CSV");
    adapt_cmd->add_option("--target", adapt.target_path, "Target feature CSV");
    auto* adapt_synth = adapt_cmd->add_option("--synthetic", adapt.synthetic_spec,
                                              "Generate data instead: key=value[,key=value...]");
    adapt_synth->expected(0, 1);
    adapt_cmd->add_option("--out", adapt.out_dir, "Output directory");
    adapt_cmd->add_flag("--emit-embeddings", adapt.emit_embeddings,
                        "Also write the embedded features for external visualization");
    add_model_flags(*adapt_cmd, adapt.config, adapt_kf);

    ggls::AblateOptions ablate;
    KernelFlagState ablate_kf;
    CLI::App* ablate_cmd = app.add_subcommand("ablate", "Run the full model and its ablations");
    ablate_cmd->add_option("--source", ablate.source_path, "Source feature CSV");
    ablate_cmd->add_option("--target", ablate.target_path, "Target feature CSV");
    auto* ablate_synth = ablate_cmd->add_option("--synthetic", ablate.synthetic_spec,
                                                "Generate data instead: key=value[,key=value...]");
    ablate_synth->expected(0, 1);
    ablate_cmd->add_option("--out", ablate.out_dir, "Output directory");
    add_model_flags(*ablate_cmd, ablate.config, ablate_kf);

    ggls::SynthOptions synth;
    CLI::App* synth_cmd = app.add_subcommand("synth", "Write a synthetic source/target CSV pair");
    synth_cmd->add_option("--classes", synth.spec.class_count, "Number of classes");
    synth_cmd->add_option("--source-per-class", synth.spec.samples_per_class_source,
                          "Source samples per class");
    synth_cmd->add_option("--target-per-class", synth.spec.samples_per_class_target,
                          "Target samples per class");
    synth_cmd->add_option("--dim", synth.spec.dimension, "Feature dimension");
    synth_cmd->add_option("--angle", synth.spec.rotation_angle_degrees,
                          "Rotation of the target domain in the first two coordinates, degrees");
    synth_cmd->add_option("--translation", synth.spec.translation_magnitude,
                          "Target translation magnitude");
    synth_cmd->add_option("--noise", synth.spec.noise_sigma, "Class cloud standard deviation");
    synth_cmd->add_option("--seed", synth.spec.seed, "Generator seed");
    synth_cmd->add_option("--out", synth.out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // bad flags or config file are configuration errors
    }

    if (adapt_cmd->parsed()) {
        adapt.use_synthetic = adapt_synth->count() > 0;
        const int status = ggls::detail::run_with_exit_status(
            [&] { finalize_config(*adapt_cmd, adapt.config, adapt_kf); });
        return status != 0 ? status : ggls::cmd_adapt(adapt);
    }
    if (ablate_cmd->parsed()) {
        ablate.use_synthetic = ablate_synth->count() > 0;
        const int status = ggls::detail::run_with_exit_status(
            [&] { finalize_config(*ablate_cmd, ablate.config, ablate_kf); });
        return status != 0 ? status : ggls::cmd_ablate(ablate);
    }
    return ggls::cmd_synth(synth);
}

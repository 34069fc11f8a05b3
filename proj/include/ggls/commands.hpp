#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "ggls/dataset.hpp"
#include "ggls/errors.hpp"
#include "ggls/eval.hpp"
#include "ggls/solver.hpp"

namespace ggls {

/// Ordered key = value snapshot of one command invocation, written
/// atomically next to the other outputs.
struct RunManifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> entries;

    void add(const std::string& key, const std::string& value) {
        entries.emplace_back(key, value);
    }
    void add(const std::string& key, double value) { add(key, detail::format17(value)); }
    void add(const std::string& key, std::int64_t value) { add(key, std::to_string(value)); }
    void add(const std::string& key, bool value) { add(key, value ? std::string("true") : std::string("false")); }
};

struct AdaptOptions {
    std::string source_path;
    std::string target_path;
    std::string synthetic_spec; // non-empty selects the synthetic generator
    bool use_synthetic = false;
    std::string out_dir = ".";
    GglsConfig config;
    bool emit_embeddings = false;
};

struct AblateOptions {
    std::string source_path;
    std::string target_path;
    std::string synthetic_spec;
    bool use_synthetic = false;
    std::string out_dir = ".";
    GglsConfig config;
};

struct SynthOptions {
    SyntheticShiftSpec spec;
    std::string out_dir = ".";
};

inline std::string kernel_kind_to_string(KernelKind k) {
    return k == KernelKind::linear ? "linear" : "rbf";
}

inline KernelKind kernel_kind_from_string(const std::string& s) {
    if (s == "linear") return KernelKind::linear;
    if (s == "rbf") return KernelKind::rbf;
    throw ConfigError("config: unknown kernel '" + s + "' (expected rbf or linear)");
}

inline std::string bandwidth_to_string(const KernelParams& p) {
    return p.median_bandwidth ? std::string("median") : detail::format17(p.bandwidth);
}

inline void set_bandwidth_from_string(KernelParams& p, const std::string& s) {
    if (s == "median") {
        p.median_bandwidth = true;
        return;
    }
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || !(v > 0.0))
        throw ConfigError("config: bandwidth must be 'median' or a positive number");
    p.median_bandwidth = false;
    p.bandwidth = v;
}

inline std::string mu_order_to_string(MuUpdateOrder o) {
    return o == MuUpdateOrder::before_projection ? "before-projection" : "after-projection";
}

inline MuUpdateOrder mu_order_from_string(const std::string& s) {
    if (s == "before-projection") return MuUpdateOrder::before_projection;
    if (s == "after-projection") return MuUpdateOrder::after_projection;
    throw ConfigError("config: unknown mu update order '" + s + "'");
}

struct ConfigFileEntry {
    std::string key;
    std::string value;
};

/// Flat "key = value" configuration file; '#' starts a comment, blank
/// lines are skipped, anything else must be a key = value pair.
inline std::vector<ConfigFileEntry> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::vector<ConfigFileEntry> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::strip(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " of " + path +
                              " is not a key = value pair");
        ConfigFileEntry entry{detail::strip(line.substr(0, eq)),
                              detail::strip(line.substr(eq + 1))};
        if (entry.key.empty())
            throw ConfigError("config: empty key on line " + std::to_string(lineno) + " of " +
                              path);
        entries.push_back(std::move(entry));
    }
    return entries;
}

namespace detail {

inline double config_double(const ConfigFileEntry& e) {
    char* end = nullptr;
    const double v = std::strtod(e.value.c_str(), &end);
    if (end == e.value.c_str() || *end != '\0' || !std::isfinite(v))
        throw ConfigError("config: value for '" + e.key + "' is not numeric");
    return v;
}

inline long config_int(const ConfigFileEntry& e) {
    char* end = nullptr;
    const long v = std::strtol(e.value.c_str(), &end, 10);
    if (end == e.value.c_str() || *end != '\0')
        throw ConfigError("config: value for '" + e.key + "' is not an integer");
    return v;
}

inline bool config_bool(const ConfigFileEntry& e) {
    if (e.value == "true" || e.value == "1") return true;
    if (e.value == "false" || e.value == "0") return false;
    throw ConfigError("config: value for '" + e.key + "' is not a boolean");
}

} // namespace detail

/// Applies one config-file entry. Keys mirror the command-line flag names;
/// unknown keys are errors so typos fail fast.
inline void apply_config_entry(GglsConfig& cfg, const ConfigFileEntry& e) {
    if (e.key == "beta")
        cfg.beta = detail::config_double(e);
    else if (e.key == "gamma")
        cfg.gamma = detail::config_double(e);
    else if (e.key == "lambda1")
        cfg.lambda1 = detail::config_double(e);
    else if (e.key == "lambda2")
        cfg.lambda2 = detail::config_double(e);
    else if (e.key == "dim")
        cfg.subspace_dim = static_cast<int>(detail::config_int(e));
    else if (e.key == "neighbors")
        cfg.neighbor_count = static_cast<int>(detail::config_int(e));
    else if (e.key == "iterations")
        cfg.max_iterations = static_cast<int>(detail::config_int(e));
    else if (e.key == "kernel")
        cfg.kernel.kind = kernel_kind_from_string(e.value);
    else if (e.key == "bandwidth")
        set_bandwidth_from_string(cfg.kernel, e.value);
    else if (e.key == "mu-order")
        cfg.mu_update_order = mu_order_from_string(e.value);
    else if (e.key == "no-landmark")
        cfg.no_landmark = detail::config_bool(e);
    else if (e.key == "no-manifold")
        cfg.no_manifold = detail::config_bool(e);
    else if (e.key == "no-kernel")
        cfg.no_kernel = detail::config_bool(e);
    else if (e.key == "no-normalize")
        cfg.normalize_features = !detail::config_bool(e);
    else if (e.key == "seed")
        cfg.seed = static_cast<std::uint64_t>(detail::config_int(e));
    else
        throw ConfigError("config: unknown key '" + e.key + "' in configuration file");
}

/// "key=value,key=value" description of a synthetic dataset. Unset keys
/// keep their defaults; unknown keys are rejected.
inline SyntheticShiftSpec parse_synthetic_spec(const std::string& text) {
    SyntheticShiftSpec spec;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string item = text.substr(pos, comma - pos);
        pos = comma + 1;
        if (item.empty()) continue;
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: synthetic spec item '" + item + "' is not key=value");
        const std::string key = detail::strip(item.substr(0, eq));
        const std::string value = detail::strip(item.substr(eq + 1));
        char* end = nullptr;
        const double v = std::strtod(value.c_str(), &end);
        if (end == value.c_str() || *end != '\0')
            throw ConfigError("config: synthetic spec value '" + value + "' is not numeric");
        if (key == "classes")
            spec.class_count = static_cast<int>(v);
        else if (key == "source_per_class")
            spec.samples_per_class_source = static_cast<int>(v);
        else if (key == "target_per_class")
            spec.samples_per_class_target = static_cast<int>(v);
        else if (key == "dim")
            spec.dimension = static_cast<int>(v);
        else if (key == "angle")
            spec.rotation_angle_degrees = v;
        else if (key == "translation")
            spec.translation_magnitude = v;
        else if (key == "noise")
            spec.noise_sigma = v;
        else if (key == "seed")
            spec.seed = static_cast<std::uint64_t>(v);
        else
            throw ConfigError("config: unknown synthetic spec key '" + key + "'");
    }
    validate_spec(spec);
    return spec;
}

namespace detail {

inline std::string fnv1a_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataFormatError("data: cannot open " + path + " for digest");
    std::uint64_t h = 1469598103934665603ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
        if (!in) break;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return out;
}

inline void append_config(RunManifest& m, const GglsConfig& cfg) {
    m.add("config.beta", cfg.beta);
    m.add("config.gamma", cfg.gamma);
    m.add("config.lambda1", cfg.lambda1);
    m.add("config.lambda2", cfg.lambda2);
    m.add("config.dim", static_cast<std::int64_t>(cfg.subspace_dim));
    m.add("config.neighbors", static_cast<std::int64_t>(cfg.neighbor_count));
    m.add("config.iterations", static_cast<std::int64_t>(cfg.max_iterations));
    m.add("config.kernel", kernel_kind_to_string(cfg.kernel.kind));
    m.add("config.bandwidth", bandwidth_to_string(cfg.kernel));
    m.add("config.no_landmark", cfg.no_landmark);
    m.add("config.no_manifold", cfg.no_manifold);
    m.add("config.no_kernel", cfg.no_kernel);
    m.add("config.mu_update_order", mu_order_to_string(cfg.mu_update_order));
    m.add("config.normalize", cfg.normalize_features);
    m.add("config.seed", static_cast<std::int64_t>(cfg.seed));
}

inline void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataFormatError("data: cannot write " + tmp.string());
        out << "command = " << m.command << '\n';
        for (const auto& [k, v] : m.entries) out << k << " = " << v << '\n';
    }
    std::filesystem::rename(tmp, path);
}

inline void write_predictions_csv(const std::filesystem::path& path,
                                  const Eigen::VectorXi& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataFormatError("data: cannot write " + path.string());
    for (Eigen::Index i = 0; i < labels.size(); ++i)
        out << (i + 1) << ',' << labels[i] << '\n';
}

inline void write_trace_csv(const std::filesystem::path& path,
                            const std::vector<TraceRecord>& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataFormatError("data: cannot write " + path.string());
    for (const TraceRecord& r : trace) {
        out << r.iteration << ',' << format17(r.objective) << ',' << format17(r.mu) << ',';
        if (r.accuracy) out << format17(*r.accuracy);
        out << '\n';
    }
}

inline void write_embeddings_csv(const std::filesystem::path& path,
                                 const Eigen::MatrixXd& embedded_source,
                                 const Eigen::MatrixXd& embedded_target,
                                 const Eigen::VectorXi& source_labels,
                                 const Eigen::VectorXi& target_labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataFormatError("data: cannot write " + path.string());
    const auto emit = [&](int domain, const Eigen::MatrixXd& y, const Eigen::VectorXi& l) {
        for (Eigen::Index j = 0; j < y.cols(); ++j) {
            out << domain << ',' << l[j];
            for (Eigen::Index i = 0; i < y.rows(); ++i) out << ',' << format17(y(i, j));
            out << '\n';
        }
    };
    emit(0, embedded_source, source_labels);
    emit(1, embedded_target, target_labels);
}

inline DomainDataset resolve_dataset(const std::string& source_path,
                                     const std::string& target_path, bool use_synthetic,
                                     const std::string& synthetic_spec, RunManifest& manifest) {
    if (use_synthetic) {
        manifest.add("synthetic", synthetic_spec.empty() ? std::string("(defaults)")
                                                         : synthetic_spec);
        return generate_synthetic(parse_synthetic_spec(synthetic_spec));
    }
    if (source_path.empty() || target_path.empty())
        throw ConfigError("config: either --synthetic or both --source and --target are required");
    manifest.add("source", source_path);
    manifest.add("target", target_path);
    manifest.add("source_digest", fnv1a_digest(source_path));
    manifest.add("target_digest", fnv1a_digest(target_path));
    return load_dataset(source_path, target_path);
}

template <typename Fn>
int run_with_exit_status(Fn&& fn) {
    try {
        fn();
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const DataFormatError& e) {
        std::cerr << e.what() << '\n';
        return 3;
    } catch (const EvalError& e) {
        std::cerr << e.what() << '\n';
        return 3;
    } catch (const NumericError& e) {
        std::cerr << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace detail

/// Trains on the given pair of domains and writes predictions.csv,
/// trace.csv, optional embeddings.csv, and run_manifest.txt into the
/// output directory.
inline int cmd_adapt(const AdaptOptions& opts) {
    return detail::run_with_exit_status([&] {
        const auto start = std::chrono::steady_clock::now();
        opts.config.validate();

        RunManifest manifest;
        manifest.command = "adapt";
        const DomainDataset dataset =
            detail::resolve_dataset(opts.source_path, opts.target_path, opts.use_synthetic,
                                    opts.synthetic_spec, manifest);
        detail::append_config(manifest, opts.config);

        const FittedModel model = fit(dataset, opts.config);

        const std::filesystem::path out_dir(opts.out_dir);
        std::filesystem::create_directories(out_dir);
        const auto predictions_path = out_dir / "predictions.csv";
        const auto trace_path = out_dir / "trace.csv";
        detail::write_predictions_csv(predictions_path, model.pseudo_labels);
        detail::write_trace_csv(trace_path, model.trace);
        manifest.add("out.predictions", predictions_path.string());
        manifest.add("out.trace", trace_path.string());

        if (opts.emit_embeddings) {
            const Eigen::VectorXi target_labels =
                dataset.target_labels ? *dataset.target_labels : model.pseudo_labels;
            const auto embeddings_path = out_dir / "embeddings.csv";
            detail::write_embeddings_csv(
                embeddings_path, model.embedded_source(),
                model.embedded_features.rightCols(dataset.target_count()),
                dataset.source_labels, target_labels);
            manifest.add("out.embeddings", embeddings_path.string());
        }

        if (dataset.target_labels) {
            const double acc = accuracy(model.pseudo_labels, *dataset.target_labels);
            std::cout << "accuracy: " << detail::format17(acc) << '\n';
        }
        std::cout << "iterations: " << model.iterations_executed << '\n';

        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        manifest.add("iterations_executed",
                     static_cast<std::int64_t>(model.iterations_executed));
        manifest.add("duration_seconds", seconds);
        detail::write_manifest(out_dir / "run_manifest.txt", manifest);
    });
}

/// Runs the ablation suite and writes summary.csv (variant,accuracy,
/// duration_seconds), per-variant prediction files, and the manifest.
inline int cmd_ablate(const AblateOptions& opts) {
    return detail::run_with_exit_status([&] {
        const auto start = std::chrono::steady_clock::now();
        opts.config.validate();

        RunManifest manifest;
        manifest.command = "ablate";
        const DomainDataset dataset =
            detail::resolve_dataset(opts.source_path, opts.target_path, opts.use_synthetic,
                                    opts.synthetic_spec, manifest);
        detail::append_config(manifest, opts.config);

        const std::filesystem::path out_dir(opts.out_dir);
        std::filesystem::create_directories(out_dir);

        std::ofstream summary(out_dir / "summary.csv", std::ios::binary);
        if (!summary)
            throw DataFormatError("data: cannot write " + (out_dir / "summary.csv").string());

        for (const auto& variant : ablation_suite(dataset, opts.config)) {
            const auto pred_path = out_dir / ("predictions_" + variant.first + ".csv");
            detail::write_predictions_csv(pred_path, variant.second.predictions);
            manifest.add("out.predictions." + variant.first, pred_path.string());
            summary << variant.first << ',' << detail::format17(variant.second.accuracy)
                    << ',' << detail::format17(variant.second.duration_seconds) << '\n';
            std::cout << variant.first << ": " << detail::format17(variant.second.accuracy)
                      << '\n';
        }
        summary.close();
        manifest.add("out.summary", (out_dir / "summary.csv").string());

        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        manifest.add("duration_seconds", seconds);
        detail::write_manifest(out_dir / "run_manifest.txt", manifest);
    });
}

/// Generates a synthetic source/target pair and writes them as feature
/// CSVs (source.csv, target.csv) plus the manifest.
inline int cmd_synth(const SynthOptions& opts) {
    return detail::run_with_exit_status([&] {
        const auto start = std::chrono::steady_clock::now();
        const DomainDataset dataset = generate_synthetic(opts.spec);

        const std::filesystem::path out_dir(opts.out_dir);
        std::filesystem::create_directories(out_dir);
        write_features_csv((out_dir / "source.csv").string(), dataset.source_features,
                           dataset.source_labels);
        write_features_csv((out_dir / "target.csv").string(), dataset.target_features,
                           *dataset.target_labels);

        RunManifest manifest;
        manifest.command = "synth";
        manifest.add("spec.classes", static_cast<std::int64_t>(opts.spec.class_count));
        manifest.add("spec.source_per_class",
                     static_cast<std::int64_t>(opts.spec.samples_per_class_source));
        manifest.add("spec.target_per_class",
                     static_cast<std::int64_t>(opts.spec.samples_per_class_target));
        manifest.add("spec.dim", static_cast<std::int64_t>(opts.spec.dimension));
        manifest.add("spec.angle", opts.spec.rotation_angle_degrees);
        manifest.add("spec.translation", opts.spec.translation_magnitude);
        manifest.add("spec.noise", opts.spec.noise_sigma);
        manifest.add("spec.seed", static_cast<std::int64_t>(opts.spec.seed));
        manifest.add("out.source", (out_dir / "source.csv").string());
        manifest.add("out.target", (out_dir / "target.csv").string());
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        manifest.add("duration_seconds", seconds);
        detail::write_manifest(out_dir / "run_manifest.txt", manifest);
    });
}

} // namespace ggls

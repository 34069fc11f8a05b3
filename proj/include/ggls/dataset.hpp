#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "ggls/errors.hpp"
#include "ggls/rng.hpp"

namespace ggls {

/// Labeled source samples plus unlabeled target samples, one column per
/// sample. Target labels, when present, are carried for evaluation only and
/// never enter training.
struct DomainDataset {
    Eigen::MatrixXd source_features; // D x Ns
    Eigen::VectorXi source_labels;   // length Ns, values in 1..class_count
    Eigen::MatrixXd target_features; // D x Nt
    std::optional<Eigen::VectorXi> target_labels;
    int class_count = 0;

    Eigen::Index dimension() const { return source_features.rows(); }
    Eigen::Index source_count() const { return source_features.cols(); }
    Eigen::Index target_count() const { return target_features.cols(); }
    Eigen::Index total_count() const { return source_count() + target_count(); }

    /// All samples as one matrix, source columns first.
    Eigen::MatrixXd joint_features() const {
        Eigen::MatrixXd x(dimension(), total_count());
        x.leftCols(source_count()) = source_features;
        x.rightCols(target_count()) = target_features;
        return x;
    }
};

/// One-hot label matrix: column n is the indicator of sample n's class;
/// columns of unlabeled samples stay all-zero.
struct LabelMatrix {
    Eigen::MatrixXd one_hot; // C x N
};

/// Parameters of the synthetic shifted-domain generator.
struct SyntheticShiftSpec {
    int class_count = 3;
    int samples_per_class_source = 20;
    int samples_per_class_target = 20;
    int dimension = 10;
    double rotation_angle_degrees = 30.0;
    double translation_magnitude = 1.0;
    double noise_sigma = 0.3;
    std::uint64_t seed = 0;
};

/// Per-feature z-score parameters fitted on the pooled domains. A scale of
/// zero marks a zero-variance feature, which maps to 0 after centering.
struct NormalizationStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;
};

namespace detail {

inline std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline long parse_label_field(const std::string& field, const std::string& path) {
    const std::string t = strip(field);
    if (t.empty()) throw DataFormatError("data: empty label field in " + path);
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (end == t.c_str() || *end != '\0')
        throw DataFormatError("data: non-integer label '" + t + "' in " + path);
    return v;
}

inline double parse_float_field(const std::string& field, const std::string& path) {
    const std::string t = strip(field);
    if (t.empty()) throw DataFormatError("data: empty feature field in " + path);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0')
        throw DataFormatError("data: non-numeric feature '" + t + "' in " + path);
    if (!std::isfinite(v))
        throw DataFormatError("data: non-finite feature value in " + path);
    return v;
}

struct RawCsv {
    Eigen::MatrixXd features; // D x N
    Eigen::VectorXi labels;   // raw values, -1 allowed
};

/// Feature CSV: one sample per row, "label,f1,...,fD", no header, LF or
/// CRLF line endings. Blank lines are ignored.
inline RawCsv read_feature_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataFormatError("data: cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (strip(line).empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma == std::string::npos
                                                    ? std::string::npos
                                                    : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields.size() < 2)
            throw DataFormatError("data: row with no feature fields in " + path);
        labels.push_back(static_cast<int>(parse_label_field(fields[0], path)));
        std::vector<double> row;
        row.reserve(fields.size() - 1);
        for (std::size_t i = 1; i < fields.size(); ++i)
            row.push_back(parse_float_field(fields[i], path));
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataFormatError("data: inconsistent column count in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataFormatError("data: no samples in " + path);

    RawCsv out;
    const Eigen::Index d = static_cast<Eigen::Index>(rows.front().size());
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    out.features.resize(d, n);
    out.labels.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        out.labels[j] = labels[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < d; ++i)
            out.features(i, j) = rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
    }
    return out;
}

} // namespace detail

/// Writes samples in the feature-CSV format (17 significant digits, LF).
inline void write_features_csv(const std::string& path,
                               const Eigen::MatrixXd& features,
                               const Eigen::VectorXi& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataFormatError("data: cannot write " + path);
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        out << labels[j];
        for (Eigen::Index i = 0; i < features.rows(); ++i)
            out << ',' << detail::format17(features(i, j));
        out << '\n';
    }
}

inline void validate_dataset(const DomainDataset& ds) {
    const int c = ds.class_count;
    if (c < 1) throw DataFormatError("data: dataset has no classes");
    if (ds.target_features.rows() != ds.dimension())
        throw DataFormatError("data: feature dimension mismatch between source and target");
    if (ds.source_count() < c)
        throw DataFormatError("data: fewer source samples than classes");
    if (ds.target_count() < 1)
        throw DataFormatError("data: empty target domain");
    if (ds.source_labels.size() != ds.source_count())
        throw DataFormatError("data: source label count mismatch");
    std::vector<bool> seen(static_cast<std::size_t>(c), false);
    for (Eigen::Index i = 0; i < ds.source_labels.size(); ++i) {
        const int l = ds.source_labels[i];
        if (l < 1 || l > c)
            throw DataFormatError("data: source label out of range 1..C");
        seen[static_cast<std::size_t>(l - 1)] = true;
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
        throw DataFormatError("data: source class ids must be contiguous 1..C");
    if (ds.target_labels) {
        if (ds.target_labels->size() != ds.target_count())
            throw DataFormatError("data: target label count mismatch");
        for (Eigen::Index i = 0; i < ds.target_labels->size(); ++i) {
            const int l = (*ds.target_labels)[i];
            if (l < 1 || l > c)
                throw DataFormatError("data: target label out of range 1..C");
        }
    }
    if (!ds.source_features.allFinite() || !ds.target_features.allFinite())
        throw DataFormatError("data: non-finite feature entries");
}

/// Loads a source/target pair of feature CSVs. Target rows labeled -1 are
/// unlabeled; a target file whose label column is entirely -1 yields a
/// dataset without evaluation labels.
inline DomainDataset load_dataset(const std::string& source_path,
                                  const std::string& target_path) {
    const detail::RawCsv src = detail::read_feature_csv(source_path);
    const detail::RawCsv tgt = detail::read_feature_csv(target_path);

    DomainDataset ds;
    ds.source_features = src.features;
    ds.source_labels = src.labels;
    ds.target_features = tgt.features;

    int c = 0;
    for (Eigen::Index i = 0; i < src.labels.size(); ++i) {
        if (src.labels[i] < 1)
            throw DataFormatError("data: source labels must be >= 1 in " + source_path);
        c = std::max(c, src.labels[i]);
    }
    ds.class_count = c;

    const bool any_labeled = (tgt.labels.array() != -1).any();
    const bool all_labeled = (tgt.labels.array() >= 1).all();
    if (any_labeled && !all_labeled)
        throw DataFormatError("data: target file mixes labeled and unlabeled rows in " +
                              target_path);
    if (all_labeled) ds.target_labels = tgt.labels;

    validate_dataset(ds);
    return ds;
}

inline NormalizationStats compute_normalization(const Eigen::MatrixXd& pooled) {
    NormalizationStats st;
    st.mean = pooled.rowwise().mean();
    const Eigen::MatrixXd centered = pooled.colwise() - st.mean;
    // population standard deviation per feature
    st.scale = (centered.array().square().rowwise().sum() /
                static_cast<double>(pooled.cols()))
                   .sqrt()
                   .matrix();
    for (Eigen::Index i = 0; i < st.scale.size(); ++i)
        if (st.scale[i] < 1e-12) st.scale[i] = 0.0; // zero-variance feature
    return st;
}

/// Applies the pooled z-score followed by per-sample unit-norm scaling.
/// Zero-variance features map to 0; all-zero samples are left unscaled.
inline Eigen::MatrixXd apply_normalization(const NormalizationStats& st,
                                           const Eigen::MatrixXd& features) {
    Eigen::MatrixXd z = features.colwise() - st.mean;
    for (Eigen::Index i = 0; i < st.scale.size(); ++i) {
        if (st.scale[i] > 0.0)
            z.row(i) /= st.scale[i];
        else
            z.row(i).setZero();
    }
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        const double n = z.col(j).norm();
        if (n > 0.0) z.col(j) /= n;
    }
    return z;
}

inline DomainDataset normalize(const DomainDataset& ds) {
    const NormalizationStats st = compute_normalization(ds.joint_features());
    DomainDataset out = ds;
    out.source_features = apply_normalization(st, ds.source_features);
    out.target_features = apply_normalization(st, ds.target_features);
    return out;
}

inline void validate_spec(const SyntheticShiftSpec& spec) {
    if (spec.class_count < 1) throw ConfigError("config: class count must be positive");
    if (spec.samples_per_class_source < 1 || spec.samples_per_class_target < 1)
        throw ConfigError("config: samples per class must be positive");
    if (spec.dimension < 2) throw ConfigError("config: dimension must be >= 2");
    if (!(spec.rotation_angle_degrees >= 0.0 && spec.rotation_angle_degrees < 180.0))
        throw ConfigError("config: rotation angle must lie in [0, 180)");
    if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma))
        throw ConfigError("config: noise sigma must be non-negative");
    if (!std::isfinite(spec.translation_magnitude))
        throw ConfigError("config: translation magnitude must be finite");
}

/// Gaussian class clouds with means e_{c mod D}; the target domain is the
/// same mixture rotated in the first two coordinates and translated along
/// the in-plane diagonal (e_0 + e_1)/sqrt(2), so the domain shift compounds
/// with the rotation. Fully determined by the seed.
inline DomainDataset generate_synthetic(const SyntheticShiftSpec& spec) {
    validate_spec(spec);

    const int c_count = spec.class_count;
    const Eigen::Index d = spec.dimension;
    const Eigen::Index ns = static_cast<Eigen::Index>(spec.samples_per_class_source) * c_count;
    const Eigen::Index nt = static_cast<Eigen::Index>(spec.samples_per_class_target) * c_count;

    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(d, c_count);
    for (int c = 1; c <= c_count; ++c)
        means(static_cast<Eigen::Index>(c % spec.dimension), c - 1) = 1.0;

    Xoshiro256 rng(spec.seed);
    const auto draw_sample = [&](int cls) {
        Eigen::VectorXd x = means.col(cls - 1);
        for (Eigen::Index i = 0; i < d; ++i) x[i] += spec.noise_sigma * rng.next_gaussian();
        return x;
    };

    DomainDataset ds;
    ds.class_count = c_count;
    ds.source_features.resize(d, ns);
    ds.source_labels.resize(ns);
    Eigen::Index col = 0;
    for (int c = 1; c <= c_count; ++c)
        for (int s = 0; s < spec.samples_per_class_source; ++s, ++col) {
            ds.source_features.col(col) = draw_sample(c);
            ds.source_labels[col] = c;
        }

    const double angle = spec.rotation_angle_degrees * 0.017453292519943295;
    const double cs = std::cos(angle), sn = std::sin(angle);
    Eigen::VectorXd shift = Eigen::VectorXd::Zero(d);
    shift[0] = shift[1] = spec.translation_magnitude / std::sqrt(2.0);

    ds.target_features.resize(d, nt);
    Eigen::VectorXi truth(nt);
    col = 0;
    for (int c = 1; c <= c_count; ++c)
        for (int s = 0; s < spec.samples_per_class_target; ++s, ++col) {
            Eigen::VectorXd x = draw_sample(c);
            const double x0 = x[0], x1 = x[1];
            x[0] = cs * x0 - sn * x1;
            x[1] = sn * x0 + cs * x1;
            ds.target_features.col(col) = x + shift;
            truth[col] = c;
        }
    ds.target_labels = truth;

    validate_dataset(ds);
    return ds;
}

/// C x N indicator matrix with one-hot columns at offset..offset+len-1 and
/// zeros elsewhere.
inline LabelMatrix one_hot(const Eigen::VectorXi& labels, int class_count,
                           Eigen::Index total, Eigen::Index offset) {
    if (offset < 0 || offset + labels.size() > total)
        throw DataFormatError("data: one-hot offset out of range");
    LabelMatrix lm;
    lm.one_hot = Eigen::MatrixXd::Zero(class_count, total);
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        const int l = labels[i];
        if (l < 1 || l > class_count)
            throw DataFormatError("data: label out of range 1..C in one-hot encoding");
        lm.one_hot(l - 1, offset + i) = 1.0;
    }
    return lm;
}

} // namespace ggls

#include "plrp/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "plrp/errors.hpp"
#include "plrp/random.hpp"

namespace plrp {

namespace {

std::string pad_id(std::string_view prefix, std::size_t i) {
    std::string digits = std::to_string(i);
    if (digits.size() < 5) digits.insert(0, 5 - digits.size(), '0');
    return std::string(prefix) + digits;
}

double quantize(double v) { return std::round(std::clamp(v, 0.02, 0.98) * 255.0) / 255.0; }

bool inside_shape(ShapeKind kind, double x, double y, double cx, double cy, double a, double b) {
    switch (kind) {
        case ShapeKind::Rectangle:
            return std::abs(x - cx) <= a && std::abs(y - cy) <= b;
        case ShapeKind::Disk:
            return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= a * a;
        case ShapeKind::Triangle: {
            // Upward isosceles triangle with apex at (cx, cy - b), base at y = cy + b.
            if (y < cy - b || y > cy + b) return false;
            const double half = a * (y - (cy - b)) / (2.0 * b);
            return std::abs(x - cx) <= half;
        }
    }
    return false;
}

}  // namespace

std::vector<GenomeRecord> gen_genome_dataset(const GenomeOptions& options) {
    if (options.motifs.empty()) throw ConfigError("genome dataset needs at least one motif");
    for (const auto& motif : options.motifs) {
        if (motif.empty()) throw ConfigError("empty motif");
        if (motif.size() >= options.length)
            throw ConfigError("motif " + motif + " is not shorter than the sequence length " +
                              std::to_string(options.length));
        if (motif.find_first_not_of(kBases) != std::string::npos)
            throw ConfigError("motif " + motif + " contains characters outside ACGT");
    }
    if (!(options.mutation_rate >= 0.0 && options.mutation_rate <= 1.0))
        throw ConfigError("mutation rate must lie in [0, 1]");

    const std::size_t classes = options.motifs.size() + 1;
    std::vector<GenomeRecord> out;
    out.reserve(options.n);
    for (std::size_t i = 0; i < options.n; ++i) {
        Rng rng(derive_seed(options.seed, i));
        GenomeRecord rec;
        rec.id = pad_id("seq", i);
        rec.label = i % classes;
        rec.sequence.resize(options.length);
        for (char& base : rec.sequence) base = kBases[rng.below(4)];
        if (rec.label > 0) {
            const std::string& motif = options.motifs[rec.label - 1];
            rec.motif_length = motif.size();
            rec.motif_start = rng.below(options.length - motif.size() + 1);
            for (std::size_t k = 0; k < motif.size(); ++k) {
                char base = motif[k];
                if (options.mutation_rate > 0.0 && rng.uniform() < options.mutation_rate) {
                    const std::size_t current = kBases.find(base);
                    base = kBases[(current + 1 + rng.below(3)) % 4];
                }
                rec.sequence[rec.motif_start + k] = base;
            }
        }
        out.push_back(std::move(rec));
    }
    return out;
}

Tensor one_hot(std::string_view sequence) {
    Tensor t({1, 4, sequence.size()});
    for (std::size_t pos = 0; pos < sequence.size(); ++pos) {
        const std::size_t row = kBases.find(sequence[pos]);
        if (row == std::string_view::npos)
            throw FormatError("invalid base '" + std::string(1, sequence[pos]) + "' at position " + std::to_string(pos));
        t[row * sequence.size() + pos] = 1.0;
    }
    return t;
}

Mask motif_mask(const GenomeRecord& record) {
    const std::size_t length = record.sequence.size();
    Mask mask(4 * length, 0);
    for (std::size_t row = 0; row < 4; ++row)
        for (std::size_t pos = record.motif_start; pos < record.motif_start + record.motif_length; ++pos)
            mask[row * length + pos] = 1;
    return mask;
}

Sample to_sample(const GenomeRecord& record) {
    return Sample{record.id, one_hot(record.sequence), record.label, motif_mask(record)};
}

Dataset to_dataset(const std::vector<GenomeRecord>& records) {
    Dataset out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(to_sample(r));
    return out;
}

std::string_view shape_name(ShapeKind kind) {
    switch (kind) {
        case ShapeKind::Rectangle:
            return "rectangle";
        case ShapeKind::Disk:
            return "disk";
        case ShapeKind::Triangle:
            return "triangle";
    }
    return "unknown";
}

ShapeKind parse_shape_kind(std::string_view name) {
    for (ShapeKind k : {ShapeKind::Rectangle, ShapeKind::Disk, ShapeKind::Triangle})
        if (shape_name(k) == name) return k;
    throw ConfigError("unknown shape kind '" + std::string(name) + "'");
}

Dataset gen_shape_dataset(const ShapeOptions& options) {
    if (options.image_size < 16) throw ConfigError("image size must be at least 16");
    if (options.kinds.empty()) throw ConfigError("shape dataset needs at least one shape kind");
    const std::size_t size = options.image_size;
    const double s = static_cast<double>(size);
    Dataset out;
    out.reserve(options.n);
    for (std::size_t i = 0; i < options.n; ++i) {
        Rng rng(derive_seed(options.seed, i));
        Sample sample;
        sample.id = pad_id("img", i);
        sample.label = i % options.kinds.size();
        const ShapeKind kind = options.kinds[sample.label];
        sample.input = Tensor({1, size, size});
        sample.mask.assign(size * size, 0);

        const double base = rng.uniform(0.12, 0.28);
        const double fx = rng.uniform(0.2, 0.8), fy = rng.uniform(0.2, 0.8);
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double a = rng.uniform(s * 0.14, s * 0.25);
        const double b = kind == ShapeKind::Disk ? a : rng.uniform(s * 0.14, s * 0.25);
        const double margin = std::max(a, b) + 1.0;
        const double cx = rng.uniform(margin, s - 1.0 - margin);
        const double cy = rng.uniform(margin, s - 1.0 - margin);
        const double fg = rng.uniform(0.65, 0.85);

        for (std::size_t y = 0; y < size; ++y)
            for (std::size_t x = 0; x < size; ++x) {
                const std::size_t idx = y * size + x;
                const double noise = rng.uniform(-0.05, 0.05);
                double v;
                if (inside_shape(kind, static_cast<double>(x), static_cast<double>(y), cx, cy, a, b)) {
                    sample.mask[idx] = 1;
                    v = fg + noise;
                } else {
                    v = base + 0.08 * std::sin(fx * static_cast<double>(x) + fy * static_cast<double>(y) + phase) + noise;
                }
                sample.input[idx] = quantize(v);
            }
        out.push_back(std::move(sample));
    }
    return out;
}

}  // namespace plrp

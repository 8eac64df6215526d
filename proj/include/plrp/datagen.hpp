#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "plrp/dataset.hpp"

namespace plrp {

inline constexpr std::string_view kBases = "ACGT";
inline constexpr std::size_t kGenomeLength = 250;

/// One synthetic DNA sequence. Label 0 is background only; label k >= 1
/// carries motif k - 1 at [motif_start, motif_start + motif_length).
struct GenomeRecord {
    std::string id;
    std::string sequence;
    std::size_t label = 0;
    std::size_t motif_start = 0;
    std::size_t motif_length = 0;
};

struct GenomeOptions {
    std::size_t n = 0;
    std::vector<std::string> motifs;
    /// Per-position probability of replacing a planted base by another base.
    double mutation_rate = 0.0;
    std::size_t length = kGenomeLength;
    std::uint64_t seed = 0;
};

/// Background bases i.i.d. uniform; labels cycle 0..motifs.size() so
/// classes stay balanced within one sample. Deterministic given the seed.
std::vector<GenomeRecord> gen_genome_dataset(const GenomeOptions& options);

/// 1 x 4 x L tensor, rows in A, C, G, T order.
Tensor one_hot(std::string_view sequence);

/// 1 x 4 x L mask, true on every base row of the motif columns.
Mask motif_mask(const GenomeRecord& record);

Sample to_sample(const GenomeRecord& record);
Dataset to_dataset(const std::vector<GenomeRecord>& records);

enum class ShapeKind { Rectangle, Disk, Triangle };

std::string_view shape_name(ShapeKind kind);
ShapeKind parse_shape_kind(std::string_view name);

struct ShapeOptions {
    std::size_t n = 0;
    std::size_t image_size = 32;
    std::vector<ShapeKind> kinds{ShapeKind::Rectangle, ShapeKind::Disk};
    std::uint64_t seed = 0;
};

/// Single-channel images (1 x S x S) with one bright shape on a darker
/// textured background; the label is the index of the shape kind and the
/// mask its support. Pixel values are multiples of 1/255 inside
/// [0.02, 0.98], so an 8-bit raster round trip is lossless.
Dataset gen_shape_dataset(const ShapeOptions& options);

}  // namespace plrp

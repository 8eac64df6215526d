#pragma once

#include <filesystem>
#include <vector>

#include "plrp/datagen.hpp"
#include "plrp/dataset.hpp"

namespace plrp {

enum class DatasetKind { Genome, Image };

// Genome datasets: <dir>/sequences.tsv (id, sequence, label) and
// <dir>/masks.tsv (id, start, end) with half-open motif spans.
// Image datasets: <dir>/index.tsv (id, label, image, mask) referencing
// binary PGM/PPM rasters stored next to it. Both TSVs carry a header row.

void write_genome_dataset(const std::vector<GenomeRecord>& records, const std::filesystem::path& dir);
std::vector<GenomeRecord> read_genome_dataset(const std::filesystem::path& dir);

void write_image_dataset(const Dataset& data, const std::filesystem::path& dir);
Dataset read_image_dataset(const std::filesystem::path& dir);

/// Detects the dataset kind from the index file present in `dir`.
DatasetKind detect_dataset(const std::filesystem::path& dir);

struct LoadedDataset {
    DatasetKind kind;
    Dataset samples;
};

LoadedDataset load_dataset(const std::filesystem::path& dir);

}  // namespace plrp

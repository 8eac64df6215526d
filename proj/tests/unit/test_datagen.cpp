#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "plrp/datagen.hpp"
#include "plrp/dataset_io.hpp"
#include "plrp/errors.hpp"
#include "plrp/raster.hpp"
#include "support.hpp"

using namespace plrp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("plrp_test_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("planted motifs sit exactly under the mask") {
    GenomeOptions opt;
    opt.n = 4;
    opt.motifs = {"GATTACA"};
    opt.seed = 7;
    const auto records = gen_genome_dataset(opt);
    REQUIRE(records.size() == 4);
    for (const auto& rec : records) {
        CHECK(rec.sequence.size() == kGenomeLength);
        const Sample s = to_sample(rec);
        if (rec.label == 0) {
            CHECK(std::count(s.mask.begin(), s.mask.end(), 1) == 0);
            continue;
        }
        std::string under_mask;
        for (std::size_t pos = 0; pos < kGenomeLength; ++pos)
            if (s.mask[pos]) under_mask += rec.sequence[pos];
        CHECK(under_mask == "GATTACA");
        for (std::size_t row = 0; row < 4; ++row)
            CHECK(s.mask[row * kGenomeLength + rec.motif_start] == 1);
    }
}

TEST_CASE("one-hot columns sum to one") {
    GenomeOptions opt;
    opt.n = 20;
    opt.motifs = {"ACGTACGT", "TTTT"};
    opt.mutation_rate = 0.2;
    opt.seed = 3;
    for (const auto& rec : gen_genome_dataset(opt)) {
        const Tensor t = one_hot(rec.sequence);
        CHECK(t.shape == Shape{1, 4, kGenomeLength});
        for (std::size_t pos = 0; pos < kGenomeLength; ++pos) {
            double col = 0.0;
            for (std::size_t row = 0; row < 4; ++row) col += t[row * kGenomeLength + pos];
            CHECK(col == 1.0);
        }
    }
    CHECK_THROWS_AS(one_hot("ACGN"), FormatError);
}

TEST_CASE("genome generator determinism, balance and errors") {
    GenomeOptions opt;
    opt.n = 101;
    opt.motifs = {"GATTACA", "CCGG"};
    opt.seed = 5;
    const auto a = gen_genome_dataset(opt);
    const auto b = gen_genome_dataset(opt);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].sequence == b[i].sequence);
    opt.seed = 6;
    CHECK(gen_genome_dataset(opt)[0].sequence != a[0].sequence);

    std::map<std::size_t, int> counts;
    for (const auto& r : a) ++counts[r.label];
    CHECK(counts.size() == 3);
    for (const auto& [label, c] : counts) CHECK(std::abs(c - 101 / 3) <= 1);

    opt.motifs = {std::string(250, 'A')};
    CHECK_THROWS_AS(gen_genome_dataset(opt), ConfigError);
}

TEST_CASE("shape images") {
    ShapeOptions opt;
    opt.n = 30;
    opt.image_size = 24;
    opt.kinds = {ShapeKind::Rectangle, ShapeKind::Disk, ShapeKind::Triangle};
    opt.seed = 2;
    const Dataset data = gen_shape_dataset(opt);
    for (const auto& s : data) {
        CHECK(s.input.shape == Shape{1, 24, 24});
        const auto area = std::count(s.mask.begin(), s.mask.end(), 1);
        CHECK(area > 0);
        for (std::size_t i = 0; i < s.mask.size(); ++i) {
            CHECK(s.input[i] >= 0.0);
            CHECK(s.input[i] <= 1.0);
            CHECK((s.input[i] > 0.5) == (s.mask[i] == 1));
        }
        if (s.label == 1) {
            // A disk's bounding box is square.
            std::size_t x0 = 24, x1 = 0, y0 = 24, y1 = 0;
            for (std::size_t i = 0; i < s.mask.size(); ++i)
                if (s.mask[i]) {
                    x0 = std::min(x0, i % 24), x1 = std::max(x1, i % 24);
                    y0 = std::min(y0, i / 24), y1 = std::max(y1, i / 24);
                }
            CHECK(std::abs(long(x1 - x0) - long(y1 - y0)) <= 1);
        }
    }
    CHECK(gen_shape_dataset(opt)[7].input == data[7].input);
    opt.image_size = 8;
    CHECK_THROWS_AS(gen_shape_dataset(opt), ConfigError);
    CHECK_THROWS_AS(parse_shape_kind("hexagon"), ConfigError);
}

TEST_CASE("genome dataset files round trip") {
    const fs::path dir = scratch("genome");
    GenomeOptions opt;
    opt.n = 12;
    opt.motifs = {"GATTACA"};
    opt.seed = 9;
    const auto records = gen_genome_dataset(opt);
    write_genome_dataset(records, dir);
    CHECK(detect_dataset(dir) == DatasetKind::Genome);
    const auto back = read_genome_dataset(dir);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].id == records[i].id);
        CHECK(back[i].sequence == records[i].sequence);
        CHECK(back[i].label == records[i].label);
        CHECK(back[i].motif_start == records[i].motif_start);
        CHECK(back[i].motif_length == records[i].motif_length);
    }
    fs::remove_all(dir);
}

TEST_CASE("image dataset files round trip losslessly") {
    const fs::path dir = scratch("images");
    ShapeOptions opt;
    opt.n = 6;
    opt.image_size = 16;
    opt.seed = 4;
    const Dataset data = gen_shape_dataset(opt);
    write_image_dataset(data, dir);
    const LoadedDataset back = load_dataset(dir);
    CHECK(back.kind == DatasetKind::Image);
    REQUIRE(back.samples.size() == data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(back.samples[i].id == data[i].id);
        CHECK(back.samples[i].label == data[i].label);
        CHECK(back.samples[i].mask == data[i].mask);
        for (std::size_t j = 0; j < data[i].input.size(); ++j)
            CHECK(back.samples[i].input[j] == doctest::Approx(data[i].input[j]).epsilon(1e-12));
    }
    fs::remove_all(dir);
}

TEST_CASE("malformed dataset files") {
    const fs::path dir = scratch("bad");
    fs::create_directories(dir);
    CHECK_THROWS(detect_dataset(dir));
    {
        std::ofstream(dir / "sequences.tsv") << "id\tsequence\tlabel\nseq0\tACGT\tx\n";
        std::ofstream(dir / "masks.tsv") << "id\tstart\tend\n";
    }
    try {
        read_genome_dataset(dir);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("heatmap raster") {
    const Tensor r({1, 2, 2}, {1.0, -0.5, 0.0, 0.25});
    const Raster h = heatmap(r);
    CHECK(h.width == 2);
    CHECK(h.height == 2);
    CHECK(h.channels == 3);
    CHECK(h.pixels[0] == 255);  // red, full positive
    CHECK(h.pixels[2] == 0);
    CHECK(h.pixels[3 + 0] == 0);
    CHECK(h.pixels[3 + 2] == 128);  // blue, half negative
    CHECK(h.pixels[6] == 0);
    CHECK(h.pixels[7] == 0);
    CHECK(h.pixels[8] == 0);
}

TEST_CASE("raster round trip") {
    const fs::path dir = scratch("raster");
    fs::create_directories(dir);
    Raster r{3, 2, 3, {0, 1, 2, 3, 4, 5, 250, 251, 252, 253, 254, 255, 9, 8, 7, 6, 5, 4}};
    write_raster(r, dir / "x.ppm");
    const Raster back = read_raster(dir / "x.ppm");
    CHECK(back.pixels == r.pixels);
    CHECK(back.width == 3);
    CHECK_THROWS_AS(read_raster(dir / "missing.pgm"), FormatError);
    fs::remove_all(dir);
}

#include "plrp/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "plrp/errors.hpp"
#include "plrp/raster.hpp"

namespace plrp {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        out.push_back(line.substr(start, tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
    }
    return out;
}

std::size_t parse_index(const std::string& text, const fs::path& file, std::size_t line) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw FormatError(file.string() + ":" + std::to_string(line) + ": expected a non-negative integer, got '" +
                          text + "'");
    return value;
}

// Rows of a TSV with the given header; calls row(fields, line_number).
template <class Row>
void read_tsv(const fs::path& file, const std::vector<std::string>& header, Row&& row) {
    std::ifstream in(file);
    if (!in) throw FormatError("cannot open " + file.string());
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw FormatError(file.string() + ": empty file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (split_tabs(line) != header) throw FormatError(file.string() + ":1: unexpected header '" + line + "'");
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields.size() != header.size())
            throw FormatError(file.string() + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " tab-separated fields");
        row(fields, line_no);
    }
}

std::ofstream open_out(const fs::path& file) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file);
    if (!out) throw FormatError("cannot write " + file.string());
    return out;
}

}  // namespace

void write_genome_dataset(const std::vector<GenomeRecord>& records, const fs::path& dir) {
    std::ofstream seq = open_out(dir / "sequences.tsv");
    std::ofstream masks = open_out(dir / "masks.tsv");
    seq << "id\tsequence\tlabel\n";
    masks << "id\tstart\tend\n";
    for (const auto& r : records) {
        seq << r.id << '\t' << r.sequence << '\t' << r.label << '\n';
        if (r.motif_length > 0) masks << r.id << '\t' << r.motif_start << '\t' << r.motif_start + r.motif_length << '\n';
    }
}

std::vector<GenomeRecord> read_genome_dataset(const fs::path& dir) {
    std::vector<GenomeRecord> records;
    std::map<std::string, std::size_t> by_id;
    const fs::path seq_file = dir / "sequences.tsv";
    read_tsv(seq_file, {"id", "sequence", "label"}, [&](const std::vector<std::string>& f, std::size_t line) {
        GenomeRecord r{f[0], f[1], parse_index(f[2], seq_file, line), 0, 0};
        if (r.sequence.find_first_not_of(kBases) != std::string::npos)
            throw FormatError(seq_file.string() + ":" + std::to_string(line) + ": sequence contains characters outside ACGT");
        if (!records.empty() && r.sequence.size() != records.front().sequence.size())
            throw FormatError(seq_file.string() + ":" + std::to_string(line) + ": sequence length differs from the first row");
        if (!by_id.emplace(r.id, records.size()).second)
            throw FormatError(seq_file.string() + ":" + std::to_string(line) + ": duplicate id " + r.id);
        records.push_back(std::move(r));
    });
    const fs::path mask_file = dir / "masks.tsv";
    if (fs::exists(mask_file)) {
        read_tsv(mask_file, {"id", "start", "end"}, [&](const std::vector<std::string>& f, std::size_t line) {
            auto it = by_id.find(f[0]);
            if (it == by_id.end())
                throw FormatError(mask_file.string() + ":" + std::to_string(line) + ": unknown id " + f[0]);
            GenomeRecord& r = records[it->second];
            const std::size_t start = parse_index(f[1], mask_file, line);
            const std::size_t end = parse_index(f[2], mask_file, line);
            if (end <= start || end > r.sequence.size())
                throw FormatError(mask_file.string() + ":" + std::to_string(line) + ": invalid span");
            r.motif_start = start;
            r.motif_length = end - start;
        });
    }
    return records;
}

void write_image_dataset(const Dataset& data, const fs::path& dir) {
    std::ofstream index = open_out(dir / "index.tsv");
    index << "id\tlabel\timage\tmask\n";
    for (const auto& s : data) {
        const Raster image = to_raster(s.input);
        const std::string ext = image.channels == 1 ? ".pgm" : ".ppm";
        const std::string image_name = s.id + ext;
        const std::string mask_name = s.id + "_mask.pgm";
        write_raster(image, dir / image_name);
        Raster mask{image.width, image.height, 1, std::vector<std::uint8_t>(image.width * image.height, 0)};
        if (!s.mask.empty()) {
            if (s.mask.size() != mask.pixels.size())
                throw FormatError("sample " + s.id + ": image masks must be HxW");
            for (std::size_t i = 0; i < s.mask.size(); ++i) mask.pixels[i] = s.mask[i] ? 255 : 0;
        }
        write_raster(mask, dir / mask_name);
        index << s.id << '\t' << s.label << '\t' << image_name << '\t' << mask_name << '\n';
    }
}

Dataset read_image_dataset(const fs::path& dir) {
    Dataset data;
    const fs::path index_file = dir / "index.tsv";
    read_tsv(index_file, {"id", "label", "image", "mask"}, [&](const std::vector<std::string>& f, std::size_t line) {
        Sample s;
        s.id = f[0];
        s.label = parse_index(f[1], index_file, line);
        s.input = from_raster(read_raster(dir / f[2]));
        const Raster mask = read_raster(dir / f[3]);
        if (mask.channels != 1 || mask.width != s.input.shape[2] || mask.height != s.input.shape[1])
            throw FormatError(index_file.string() + ":" + std::to_string(line) + ": mask raster does not match image");
        s.mask.resize(mask.pixels.size());
        for (std::size_t i = 0; i < mask.pixels.size(); ++i) s.mask[i] = mask.pixels[i] > 127;
        if (!data.empty() && s.input.shape != data.front().input.shape)
            throw FormatError(index_file.string() + ":" + std::to_string(line) + ": image size differs from the first row");
        data.push_back(std::move(s));
    });
    return data;
}

DatasetKind detect_dataset(const fs::path& dir) {
    if (fs::exists(dir / "sequences.tsv")) return DatasetKind::Genome;
    if (fs::exists(dir / "index.tsv")) return DatasetKind::Image;
    throw FormatError(dir.string() + ": no sequences.tsv or index.tsv found");
}

LoadedDataset load_dataset(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw FormatError("dataset directory " + dir.string() + " does not exist");
    const DatasetKind kind = detect_dataset(dir);
    if (kind == DatasetKind::Genome) return {kind, to_dataset(read_genome_dataset(dir))};
    return {kind, read_image_dataset(dir)};
}

}  // namespace plrp

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "plrp/lrp.hpp"
#include "plrp/model.hpp"
#include "plrp/plrp.hpp"

namespace plrp {

inline constexpr int kModelFormatVersion = 1;
inline constexpr int kTraceFormatVersion = 1;

// Model and trace files are JSON documents; see docs/formats.md. Doubles
// are written in shortest round-trip form, so save/load is lossless.

std::string model_to_string(const Model& model);

/// Throws FormatError naming the byte offset (syntax) or the JSON pointer
/// (schema) of the first violation.
Model model_from_string(const std::string& text);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

/// Describes how a trace was produced; written alongside the relevance.
struct TraceInfo {
    std::string method = "lrp";  // lrp | plrp-lambda | plrp-m
    std::string mode;            // fixed | gain, empty for lrp
    double parameter = 0.0;      // p or min_gain
    std::string sample_id;
};

std::string trace_to_string(const RelevanceTrace& trace, const TraceInfo& info);
RelevanceTrace trace_from_string(const std::string& text);
void save_trace(const RelevanceTrace& trace, const TraceInfo& info, const std::filesystem::path& path);

/// Explanation settings as read from a config file. An empty `pruning`
/// means plain LRP.
struct ExplainSettings {
    std::optional<PruningConfig> pruning;
    CompositeOptions composite;
};

ExplainSettings settings_from_string(const std::string& text);
ExplainSettings load_settings(const std::filesystem::path& path);
std::string settings_to_string(const ExplainSettings& settings);

/// Reads a whole file; throws FormatError if it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace plrp

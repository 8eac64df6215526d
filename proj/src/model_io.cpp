#include "plrp/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "overloaded.hpp"
#include "plrp/errors.hpp"

namespace plrp {

using json = nlohmann::json;
using detail::overloaded;

namespace {

json parse_document(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError("malformed document at byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) throw FormatError(path + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw FormatError(path + "/" + key + ": missing field");
    return *it;
}

std::size_t get_size(const json& obj, const std::string& key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_number_unsigned()) throw FormatError(path + "/" + key + ": expected a non-negative integer");
    return v.get<std::size_t>();
}

double get_number(const json& obj, const std::string& key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_number()) throw FormatError(path + "/" + key + ": expected a number");
    return v.get<double>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_string()) throw FormatError(path + "/" + key + ": expected a string");
    return v.get<std::string>();
}

std::vector<double> get_numbers(const json& obj, const std::string& key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_array()) throw FormatError(path + "/" + key + ": expected an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw FormatError(path + "/" + key + "/" + std::to_string(i) + ": expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

std::vector<std::size_t> get_sizes(const json& obj, const std::string& key, const std::string& path,
                                   std::size_t expected_len = 0) {
    const json& v = field(obj, key, path);
    if (!v.is_array()) throw FormatError(path + "/" + key + ": expected an array");
    if (expected_len && v.size() != expected_len)
        throw FormatError(path + "/" + key + ": expected " + std::to_string(expected_len) + " entries");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number_unsigned())
            throw FormatError(path + "/" + key + "/" + std::to_string(i) + ": expected a non-negative integer");
        out.push_back(v[i].get<std::size_t>());
    }
    return out;
}

void check_header(const json& doc, const std::string& format, int version) {
    const std::string got = get_string(doc, "format", "");
    if (got != format) throw FormatError("/format: expected '" + format + "', got '" + got + "'");
    const std::size_t v = get_size(doc, "formatVersion", "");
    if (v != static_cast<std::size_t>(version))
        throw FormatError("/formatVersion: unsupported version " + std::to_string(v));
}

json layer_to_json(const Layer& layer) {
    return std::visit(overloaded{
                          [](const Dense& d) {
                              return json{{"kind", "Dense"}, {"in", d.in},           {"out", d.out},
                                          {"weights", d.weights}, {"bias", d.bias}};
                          },
                          [](const Conv2D& c) {
                              return json{{"kind", "Conv2D"},
                                          {"inChannels", c.in_channels},
                                          {"outChannels", c.out_channels},
                                          {"kernel", {c.kernel_h, c.kernel_w}},
                                          {"stride", {c.stride_h, c.stride_w}},
                                          {"padding", {c.pad_h, c.pad_w}},
                                          {"weights", c.weights},
                                          {"bias", c.bias}};
                          },
                          [](const ReLU&) { return json{{"kind", "ReLU"}}; },
                          [](const MaxPool2D& p) {
                              return json{{"kind", "MaxPool2D"},
                                          {"window", {p.window_h, p.window_w}},
                                          {"stride", {p.stride_h, p.stride_w}}};
                          },
                          [](const Flatten&) { return json{{"kind", "Flatten"}}; },
                      },
                      layer);
}

Layer layer_from_json(const json& j, const std::string& path) {
    const std::string kind = get_string(j, "kind", path);
    if (kind == "Dense") {
        Dense d{get_size(j, "in", path), get_size(j, "out", path), get_numbers(j, "weights", path),
                get_numbers(j, "bias", path)};
        if (d.weights.size() != d.in * d.out) throw FormatError(path + "/weights: expected in*out values");
        if (d.bias.size() != d.out) throw FormatError(path + "/bias: expected out values");
        return d;
    }
    if (kind == "Conv2D") {
        Conv2D c;
        c.in_channels = get_size(j, "inChannels", path);
        c.out_channels = get_size(j, "outChannels", path);
        const auto kernel = get_sizes(j, "kernel", path, 2);
        const auto stride = get_sizes(j, "stride", path, 2);
        const auto padding = get_sizes(j, "padding", path, 2);
        c.kernel_h = kernel[0];
        c.kernel_w = kernel[1];
        c.stride_h = stride[0];
        c.stride_w = stride[1];
        c.pad_h = padding[0];
        c.pad_w = padding[1];
        if (c.stride_h == 0 || c.stride_w == 0) throw FormatError(path + "/stride: must be positive");
        c.weights = get_numbers(j, "weights", path);
        c.bias = get_numbers(j, "bias", path);
        if (c.weights.size() != c.out_channels * c.in_channels * c.kernel_h * c.kernel_w)
            throw FormatError(path + "/weights: expected outChannels*inChannels*kh*kw values");
        if (c.bias.size() != c.out_channels) throw FormatError(path + "/bias: expected outChannels values");
        return c;
    }
    if (kind == "ReLU") return ReLU{};
    if (kind == "Flatten") return Flatten{};
    if (kind == "MaxPool2D") {
        const auto window = get_sizes(j, "window", path, 2);
        const auto stride = get_sizes(j, "stride", path, 2);
        if (window[0] == 0 || window[1] == 0 || stride[0] == 0 || stride[1] == 0)
            throw FormatError(path + ": pooling window and stride must be positive");
        return MaxPool2D{window[0], window[1], stride[0], stride[1]};
    }
    throw FormatError(path + "/kind: unknown layer kind '" + kind + "'");
}

const char* variant_name(const std::optional<PruningConfig>& pruning) {
    if (!pruning) return "lrp";
    return pruning->variant == Variant::Lambda ? "plrp-lambda" : "plrp-m";
}

}  // namespace

std::string model_to_string(const Model& model) {
    json doc;
    doc["format"] = "plrp-model";
    doc["formatVersion"] = kModelFormatVersion;
    doc["inputShape"] = model.input_shape();
    doc["numClasses"] = model.num_classes();
    doc["layers"] = json::array();
    for (const auto& layer : model.layers()) doc["layers"].push_back(layer_to_json(layer));
    return doc.dump(1) + "\n";
}

Model model_from_string(const std::string& text) {
    const json doc = parse_document(text);
    check_header(doc, "plrp-model", kModelFormatVersion);
    Shape input = get_sizes(doc, "inputShape", "");
    const std::size_t classes = get_size(doc, "numClasses", "");
    const json& layers_json = field(doc, "layers", "");
    if (!layers_json.is_array()) throw FormatError("/layers: expected an array");
    std::vector<Layer> layers;
    for (std::size_t i = 0; i < layers_json.size(); ++i)
        layers.push_back(layer_from_json(layers_json[i], "/layers/" + std::to_string(i)));
    try {
        return Model(std::move(input), classes, std::move(layers));
    } catch (const Error& e) {
        throw FormatError(std::string("/layers: inconsistent model: ") + e.what());
    }
}

void save_model(const Model& model, const std::filesystem::path& path) { write_text_file(path, model_to_string(model)); }

Model load_model(const std::filesystem::path& path) {
    try {
        return model_from_string(read_text_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::string trace_to_string(const RelevanceTrace& trace, const TraceInfo& info) {
    json doc;
    doc["format"] = "plrp-relevance-trace";
    doc["formatVersion"] = kTraceFormatVersion;
    doc["sampleId"] = info.sample_id;
    doc["method"] = info.method;
    doc["mode"] = info.mode;
    doc["parameter"] = info.parameter;
    doc["targetClass"] = trace.target_class;
    doc["score"] = trace.target_score;
    doc["stabilizedColumns"] = trace.stabilized_columns;
    doc["layers"] = json::array();
    for (std::size_t i = 0; i < trace.relevance.size(); ++i)
        doc["layers"].push_back(
            {{"index", i}, {"shape", trace.relevance[i].shape}, {"values", trace.relevance[i].data}});
    doc["pruning"] = json::array();
    for (const auto& p : trace.pruning)
        doc["pruning"].push_back({{"layer", p.layer},
                                  {"thetaPositive", p.theta_positive},
                                  {"thetaNegative", p.theta_negative},
                                  {"impliedPPositive", p.implied_p_positive},
                                  {"impliedPNegative", p.implied_p_negative},
                                  {"prunedCount", p.pruned_count},
                                  {"undeliverableColumns", p.undeliverable_columns}});
    return doc.dump(1) + "\n";
}

RelevanceTrace trace_from_string(const std::string& text) {
    const json doc = parse_document(text);
    check_header(doc, "plrp-relevance-trace", kTraceFormatVersion);
    RelevanceTrace trace;
    trace.target_class = get_size(doc, "targetClass", "");
    trace.target_score = get_number(doc, "score", "");
    trace.stabilized_columns = get_size(doc, "stabilizedColumns", "");
    const json& layers = field(doc, "layers", "");
    if (!layers.is_array()) throw FormatError("/layers: expected an array");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::string path = "/layers/" + std::to_string(i);
        try {
            trace.relevance.emplace_back(get_sizes(layers[i], "shape", path), get_numbers(layers[i], "values", path));
        } catch (const ShapeError& e) {
            throw FormatError(path + ": " + e.what());
        }
    }
    const json& pruning = field(doc, "pruning", "");
    for (std::size_t i = 0; i < pruning.size(); ++i) {
        const std::string path = "/pruning/" + std::to_string(i);
        const json& p = pruning[i];
        trace.pruning.push_back({get_size(p, "layer", path), get_number(p, "thetaPositive", path),
                                 get_number(p, "thetaNegative", path), get_number(p, "impliedPPositive", path),
                                 get_number(p, "impliedPNegative", path), get_size(p, "prunedCount", path),
                                 get_size(p, "undeliverableColumns", path)});
    }
    return trace;
}

void save_trace(const RelevanceTrace& trace, const TraceInfo& info, const std::filesystem::path& path) {
    write_text_file(path, trace_to_string(trace, info));
}

ExplainSettings settings_from_string(const std::string& text) {
    const json doc = parse_document(text);
    if (!doc.is_object()) throw FormatError("config: expected an object");
    ExplainSettings s;
    const std::string variant = doc.contains("variant") ? get_string(doc, "variant", "") : "lrp";
    if (variant != "lrp") {
        PruningConfig cfg;
        if (variant == "plrp-lambda")
            cfg.variant = Variant::Lambda;
        else if (variant == "plrp-m")
            cfg.variant = Variant::Matrix;
        else
            throw FormatError("/variant: expected lrp, plrp-lambda or plrp-m, got '" + variant + "'");
        const std::string mode = doc.contains("mode") ? get_string(doc, "mode", "") : "fixed";
        if (mode == "fixed")
            cfg.mode = ThresholdMode::FixedProportion;
        else if (mode == "gain")
            cfg.mode = ThresholdMode::SparsityGain;
        else
            throw FormatError("/mode: expected fixed or gain, got '" + mode + "'");
        if (doc.contains("p")) cfg.p = get_number(doc, "p", "");
        if (doc.contains("minGain")) cfg.min_gain = get_number(doc, "minGain", "");
        if (doc.contains("pPositive")) cfg.p_positive = get_number(doc, "pPositive", "");
        if (doc.contains("pNegative")) cfg.p_negative = get_number(doc, "pNegative", "");
        if (doc.contains("fallbackEpsilon")) cfg.fallback_epsilon = get_number(doc, "fallbackEpsilon", "");
        if (doc.contains("layerP")) {
            const json& lp = doc["layerP"];
            if (!lp.is_object()) throw FormatError("/layerP: expected an object keyed by layer index");
            for (const auto& [key, value] : lp.items()) {
                if (!value.is_number()) throw FormatError("/layerP/" + key + ": expected a number");
                std::size_t idx = 0;
                try {
                    idx = std::stoul(key);
                } catch (const std::exception&) {
                    throw FormatError("/layerP/" + key + ": key must be a layer index");
                }
                cfg.layer_p[idx] = value.get<double>();
            }
        }
        try {
            cfg.validate();
        } catch (const ConfigError& e) {
            throw FormatError(std::string("config: ") + e.what());
        }
        s.pruning = cfg;
    }
    if (doc.contains("epsilon")) s.composite.epsilon = get_number(doc, "epsilon", "");
    if (doc.contains("gamma")) s.composite.gamma = get_number(doc, "gamma", "");
    if (doc.contains("low")) s.composite.low = get_number(doc, "low", "");
    if (doc.contains("high")) s.composite.high = get_number(doc, "high", "");
    return s;
}

std::string settings_to_string(const ExplainSettings& s) {
    json doc;
    doc["variant"] = variant_name(s.pruning);
    if (s.pruning) {
        const PruningConfig& c = *s.pruning;
        doc["mode"] = c.mode == ThresholdMode::FixedProportion ? "fixed" : "gain";
        doc["p"] = c.p;
        doc["minGain"] = c.min_gain;
        if (c.p_positive) doc["pPositive"] = *c.p_positive;
        if (c.p_negative) doc["pNegative"] = *c.p_negative;
        doc["fallbackEpsilon"] = c.fallback_epsilon;
        if (!c.layer_p.empty()) {
            json lp = json::object();
            for (const auto& [k, v] : c.layer_p) lp[std::to_string(k)] = v;
            doc["layerP"] = lp;
        }
    }
    doc["epsilon"] = s.composite.epsilon;
    doc["gamma"] = s.composite.gamma;
    doc["low"] = s.composite.low;
    doc["high"] = s.composite.high;
    return doc.dump(1) + "\n";
}

ExplainSettings load_settings(const std::filesystem::path& path) {
    try {
        return settings_from_string(read_text_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out << text;
    if (!out) throw FormatError("write failed for " + path.string());
}

}  // namespace plrp

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "plrp/datagen.hpp"
#include "plrp/dataset_io.hpp"
#include "plrp/errors.hpp"
#include "plrp/evaluate.hpp"
#include "plrp/forward.hpp"
#include "plrp/model_io.hpp"
#include "plrp/presets.hpp"
#include "plrp/raster.hpp"
#include "plrp/train.hpp"

namespace fs = std::filesystem;
using namespace plrp;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

std::vector<std::string> split(const std::string& text, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

void require_path(const fs::path& path, const std::string& flag) {
    if (!fs::exists(path)) throw ConfigError(flag + ": no such file or directory: " + path.string());
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    return out;
}

fs::path with_suffix(const fs::path& path, const std::string& suffix) {
    fs::path p = path;
    p.replace_extension();
    return p.string() + suffix;
}

std::size_t class_count(const Dataset& data) {
    std::size_t k = 0;
    for (const auto& s : data) k = std::max(k, s.label + 1);
    return k;
}

struct Common {
    std::string model;
    std::string data;
    std::string out;
    std::uint64_t seed = 0;
    double epsilon = CompositeOptions{}.epsilon;
    double gamma = CompositeOptions{}.gamma;

    void add_model_data(CLI::App* app) {
        app->add_option("--model", model, "Model file")->required();
        app->add_option("--data", data, "Dataset directory")->required();
    }
    void add_rules(CLI::App* app) {
        app->add_option("--epsilon", epsilon, "Relative epsilon of the dense-layer rule");
        app->add_option("--gamma", gamma, "Gamma of the convolution rule");
    }
    RuleAssignment rules(const Model& m) const {
        CompositeOptions c;
        c.epsilon = epsilon;
        c.gamma = gamma;
        return default_composite(m, c);
    }
};

// ---------------------------------------------------------------------------

struct GenGenomeArgs {
    std::string out;
    std::size_t n = 2000;
    std::string motifs = "GATTACAGCT";
    double mutation_rate = 0.0;
    std::size_t length = kGenomeLength;
    std::uint64_t seed = 0;
};

int run_gen_genome(const GenGenomeArgs& a) {
    GenomeOptions opt;
    opt.n = a.n;
    opt.motifs = split(a.motifs);
    opt.mutation_rate = a.mutation_rate;
    opt.length = a.length;
    opt.seed = a.seed;
    const auto records = gen_genome_dataset(opt);
    write_genome_dataset(records, a.out);
    std::cout << "wrote " << records.size() << " sequences to " << a.out << '\n';
    return kOk;
}

struct GenShapesArgs {
    std::string out;
    std::size_t n = 1000;
    std::size_t size = 32;
    std::string kinds = "rectangle,disk";
    std::uint64_t seed = 0;
};

int run_gen_shapes(const GenShapesArgs& a) {
    ShapeOptions opt;
    opt.n = a.n;
    opt.image_size = a.size;
    opt.kinds.clear();
    for (const auto& k : split(a.kinds)) opt.kinds.push_back(parse_shape_kind(k));
    opt.seed = a.seed;
    const Dataset data = gen_shape_dataset(opt);
    write_image_dataset(data, a.out);
    std::cout << "wrote " << data.size() << " images to " << a.out << '\n';
    return kOk;
}

struct TrainArgs {
    std::string preset;
    std::string data;
    std::string out;
    std::size_t epochs = 10;
    double lr = 0.05;
    std::size_t batch_size = 32;
    double holdout = 0.2;
    std::uint64_t seed = 0;
};

int run_train(const TrainArgs& a) {
    require_path(a.data, "--data");
    if (a.holdout < 0.0 || a.holdout >= 1.0) throw ConfigError("--holdout must lie in [0, 1)");
    const LoadedDataset loaded = load_dataset(a.data);
    const Dataset& data = loaded.samples;
    if (data.empty()) throw FormatError("dataset is empty: " + a.data);

    const auto n_test = static_cast<std::size_t>(a.holdout * static_cast<double>(data.size()));
    const std::span<const Sample> all(data);
    const auto train = all.first(data.size() - n_test);
    const auto test = all.last(n_test);

    const Model init = make_preset(a.preset, data.front().input.shape, class_count(data), a.seed);
    std::ostringstream log;
    log << "epoch,loss,accuracy\n";
    TrainOptions opt;
    opt.epochs = a.epochs;
    opt.learning_rate = a.lr;
    opt.batch_size = a.batch_size;
    opt.seed = a.seed;
    opt.on_epoch = [&](const EpochStats& s) {
        log << s.epoch << ',' << format_number(s.mean_loss) << ',' << format_number(s.accuracy) << '\n';
        std::cerr << "epoch " << s.epoch << " loss " << s.mean_loss << " accuracy " << s.accuracy << '\n';
    };
    const Model model = train_sgd(init, train, opt);
    save_model(model, a.out);
    write_text_file(with_suffix(a.out, ".log.csv"), log.str());

    std::cout << "final accuracy: train " << format_number(accuracy(model, train));
    if (!test.empty()) std::cout << " held-out " << format_number(accuracy(model, test));
    std::cout << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------

struct MethodArgs {
    std::string variant = "lrp";
    std::string mode = "fixed";
    double p = 0.0;
    double min_gain = 1.0;

    void add(CLI::App* app) {
        app->add_option("--variant", variant, "lrp | plrp-lambda | plrp-m");
        app->add_option("--mode", mode, "fixed | gain");
        app->add_option("--p", p, "Pruned relevance proportion");
        app->add_option("--min-gain", min_gain, "Minimum sparsity gain");
    }
    Method method() const { return parse_method(variant, mode, mode == "gain" ? min_gain : p); }
};

struct ExplainArgs {
    Common common;
    MethodArgs method;
    std::string config;
    std::vector<std::string> samples;
};

void write_logo(const Tensor& r, const fs::path& path) {
    const std::size_t length = r.size() / kBases.size();
    auto out = open_out(path);
    out << "position\tbase\trelevance\n";
    for (std::size_t pos = 0; pos < length; ++pos)
        for (std::size_t b = 0; b < kBases.size(); ++b)
            out << pos << '\t' << kBases[b] << '\t' << format_number(r[b * length + pos]) << '\n';
}

int run_explain(const ExplainArgs& a) {
    const Common& c = a.common;
    require_path(c.model, "--model");
    require_path(c.data, "--data");
    const Model model = load_model(c.model);
    const LoadedDataset loaded = load_dataset(c.data);

    Method method;
    CompositeOptions composite;
    composite.epsilon = c.epsilon;
    composite.gamma = c.gamma;
    if (!a.config.empty()) {
        require_path(a.config, "--config");
        const ExplainSettings settings = load_settings(a.config);
        composite = settings.composite;
        if (settings.pruning) {
            const bool lambda = settings.pruning->variant == Variant::Lambda;
            method = Method{lambda ? "plrp-lambda" : "plrp-m", settings.pruning};
        }
    } else {
        method = a.method.method();
    }
    const RuleAssignment rules = default_composite(model, composite);

    std::vector<const Sample*> chosen;
    for (const auto& s : loaded.samples)
        if (a.samples.empty() || std::ranges::find(a.samples, s.id) != a.samples.end()) chosen.push_back(&s);
    if (chosen.empty()) throw ConfigError("--sample: no matching sample in " + c.data);

    const fs::path dir = c.out;
    fs::create_directories(dir);
    for (const Sample* s : chosen) {
        const RelevanceTrace trace = explain(model, s->input, rules, method);
        const TraceInfo info{method.name, method.pruning ? method.mode_label() : "", method.parameter(), s->id};
        save_trace(trace, info, dir / (s->id + ".trace.json"));
        if (loaded.kind == DatasetKind::Image)
            write_raster(heatmap(trace.input_relevance()), dir / (s->id + ".heatmap.ppm"));
        else
            write_logo(trace.input_relevance(), dir / (s->id + ".logo.tsv"));
    }
    std::cout << "explained " << chosen.size() << " samples into " << dir.string() << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
    Common common;
    std::string variants = "lrp,plrp-lambda";
    std::string mode = "fixed";
    double p_start = 0.0;
    double p_end = 0.95;
    double p_step = 0.05;
    std::vector<double> min_gains{1.0};
    std::string metrics = "gini,entropy,rma";
    std::size_t patch_size = FlipOptions{}.patch_size;
    std::size_t flip_steps = FlipOptions{}.steps;
    double lipschitz_epsilon = 0.05;
    std::size_t lipschitz_samples = 10;
    std::size_t limit = 0;
    std::size_t threads = 1;
};

struct SweepSetup {
    Model model;
    LoadedDataset loaded;
    EvalOptions options;
};

SweepSetup prepare(const Common& c, std::size_t limit) {
    require_path(c.model, "--model");
    require_path(c.data, "--data");
    SweepSetup s{load_model(c.model), load_dataset(c.data), {}};
    if (limit > 0 && s.loaded.samples.size() > limit) s.loaded.samples.resize(limit);
    s.options.seed = c.seed;
    s.options.continuous_domain = s.loaded.kind == DatasetKind::Image;
    s.options.flip_baseline = mean_value(s.loaded.samples);
    return s;
}

SweepSpec sweep_spec(const std::string& variants, const std::string& mode, std::vector<double> p_values,
                     std::vector<double> min_gains) {
    SweepSpec spec;
    for (const auto& v : split(variants)) spec.methods.emplace_back(v, v == "lrp" ? "" : mode);
    spec.p_values = std::move(p_values);
    spec.min_gains = std::move(min_gains);
    return spec;
}

int run_sweep_cmd(const SweepArgs& a) {
    SweepSetup s = prepare(a.common, a.limit);
    s.options.metrics = parse_metrics(a.metrics);
    s.options.flip.patch_size = a.patch_size;
    s.options.flip.steps = a.flip_steps;
    s.options.lipschitz_epsilon = a.lipschitz_epsilon;
    s.options.lipschitz_samples = a.lipschitz_samples;

    std::vector<std::string> notes;
    if (!s.options.continuous_domain) {
        if (s.options.metrics.lipschitz) notes.emplace_back("lipschitz skipped: discrete input domain");
        if (s.options.metrics.faithfulness) notes.emplace_back("faithfulness skipped: discrete input domain");
    }

    const SweepSpec spec = sweep_spec(a.variants, a.mode, p_grid(a.p_start, a.p_end, a.p_step), a.min_gains);
    const auto rows = run_sweep(s.model, s.loaded.samples, a.common.rules(s.model), spec, s.options, a.threads);

    std::size_t failures = 0;
    for (const auto& row : rows) {
        if (row.report) continue;
        ++failures;
        notes.push_back(row.sample_id + " " + row.method.name + " p=" + format_number(row.method.parameter()) +
                        ": " + row.error);
    }
    {
        auto out = open_out(a.common.out);
        write_metrics_csv(out, rows);
    }
    if (s.options.metrics.faithfulness && s.options.continuous_domain) {
        auto out = open_out(with_suffix(a.common.out, ".flip.csv"));
        write_flip_csv(out, rows);
    }
    if (!notes.empty()) {
        auto out = open_out(with_suffix(a.common.out, ".notes.txt"));
        for (const auto& n : notes) {
            std::cerr << n << '\n';
            out << n << '\n';
        }
    }
    std::cout << "wrote " << rows.size() << " rows to " << a.common.out;
    if (failures > 0) std::cout << " (" << failures << " failed)";
    std::cout << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------

struct FlipArgs {
    Common common;
    std::string variants = "lrp,plrp-lambda";
    std::string mode = "fixed";
    std::vector<double> p{0.15};
    std::vector<double> min_gains{1.0};
    std::size_t patch_size = FlipOptions{}.patch_size;
    std::size_t flip_steps = FlipOptions{}.steps;
    std::string baseline = "mean";
    std::size_t limit = 0;
    std::size_t threads = 1;
};

int run_flip(const FlipArgs& a) {
    SweepSetup s = prepare(a.common, a.limit);
    if (!s.options.continuous_domain) throw ConfigError("flip needs a continuous-domain (image) dataset");
    if (a.baseline == "zero")
        s.options.flip_baseline = 0.0;
    else if (a.baseline != "mean")
        throw ConfigError("--baseline must be mean or zero");
    s.options.metrics = MetricSelection{false, false, false, false, true};
    s.options.flip.patch_size = a.patch_size;
    s.options.flip.steps = a.flip_steps;

    const SweepSpec spec = sweep_spec(a.variants, a.mode, a.p, a.min_gains);
    const auto rows = run_sweep(s.model, s.loaded.samples, a.common.rules(s.model), spec, s.options, a.threads);
    {
        auto out = open_out(a.common.out);
        write_flip_csv(out, rows);
    }

    auto out = open_out(with_suffix(a.common.out, ".auc.csv"));
    out << "method,variant,mode,param,meanAUC,samples\n";
    const auto methods = expand_methods(spec);
    for (std::size_t m = 0; m < methods.size(); ++m) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = m; i < rows.size(); i += methods.size()) {
            if (!rows[i].report || !rows[i].report->faith_auc) continue;
            sum += *rows[i].report->faith_auc;
            ++n;
        }
        const Method& me = methods[m];
        out << me.name << ',' << me.variant_label() << ',' << me.mode_label() << ',' << format_number(me.parameter())
            << ',' << (n ? format_number(sum / static_cast<double>(n)) : std::string()) << ',' << n << '\n';
    }
    std::cout << "wrote flip curves for " << s.loaded.samples.size() << " samples to " << a.common.out << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Layer-wise relevance propagation with relevance pruning"};
    app.require_subcommand(1);

    GenGenomeArgs gg;
    auto* gen_genome = app.add_subcommand("gen-genome", "Generate synthetic motif sequences");
    gen_genome->add_option("--out", gg.out, "Output directory")->required();
    gen_genome->add_option("--n", gg.n, "Number of sequences");
    gen_genome->add_option("--motifs", gg.motifs, "Comma-separated motifs, one class each");
    gen_genome->add_option("--mutation-rate", gg.mutation_rate, "Per-base mutation rate inside motifs");
    gen_genome->add_option("--length", gg.length, "Sequence length");
    gen_genome->add_option("--seed", gg.seed, "Random seed");

    GenShapesArgs gs;
    auto* gen_shapes = app.add_subcommand("gen-shapes", "Generate synthetic shape images");
    gen_shapes->add_option("--out", gs.out, "Output directory")->required();
    gen_shapes->add_option("--n", gs.n, "Number of images");
    gen_shapes->add_option("--size", gs.size, "Image edge length");
    gen_shapes->add_option("--kinds", gs.kinds, "Comma-separated shape kinds (rectangle, disk, triangle)");
    gen_shapes->add_option("--seed", gs.seed, "Random seed");

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "Train a preset model");
    train->add_option("--preset", tr.preset, "genome-4 | genome-32 | shapes")->required();
    train->add_option("--data", tr.data, "Dataset directory")->required();
    train->add_option("--out", tr.out, "Output model file")->required();
    train->add_option("--epochs", tr.epochs, "Training epochs");
    train->add_option("--lr", tr.lr, "Learning rate");
    train->add_option("--batch-size", tr.batch_size, "Mini-batch size");
    train->add_option("--holdout", tr.holdout, "Trailing share of the dataset held out");
    train->add_option("--seed", tr.seed, "Random seed");

    ExplainArgs ex;
    auto* explain_cmd = app.add_subcommand("explain", "Write relevance traces, heatmaps and logo tables");
    ex.common.add_model_data(explain_cmd);
    explain_cmd->add_option("--out", ex.common.out, "Output directory")->required();
    ex.method.add(explain_cmd);
    ex.common.add_rules(explain_cmd);
    explain_cmd->add_option("--config", ex.config, "Explanation settings file (overrides method flags)");
    explain_cmd->add_option("--sample", ex.samples, "Sample id to explain (repeatable; default all)");

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Metrics over a p-grid");
    sw.common.add_model_data(sweep);
    sweep->add_option("--out", sw.common.out, "Metrics CSV")->required();
    sweep->add_option("--variant", sw.variants, "Comma-separated methods (lrp, plrp-lambda, plrp-m)");
    sweep->add_option("--mode", sw.mode, "fixed | gain");
    sweep->add_option("--p-start", sw.p_start, "First p");
    sweep->add_option("--p-end", sw.p_end, "Last p");
    sweep->add_option("--p-step", sw.p_step, "p increment");
    sweep->add_option("--min-gain", sw.min_gains, "Minimum sparsity gains (gain mode)")->delimiter(',');
    sweep->add_option("--metrics", sw.metrics, "Comma-separated subset of gini,entropy,rma,lipschitz,faith");
    sweep->add_option("--seed", sw.common.seed, "Random seed");
    sweep->add_option("--patch-size", sw.patch_size, "Pixel-flipping patch edge");
    sweep->add_option("--flip-steps", sw.flip_steps, "Pixel-flipping steps");
    sweep->add_option("--lipschitz-epsilon", sw.lipschitz_epsilon, "Perturbation radius");
    sweep->add_option("--lipschitz-samples", sw.lipschitz_samples, "Perturbations per input");
    sweep->add_option("--limit", sw.limit, "Use only the first N samples");
    sweep->add_option("--threads", sw.threads, "Worker threads");
    sw.common.add_rules(sweep);

    FlipArgs fl;
    auto* flip = app.add_subcommand("flip", "Pixel-flipping curves and AUC");
    fl.common.add_model_data(flip);
    flip->add_option("--out", fl.common.out, "Curve CSV")->required();
    flip->add_option("--variant", fl.variants, "Comma-separated methods (lrp, plrp-lambda, plrp-m)");
    flip->add_option("--mode", fl.mode, "fixed | gain");
    flip->add_option("--p", fl.p, "Pruned proportions")->delimiter(',');
    flip->add_option("--min-gain", fl.min_gains, "Minimum sparsity gains (gain mode)")->delimiter(',');
    flip->add_option("--seed", fl.common.seed, "Random seed");
    flip->add_option("--patch-size", fl.patch_size, "Patch edge");
    flip->add_option("--flip-steps", fl.flip_steps, "Steps");
    flip->add_option("--baseline", fl.baseline, "Replacement value: mean | zero");
    flip->add_option("--limit", fl.limit, "Use only the first N samples");
    flip->add_option("--threads", fl.threads, "Worker threads");
    fl.common.add_rules(flip);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*gen_genome) return run_gen_genome(gg);
        if (*gen_shapes) return run_gen_shapes(gs);
        if (*train) return run_train(tr);
        if (*explain_cmd) return run_explain(ex);
        if (*sweep) return run_sweep_cmd(sw);
        if (*flip) return run_flip(fl);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}

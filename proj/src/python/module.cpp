#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "plrp/datagen.hpp"
#include "plrp/errors.hpp"
#include "plrp/evaluate.hpp"
#include "plrp/forward.hpp"
#include "plrp/metrics.hpp"
#include "plrp/model_io.hpp"
#include "plrp/presets.hpp"
#include "plrp/pruning.hpp"
#include "plrp/train.hpp"

namespace py = pybind11;
using namespace plrp;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
    Shape shape(a.shape(), a.shape() + a.ndim());
    return Tensor(std::move(shape), std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor& t) {
    Array out(std::vector<py::ssize_t>(t.shape.begin(), t.shape.end()));
    std::copy(t.data.begin(), t.data.end(), out.mutable_data());
    return out;
}

std::vector<double> to_vector(const Array& a) { return {a.data(), a.data() + a.size()}; }

py::tuple dataset_arrays(const Dataset& data) {
    if (data.empty()) return py::make_tuple(Array(), py::array_t<std::int64_t>(), py::array_t<std::uint8_t>());
    std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(data.size())};
    for (std::size_t d : data.front().input.shape) shape.push_back(static_cast<py::ssize_t>(d));
    Array x(shape);
    py::array_t<std::uint8_t> masks(shape);
    py::array_t<std::int64_t> labels(static_cast<py::ssize_t>(data.size()));
    const std::size_t n = data.front().input.size();
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::copy(data[i].input.data.begin(), data[i].input.data.end(), x.mutable_data() + i * n);
        std::copy(data[i].mask.begin(), data[i].mask.end(), masks.mutable_data() + i * n);
        labels.mutable_data()[i] = static_cast<std::int64_t>(data[i].label);
    }
    return py::make_tuple(x, labels, masks);
}

Dataset dataset_from(const Array& x, const py::array_t<std::int64_t>& labels) {
    if (x.ndim() < 2 || labels.ndim() != 1 || labels.shape(0) != x.shape(0))
        throw ShapeError("expected inputs (n, ...) and labels (n,)");
    Shape shape(x.shape() + 1, x.shape() + x.ndim());
    const std::size_t n = shape_size(shape);
    Dataset data;
    for (py::ssize_t i = 0; i < x.shape(0); ++i) {
        const double* row = x.data() + i * static_cast<py::ssize_t>(n);
        data.push_back({"s" + std::to_string(i), Tensor(shape, std::vector<double>(row, row + n)),
                        static_cast<std::size_t>(labels.at(i)), {}});
    }
    return data;
}

py::dict trace_dict(const RelevanceTrace& t) {
    py::list pruning;
    for (const auto& p : t.pruning) {
        py::dict d;
        d["layer"] = p.layer;
        d["theta_positive"] = p.theta_positive;
        d["theta_negative"] = p.theta_negative;
        d["implied_p_positive"] = p.implied_p_positive;
        d["implied_p_negative"] = p.implied_p_negative;
        d["pruned_count"] = p.pruned_count;
        d["undeliverable_columns"] = p.undeliverable_columns;
        pruning.append(d);
    }
    py::list layers;
    for (const auto& r : t.relevance) layers.append(to_array(r));
    py::dict out;
    out["relevance"] = to_array(t.input_relevance());
    out["layers"] = layers;
    out["target_class"] = t.target_class;
    out["target_score"] = t.target_score;
    out["pruning"] = pruning;
    return out;
}

py::tuple threshold_tuple(const ThresholdResult& t) {
    return py::make_tuple(t.threshold, t.pruned, t.implied_p);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Pruned layer-wise relevance propagation";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

    py::class_<Model>(m, "Model")
        .def_static("from_json", &model_from_string)
        .def_static("load", [](const std::string& path) { return load_model(path); })
        .def("to_json", &model_to_string)
        .def("save", [](const Model& self, const std::string& path) { save_model(self, path); })
        .def_property_readonly("input_shape", &Model::input_shape)
        .def_property_readonly("num_classes", &Model::num_classes)
        .def_property_readonly("depth", &Model::depth)
        .def_property_readonly("parameter_count", &Model::parameter_count)
        .def("predict", [](const Model& self, const Array& x) { return to_array(predict(self, to_tensor(x))); });

    m.def("make_preset", &make_preset, py::arg("name"), py::arg("input_shape"), py::arg("num_classes"),
          py::arg("seed") = 0);

    m.def(
        "explain",
        [](const Model& model, const Array& x, const std::string& method, const std::string& mode, double p,
           double min_gain, double epsilon, double gamma) {
            CompositeOptions composite;
            composite.epsilon = epsilon;
            composite.gamma = gamma;
            const Method parsed = parse_method(method, mode, mode == "gain" ? min_gain : p);
            const RelevanceTrace t = explain(model, to_tensor(x), default_composite(model, composite), parsed);
            return trace_dict(t);
        },
        py::arg("model"), py::arg("x"), py::arg("method") = "lrp", py::arg("mode") = "fixed", py::arg("p") = 0.0,
        py::arg("min_gain") = 1.0, py::arg("epsilon") = 1e-6, py::arg("gamma") = 0.25);

    m.def(
        "threshold_for_mass", [](const Array& r, double p) { return threshold_tuple(threshold_for_mass(to_vector(r), p)); },
        py::arg("r"), py::arg("p"), "(theta, pruned indices, implied p) for the ascending-mass rule");
    m.def(
        "threshold_for_gain",
        [](const Array& r, double min_gain) { return threshold_tuple(threshold_for_gain(to_vector(r), min_gain)); },
        py::arg("r"), py::arg("min_gain"));
    m.def("sparsity_gains", [](const Array& r) { return sparsity_gains(to_vector(r)); }, py::arg("r"));
    m.def("prune_lambda", [](const Array& r, double theta) { return prune_lambda(to_vector(r), theta); },
          py::arg("r"), py::arg("theta"));

    m.def("gini", [](const Array& r) { return gini(to_vector(r)); });
    m.def("entropy", [](const Array& r) { return entropy(to_vector(r)); });
    m.def(
        "relevance_mass_accuracy",
        [](const Array& r, const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& mask) {
            return relevance_mass_accuracy(to_vector(r), Mask(mask.data(), mask.data() + mask.size()));
        },
        py::arg("r"), py::arg("mask"));

    m.def(
        "gen_shapes",
        [](std::size_t n, std::size_t size, std::uint64_t seed) {
            ShapeOptions opt;
            opt.n = n;
            opt.image_size = size;
            opt.seed = seed;
            return dataset_arrays(gen_shape_dataset(opt));
        },
        py::arg("n"), py::arg("size") = 32, py::arg("seed") = 0, "(inputs, labels, masks)");
    m.def(
        "gen_genome",
        [](std::size_t n, std::vector<std::string> motifs, double mutation_rate, std::uint64_t seed) {
            GenomeOptions opt;
            opt.n = n;
            opt.motifs = std::move(motifs);
            opt.mutation_rate = mutation_rate;
            opt.seed = seed;
            return dataset_arrays(to_dataset(gen_genome_dataset(opt)));
        },
        py::arg("n"), py::arg("motifs") = std::vector<std::string>{"GATTACAGCT"}, py::arg("mutation_rate") = 0.0,
        py::arg("seed") = 0, "(one-hot inputs, labels, masks)");

    m.def(
        "train",
        [](const Model& model, const Array& x, const py::array_t<std::int64_t>& labels, std::size_t epochs,
           double lr, std::size_t batch_size, std::uint64_t seed) {
            TrainOptions opt;
            opt.epochs = epochs;
            opt.learning_rate = lr;
            opt.batch_size = batch_size;
            opt.seed = seed;
            const Dataset data = dataset_from(x, labels);
            py::gil_scoped_release release;
            return train_sgd(model, data, opt);
        },
        py::arg("model"), py::arg("x"), py::arg("labels"), py::arg("epochs") = 10, py::arg("lr") = 0.05,
        py::arg("batch_size") = 32, py::arg("seed") = 0);
    m.def(
        "accuracy",
        [](const Model& model, const Array& x, const py::array_t<std::int64_t>& labels) {
            return accuracy(model, dataset_from(x, labels));
        },
        py::arg("model"), py::arg("x"), py::arg("labels"));
}

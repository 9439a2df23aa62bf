#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "har/experiment.hpp"
#include "har/layers.hpp"
#include "har/metrics.hpp"
#include "har/synth.hpp"
#include "har/training.hpp"

namespace py = pybind11;
using namespace har;

namespace {

Matrix to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw ConfigError("expected a 2-d array");
    Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), m.values().begin());
    return m;
}

py::array_t<double> to_array(const Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    std::copy(m.values().begin(), m.values().end(), out.mutable_data());
    return out;
}

std::vector<Sample> to_samples(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
    const std::vector<std::size_t>& y) {
    if (x.ndim() != 3) throw ConfigError("expected windows of shape (n, T, N)");
    const auto n = static_cast<std::size_t>(x.shape(0));
    if (y.size() != n) throw ConfigError("windows and labels disagree on the sample count");
    const auto T = static_cast<std::size_t>(x.shape(1));
    const auto N = static_cast<std::size_t>(x.shape(2));
    std::vector<Sample> samples(n);
    for (std::size_t i = 0; i < n; ++i) {
        samples[i].window = Matrix(T, N);
        std::copy(x.data() + i * T * N, x.data() + (i + 1) * T * N,
                  samples[i].window.values().begin());
        samples[i].label = y[i];
    }
    return samples;
}

py::dict history_dict(const TrainHistory& h) {
    py::list epochs;
    for (const EpochRecord& r : h.epochs) {
        py::dict e;
        e["epoch"] = r.epoch;
        e["train_loss"] = r.train_loss;
        e["val_loss"] = r.val_loss;
        e["val_acc"] = r.val_acc;
        epochs.append(e);
    }
    py::dict out;
    out["epochs"] = epochs;
    out["stop_epoch"] = h.stop_epoch;
    out["stop_reason"] = h.stop_reason;
    return out;
}

ModelConfig config_from_kwargs(const std::string& arch, std::size_t window, std::size_t channels,
                               std::size_t classes, std::size_t conv_filters,
                               std::size_t lstm_units, std::size_t lstm_layers,
                               std::size_t att_length, std::size_t att_output,
                               double learning_rate, std::size_t batch_size,
                               std::size_t max_epochs, std::size_t patience) {
    ModelConfig cfg = ModelConfig::defaults(arch_from_string(arch));
    cfg.window = window;
    cfg.channels = channels;
    cfg.classes = classes;
    cfg.conv_filters = conv_filters;
    cfg.lstm_units = lstm_units;
    cfg.lstm_layers = lstm_layers;
    cfg.att_length = att_length;
    cfg.att_output = att_output;
    if (learning_rate > 0.0) cfg.learning_rate = learning_rate;
    cfg.batch_size = batch_size;
    cfg.max_epochs = max_epochs;
    cfg.patience = patience;
    cfg.validate();
    return cfg;
}

// Thin stateful wrapper pairing a configuration with trained parameters.
class PyModel {
public:
    PyModel(ModelConfig cfg) : cfg_(std::move(cfg)) {}

    void init(std::uint64_t seed) {
        Rng rng(seed);
        params_ = init_params(cfg_, rng);
        trained_ = true;
    }

    py::dict fit(const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
                 const std::vector<std::size_t>& y,
                 const py::array_t<double, py::array::c_style | py::array::forcecast>& val_x,
                 const std::vector<std::size_t>& val_y, std::uint64_t seed) {
        Rng rng(seed);
        auto [best, history] = har::fit(cfg_, to_samples(x, y), to_samples(val_x, val_y), rng);
        params_ = std::move(best);
        trained_ = true;
        return history_dict(history);
    }

    py::array_t<double> predict_proba(
        const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
        require_trained();
        Matrix probs(static_cast<std::size_t>(x.shape(0)), cfg_.classes);
        auto samples = to_samples(x, std::vector<std::size_t>(x.shape(0), 0));
        for (std::size_t i = 0; i < samples.size(); ++i) {
            auto p = forward(cfg_, params_, samples[i].window).probs;
            for (std::size_t c = 0; c < cfg_.classes; ++c) probs(i, c) = p[c];
        }
        return to_array(probs);
    }

    std::vector<std::size_t> predict(
        const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
        require_trained();
        auto samples = to_samples(x, std::vector<std::size_t>(x.shape(0), 0));
        std::vector<std::size_t> out;
        out.reserve(samples.size());
        for (const Sample& s : samples) out.push_back(har::predict(cfg_, params_, s.window));
        return out;
    }

    void save(const std::string& path) {
        require_trained();
        save_params(path, cfg_, params_);
    }

    static PyModel load(const std::string& path) {
        auto [cfg, params] = load_params(path);
        PyModel m(cfg);
        m.params_ = std::move(params);
        m.trained_ = true;
        return m;
    }

    py::dict config() const {
        py::dict d;
        d["arch"] = to_string(cfg_.arch);
        d["window"] = cfg_.window;
        d["channels"] = cfg_.channels;
        d["classes"] = cfg_.classes;
        d["conv_filters"] = cfg_.conv_filters;
        d["lstm_units"] = cfg_.lstm_units;
        d["lstm_layers"] = cfg_.lstm_layers;
        d["att_length"] = cfg_.att_length;
        d["att_output"] = cfg_.att_output;
        d["learning_rate"] = cfg_.learning_rate;
        d["batch_size"] = cfg_.batch_size;
        d["max_epochs"] = cfg_.max_epochs;
        d["patience"] = cfg_.patience;
        return d;
    }

    std::size_t parameter_count() const {
        require_trained();
        return params_.value_count();
    }

private:
    void require_trained() const {
        if (!trained_) throw ConfigError("model has no parameters; call init() or fit() first");
    }

    ModelConfig cfg_;
    ParamSet params_;
    bool trained_ = false;
};

}  // namespace

PYBIND11_MODULE(_harcore, m) {
    m.doc() = "Sensor time-series activity classifier: convolutional embedding, LSTM, "
              "temporal self-attention, cross-validated evaluation.";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_IOError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<PyModel>(m, "Model")
        .def(py::init([](const std::string& arch, std::size_t window, std::size_t channels,
                         std::size_t classes, std::size_t conv_filters, std::size_t lstm_units,
                         std::size_t lstm_layers, std::size_t att_length, std::size_t att_output,
                         double learning_rate, std::size_t batch_size, std::size_t max_epochs,
                         std::size_t patience) {
                 return PyModel(config_from_kwargs(arch, window, channels, classes, conv_filters,
                                                   lstm_units, lstm_layers, att_length,
                                                   att_output, learning_rate, batch_size,
                                                   max_epochs, patience));
             }),
             py::arg("arch") = "proposed", py::arg("window") = 32, py::arg("channels") = 3,
             py::arg("classes") = 2, py::arg("conv_filters") = 3, py::arg("lstm_units") = 32,
             py::arg("lstm_layers") = 1, py::arg("att_length") = 32, py::arg("att_output") = 10,
             py::arg("learning_rate") = 0.0, py::arg("batch_size") = 32,
             py::arg("max_epochs") = 100, py::arg("patience") = 10)
        .def("init", &PyModel::init, py::arg("seed") = 0)
        .def("fit", &PyModel::fit, py::arg("x"), py::arg("y"), py::arg("val_x"),
             py::arg("val_y"), py::arg("seed") = 0)
        .def("predict", &PyModel::predict, py::arg("x"))
        .def("predict_proba", &PyModel::predict_proba, py::arg("x"))
        .def("save", &PyModel::save, py::arg("path"))
        .def_static("load", &PyModel::load, py::arg("path"))
        .def_property_readonly("config", &PyModel::config)
        .def_property_readonly("parameter_count", &PyModel::parameter_count);

    m.def(
        "synth",
        [](const std::string& family, std::size_t classes, std::size_t subjects,
           std::size_t trials_per_class, std::size_t length, std::size_t channels, double noise,
           double marker_amp, std::size_t marker_len, std::uint64_t seed) {
            SynthSpec spec;
            spec.family = task_family_from_string(family);
            spec.classes = classes;
            spec.subjects = subjects;
            spec.trials_per_class = trials_per_class;
            spec.length = length;
            spec.channels = channels;
            spec.noise = noise;
            spec.marker_amp = marker_amp;
            spec.marker_len = marker_len;
            Rng rng(seed);
            py::list out;
            for (const Trial& t : synth_trials(spec, rng)) {
                py::dict d;
                d["trial_id"] = t.trial_id;
                d["subject_id"] = t.subject_id;
                d["label"] = t.label;
                d["series"] = to_array(t.series);
                out.append(d);
            }
            return out;
        },
        py::arg("family") = "separable", py::arg("classes") = 3, py::arg("subjects") = 5,
        py::arg("trials_per_class") = 10, py::arg("length") = 128, py::arg("channels") = 3,
        py::arg("noise") = 0.1, py::arg("marker_amp") = 2.0, py::arg("marker_len") = 6,
        py::arg("seed") = 0,
        "Generate a synthetic labelled trial corpus; returns a list of dicts.");

    m.def(
        "make_windows",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& series,
           std::size_t window, const std::string& scheme) {
            Trial t;
            t.series = to_matrix(series);
            py::list out;
            for (const Sample& s : har::make_windows(t, window, window_scheme_from_string(scheme))) {
                py::dict d;
                d["start"] = s.start;
                d["window"] = to_array(s.window);
                out.append(d);
            }
            return out;
        },
        py::arg("series"), py::arg("window"), py::arg("scheme") = "snow",
        "Cut an L x N series into T x N windows (scheme: snow=half overlap, fnow=none).");

    m.def(
        "evaluate",
        [](const std::vector<std::size_t>& preds, const std::vector<std::size_t>& labels,
           std::size_t classes) {
            auto [cm, metrics] = har::evaluate(preds, labels, classes);
            py::array_t<std::size_t> confusion({classes, classes});
            std::copy(cm.counts.begin(), cm.counts.end(), confusion.mutable_data());
            py::dict d;
            d["accuracy"] = metrics.accuracy;
            d["macro_precision"] = metrics.macro_precision;
            d["macro_recall"] = metrics.macro_recall;
            d["macro_f1"] = metrics.macro_f1;
            d["precision"] = metrics.precision;
            d["recall"] = metrics.recall;
            d["f1"] = metrics.f1;
            d["confusion"] = confusion;
            return d;
        },
        py::arg("preds"), py::arg("labels"), py::arg("classes"),
        "Confusion matrix plus accuracy and macro precision/recall/F1.");

    m.def(
        "gradcheck",
        [](const std::string& arch, std::size_t window, std::size_t channels,
           std::size_t classes, std::size_t conv_filters, std::size_t lstm_units,
           std::size_t lstm_layers, std::size_t att_length, std::size_t att_output,
           const std::vector<std::uint64_t>& seeds, double eps, double tol) {
            ModelConfig dims = config_from_kwargs(arch, window, channels, classes, conv_filters,
                                                  lstm_units, lstm_layers, att_length,
                                                  att_output, 0.0, 32, 1, 1);
            py::list out;
            for (const GradCheckRow& row : run_gradcheck(dims, seeds, eps, tol)) {
                py::dict d;
                d["group"] = row.group;
                d["max_rel_err"] = row.max_rel_err;
                d["pass"] = row.pass;
                out.append(d);
            }
            return out;
        },
        py::arg("arch") = "proposed", py::arg("window") = 8, py::arg("channels") = 3,
        py::arg("classes") = 3, py::arg("conv_filters") = 3, py::arg("lstm_units") = 4,
        py::arg("lstm_layers") = 1, py::arg("att_length") = 4, py::arg("att_output") = 2,
        py::arg("seeds") = std::vector<std::uint64_t>{1}, py::arg("eps") = 1e-6,
        py::arg("tol") = 1e-5,
        "Compare analytic gradients against central finite differences per parameter group.");

    m.def(
        "run_xval",
        [](const std::string& config_text) {
            ExperimentConfig cfg = ExperimentConfig::from_text(config_text);
            return render_report(run_xval(cfg).report);
        },
        py::arg("config_text"),
        "Run full cross-validation from a key=value config; returns the JSON report text.");

    m.def(
        "run_train",
        [](const std::string& config_text) {
            ExperimentConfig cfg = ExperimentConfig::from_text(config_text);
            return render_report(run_train(cfg).report);
        },
        py::arg("config_text"),
        "Train a single model (test fold 0) and save it; returns the JSON report text.");
}

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "saea/bench.hpp"
#include "saea/cgp_ann.hpp"
#include "saea/dataset.hpp"
#include "saea/error.hpp"
#include "saea/evolution.hpp"
#include "saea/kpls.hpp"
#include "saea/kriging.hpp"
#include "saea/phenotype.hpp"
#include "saea/pls.hpp"

namespace py = pybind11;
using namespace saea;

namespace {

FitSpec make_spec(std::optional<double> budget, std::uint64_t seed, std::size_t starts) {
    FitSpec spec;
    spec.budget_seconds = budget;
    spec.seed = seed;
    spec.starts = starts;
    return spec;
}

Dataset make_dataset(const Eigen::MatrixXd& x, const std::vector<int>& labels, int n_classes) {
    Dataset d;
    d.features = x;
    d.labels = labels;
    d.n_classes = n_classes;
    for (int c = 0; c < n_classes; ++c) d.class_names.push_back(std::to_string(c));
    d.validate();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Kriging / KPLS surrogates and surrogate-assisted CGP-ANN evolution";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<EvaluationError>(m, "EvaluationError", PyExc_ArithmeticError);
    py::register_exception<DegenerateComponentError>(m, "DegenerateComponentError", PyExc_ArithmeticError);
    py::register_exception<IndefiniteMatrixError>(m, "IndefiniteMatrixError", PyExc_ArithmeticError);
    py::register_exception<FitTimeout>(m, "FitTimeout", PyExc_TimeoutError);

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("name", &Dataset::name)
        .def_readonly("features", &Dataset::features)
        .def_readonly("labels", &Dataset::labels)
        .def_readonly("n_classes", &Dataset::n_classes)
        .def_readonly("class_names", &Dataset::class_names)
        .def("__len__", &Dataset::size);

    py::class_<PreparedSplit>(m, "PreparedSplit")
        .def_readonly("train", &PreparedSplit::train)
        .def_readonly("test", &PreparedSplit::test)
        .def_property_readonly("phenotype_length", &PreparedSplit::phenotype_length);

    m.def("curated_datasets", &curated_datasets);
    m.def(
        "prepare",
        [](const std::string& name, const std::filesystem::path& data_dir, double train_fraction, std::uint64_t seed,
           bool stratified) { return prepare_named(name, data_dir, {train_fraction, seed, stratified}); },
        py::arg("name"), py::arg("data_dir"), py::arg("train_fraction") = 0.75, py::arg("seed") = 0,
        py::arg("stratified") = false);

    py::class_<PlsRotation>(m, "PlsRotation")
        .def_readonly("weights", &PlsRotation::weights)
        .def_readonly("loadings", &PlsRotation::loadings)
        .def_readonly("rotation", &PlsRotation::rotation)
        .def_readonly("scores", &PlsRotation::scores)
        .def_readonly("y_loadings", &PlsRotation::y_loadings)
        .def("coefficients", &PlsRotation::coefficients);
    m.def("fit_pls", &fit_pls, py::arg("x"), py::arg("y"), py::arg("h"), "x and y must be centred");

    py::class_<KrigingModel>(m, "KrigingModel")
        .def_property_readonly("theta", [](const KrigingModel& k) { return k.kernel.theta; })
        .def_property_readonly("nugget", [](const KrigingModel& k) { return k.kernel.nugget; })
        .def_property_readonly("beta", &KrigingModel::beta)
        .def_property_readonly("sigma2", &KrigingModel::sigma2)
        .def_property_readonly("is_kpls", &KrigingModel::is_kpls)
        .def_property_readonly("log_likelihood", [](const KrigingModel& k) { return k.diagnostics.log_likelihood; })
        .def_property_readonly("evaluations", [](const KrigingModel& k) { return k.diagnostics.evaluations; })
        .def(
            "predict",
            [](const KrigingModel& k, const Eigen::MatrixXd& x) {
                std::vector<Prediction> p;
                {
                    py::gil_scoped_release release;
                    p = k.predict_rows(x);
                }
                Eigen::VectorXd mean(static_cast<Eigen::Index>(p.size())), var(mean.size());
                for (std::size_t i = 0; i < p.size(); ++i) {
                    mean(static_cast<Eigen::Index>(i)) = p[i].mean;
                    var(static_cast<Eigen::Index>(i)) = p[i].variance;
                }
                return py::make_tuple(mean, var);
            },
            py::arg("x"), "Mean and variance for each row of x")
        .def("to_json", &model_to_json)
        .def_static("from_json", &model_from_json);

    m.def(
        "fit_kriging",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::optional<double> budget, std::uint64_t seed,
           std::size_t starts) { return fit_kriging(x, y, make_spec(budget, seed, starts)); },
        py::arg("x"), py::arg("y"), py::arg("budget_seconds") = py::none(), py::arg("seed") = 0, py::arg("starts") = 5,
        py::call_guard<py::gil_scoped_release>());
    m.def(
        "fit_kpls",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::size_t h, std::optional<double> budget,
           std::uint64_t seed, std::size_t starts) { return fit_kpls(x, y, h, make_spec(budget, seed, starts)); },
        py::arg("x"), py::arg("y"), py::arg("h") = 2, py::arg("budget_seconds") = py::none(), py::arg("seed") = 0,
        py::arg("starts") = 5, py::call_guard<py::gil_scoped_release>());
    m.def("kpls_kernel", &kpls_kernel, py::arg("x"), py::arg("x_prime"), py::arg("rotation"), py::arg("theta"));
    m.def("build_correlation", &build_correlation, py::arg("z"), py::arg("theta"));

    m.def(
        "extract_phenotype",
        [](const std::string& genotype_text, const Eigen::MatrixXd& x, const std::vector<int>& labels, int n_classes) {
            return extract(deserialize_genotype(genotype_text), make_dataset(x, labels, n_classes)).values;
        },
        py::arg("genotype"), py::arg("x"), py::arg("labels"), py::arg("n_classes"));
    m.def(
        "random_genotype",
        [](int n_inputs, int n_outputs, std::uint64_t seed) {
            GridConfig c;
            c.n_inputs = n_inputs;
            c.n_outputs = n_outputs;
            Rng rng(seed);
            return serialize(random_genotype(c, rng));
        },
        py::arg("n_inputs"), py::arg("n_outputs"), py::arg("seed") = 0, "Default 10x5 grid; returns genotype text");

    m.def("spearman", &spearman_correlation, py::arg("a"), py::arg("b"));

    m.def(
        "evolve",
        [](const std::string& config_ini, const Eigen::MatrixXd& x, const std::vector<int>& labels, int n_classes,
           bool include_timings) {
            auto config = EvolutionConfig::from_keyvalue(KeyValueFile::parse(config_ini));
            const auto train = make_dataset(x, labels, n_classes);
            RunLog log;
            {
                py::gil_scoped_release release;
                log = run(config, train);
            }
            return log.to_json(include_timings);
        },
        py::arg("config_ini"), py::arg("x"), py::arg("labels"), py::arg("n_classes"),
        py::arg("include_timings") = true, "Runs the evolution and returns the JSON run log");
}

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ccbfair/baseline.hpp"
#include "ccbfair/ccb.hpp"
#include "ccbfair/csv.hpp"
#include "ccbfair/data.hpp"
#include "ccbfair/error.hpp"
#include "ccbfair/io.hpp"
#include "ccbfair/metrics.hpp"
#include "ccbfair/selection.hpp"

namespace py = pybind11;
using namespace ccbfair;

namespace {

PreparedData load_dataset(const std::filesystem::path& csv, const std::filesystem::path& schema,
                          std::uint64_t seed) {
  const auto declared = read_schema(schema);
  return prepare(select_columns(read_csv(csv), declared), declared, seed);
}

// Reward log as columns, which is what plotting code wants for 1e6+ steps.
py::dict log_columns(const RewardLog& log) {
  const auto n = static_cast<py::ssize_t>(log.size());
  py::array_t<std::int64_t> step(n), sensitive(n), action(n);
  py::array_t<double> acc(n), kl(n), reward(n), accumulated(n), grad(n);
  for (py::ssize_t i = 0; i < n; ++i) {
    const auto& r = log[static_cast<std::size_t>(i)];
    step.mutable_at(i) = static_cast<std::int64_t>(r.step);
    sensitive.mutable_at(i) = r.sensitive;
    action.mutable_at(i) = r.action;
    acc.mutable_at(i) = r.acc_reward;
    kl.mutable_at(i) = r.kl;
    reward.mutable_at(i) = r.reward;
    accumulated.mutable_at(i) = r.accumulated;
    grad.mutable_at(i) = r.grad_norm_sq;
  }
  py::dict d;
  d["step"] = step;
  d["sensitive"] = sensitive;
  d["action"] = action;
  d["acc_reward"] = acc;
  d["kl"] = kl;
  d["reward"] = reward;
  d["accumulated"] = accumulated;
  d["grad_norm_sq"] = grad;
  return d;
}

std::string report_repr(const EvaluationReport& r) {
  return "EvaluationReport(acc=" + fixed4(r.accuracy) + ", discr=" + fixed4(r.discrimination) +
         ", consist=" + fixed4(r.consistency) + ", delta=" + fixed4(r.delta) + ", n=" + std::to_string(r.n) + ")";
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fair classification with cooperative contextual bandits";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<Example>(m, "Example")
      .def(py::init<>())
      .def_readwrite("features", &Example::features)
      .def_readwrite("sensitive", &Example::sensitive)
      .def_readwrite("label", &Example::label)
      .def_readwrite("raw", &Example::raw)
      .def_readwrite("row", &Example::row);

  py::class_<FeatureSchema>(m, "FeatureSchema")
      .def_property_readonly("encoded_dim", &FeatureSchema::encoded_dim)
      .def("to_json", [](const FeatureSchema& s) { return schema_to_json(s); })
      .def_static("from_json", [](const std::string& text) { return schema_from_json(text); });

  py::class_<SplitDataset>(m, "SplitDataset")
      .def_readonly("train", &SplitDataset::train)
      .def_readonly("validation", &SplitDataset::validation)
      .def_readonly("test", &SplitDataset::test)
      .def_readonly("seed", &SplitDataset::seed);

  py::class_<PreparedData>(m, "PreparedData")
      .def_readonly("schema", &PreparedData::schema)
      .def_readonly("data", &PreparedData::data)
      .def_readonly("dropped", &PreparedData::dropped);

  m.def("load_dataset", &load_dataset, py::arg("csv"), py::arg("schema"), py::arg("seed"),
        "Read, split and encode a dataset; the encoding is fitted on the training part.");

  py::class_<TrainingConfig>(m, "TrainingConfig")
      .def(py::init([](double lambda, double alpha, std::size_t steps, std::size_t hidden_dim, std::uint64_t seed,
                       std::size_t checkpoint_every) {
             return TrainingConfig{lambda, alpha, steps, hidden_dim, seed, checkpoint_every};
           }),
           py::arg("lambda_") = 10.0, py::arg("alpha") = 1e-2, py::arg("steps") = 0, py::arg("hidden_dim") = 20,
           py::arg("seed") = 0, py::arg("checkpoint_every") = 0)
      .def_readwrite("lambda_", &TrainingConfig::lambda)
      .def_readwrite("alpha", &TrainingConfig::alpha)
      .def_readwrite("steps", &TrainingConfig::steps)
      .def_readwrite("hidden_dim", &TrainingConfig::hidden_dim)
      .def_readwrite("seed", &TrainingConfig::seed)
      .def_readwrite("checkpoint_every", &TrainingConfig::checkpoint_every)
      .def("resolved", [](const TrainingConfig& c, std::size_t n) { return resolve_config(c, n); }, py::arg("train_size"))
      .def(py::self == py::self);

  py::class_<CcbModel>(m, "CcbModel")
      .def_readonly("config", &CcbModel::config)
      .def_readonly("step", &CcbModel::step)
      .def("to_text", [](const CcbModel& c) { return checkpoint_to_text(c); })
      .def_static("from_text", [](const std::string& t) { return checkpoint_from_text(t); })
      .def(py::self == py::self);

  m.def("init_model", &init_model, py::arg("input_dim"), py::arg("config"));

  py::enum_<PredictMode>(m, "PredictMode")
      .value("original", PredictMode::original)
      .value("reversed", PredictMode::reversed)
      .value("model0", PredictMode::model0)
      .value("model1", PredictMode::model1);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("checkpoints", &TrainResult::checkpoints)
      .def_property_readonly("log", [](const TrainResult& r) { return log_columns(r.log); });

  m.def(
      "train",
      [](const std::vector<Example>& examples, const TrainingConfig& config) {
        py::gil_scoped_release release;
        return train(examples, resolve_config(config, examples.size()));
      },
      py::arg("examples"), py::arg("config"), "Train both bandits; unset steps and cadence take their defaults.");

  m.def(
      "predict",
      [](const CcbModel& model, const std::vector<Example>& examples, PredictMode mode) {
        return predict_all(model, examples, mode);
      },
      py::arg("model"), py::arg("examples"), py::arg("mode") = PredictMode::original);

  m.def("kl_divergence", [](std::array<double, 2> p, std::array<double, 2> q) {
    return kl_divergence(ActionDistribution{p}, ActionDistribution{q});
  });
  m.def("compute_reward", [](Action a, int label, std::array<double, 2> own, std::array<double, 2> other,
                             double lambda) {
    return compute_reward(a, label, ActionDistribution{own}, ActionDistribution{other}, lambda);
  });

  py::class_<EvaluationReport>(m, "EvaluationReport")
      .def_readonly("accuracy", &EvaluationReport::accuracy)
      .def_readonly("discrimination", &EvaluationReport::discrimination)
      .def_readonly("consistency", &EvaluationReport::consistency)
      .def_readonly("delta", &EvaluationReport::delta)
      .def_readonly("split", &EvaluationReport::split)
      .def_readonly("n", &EvaluationReport::n)
      .def_readonly("k", &EvaluationReport::k)
      .def("__repr__", &report_repr);

  py::class_<EvaluationSet>(m, "EvaluationSet")
      .def_readonly("name", &EvaluationSet::name)
      .def_property_readonly("size", [](const EvaluationSet& s) { return s.examples.size(); });

  m.def(
      "make_evaluation_set",
      [](std::string name, const std::vector<Example>& examples, const FeatureSchema& schema, std::size_t k,
         std::size_t jobs) { return make_evaluation_set(std::move(name), examples, schema, k, jobs); },
      py::arg("name"), py::arg("examples"), py::arg("schema"),
        py::arg("k") = kDefaultNeighbors, py::arg("jobs") = 1);
  m.def(
      "evaluate", [](const std::vector<Action>& preds, const EvaluationSet& set) { return evaluate(preds, set); },
      py::arg("predictions"), py::arg("set"));
  m.def("accuracy", [](const std::vector<Action>& p, const std::vector<int>& y) { return accuracy(p, y); });
  m.def("discrimination", [](const std::vector<Action>& p, const std::vector<int>& s) { return discrimination(p, s); });

  py::enum_<SelectionCriterion>(m, "SelectionCriterion")
      .value("discrimination", SelectionCriterion::discrimination)
      .value("delta", SelectionCriterion::delta);

  py::class_<Selection>(m, "Selection")
      .def_readonly("model", &Selection::model)
      .def_readonly("validation", &Selection::validation)
      .def_readonly("checkpoint_index", &Selection::checkpoint_index);

  m.def(
      "select_checkpoint",
      [](const std::vector<CcbModel>& cps, const EvaluationSet& validation, SelectionCriterion c) {
        return select_checkpoint(cps, validation, c);
      },
      py::arg("checkpoints"), py::arg("validation"), py::arg("criterion"));

  py::class_<GridPointResult>(m, "GridPointResult")
      .def_property_readonly("lambda_", [](const GridPointResult& p) { return p.point.lambda; })
      .def_property_readonly("hidden", [](const GridPointResult& p) { return p.point.hidden; })
      .def_property_readonly("seed", [](const GridPointResult& p) { return p.point.seed; })
      .def("selection", &GridPointResult::selection, py::arg("criterion"));

  py::class_<GridSearchResult>(m, "GridSearchResult")
      .def_readonly("points", &GridSearchResult::points)
      .def("ranking", &GridSearchResult::ranking)
      .def("best", &GridSearchResult::best, py::return_value_policy::reference_internal)
      .def("table_csv", [](const GridSearchResult& g, SelectionCriterion c) { return grid_table_csv(g, c); });

  m.def(
      "grid_search",
      [](const std::vector<Example>& train, const EvaluationSet& validation, std::vector<double> lambdas,
         std::vector<std::size_t> hidden, std::vector<std::uint64_t> seeds, const TrainingConfig& base,
         std::size_t jobs) {
        py::gil_scoped_release release;
        return grid_search(train, validation, {lambdas, hidden, seeds, base, jobs});
      },
      py::arg("train"), py::arg("validation"), py::arg("lambdas"), py::arg("hidden"), py::arg("seeds"),
      py::arg("base") = TrainingConfig{}, py::arg("jobs") = 1);

  m.def(
      "submodel_report",
      [](const CcbModel& model, const EvaluationSet& test) {
        const auto r = submodel_report(model, test);
        py::dict d;
        for (const auto& row : r.rows()) d[py::str(row.label)] = *row.report;
        return d;
      },
      py::arg("model"), py::arg("test"));

  py::class_<LrParameters>(m, "LrParameters")
      .def_readonly("weights", &LrParameters::weights)
      .def_readonly("bias", &LrParameters::bias);
  m.def(
      "fit_logistic",
      [](const std::vector<Example>& train, std::size_t epochs, double lr, double l2, std::uint64_t seed) {
        return fit_logistic(train, {epochs, lr, l2, seed});
      },
      py::arg("train"), py::arg("epochs") = 500, py::arg("learning_rate") = 1.0, py::arg("l2") = 1e-4,
      py::arg("seed") = 0);
  m.def(
      "predict_logistic",
      [](const LrParameters& p, const std::vector<Example>& xs) { return predict_logistic_all(p, xs); },
      py::arg("params"), py::arg("examples"));
}

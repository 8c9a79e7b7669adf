#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "coinfer/experiment.hpp"
#include "coinfer/huffman.hpp"
#include "coinfer/oracle.hpp"
#include "coinfer/quantization.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace coinfer;

namespace {

RewardParams reward_params(std::optional<double> n, double s, std::optional<double> t_ref,
                           double b_max, std::optional<double> budget,
                           std::optional<double> budget_factor) {
  RewardParams p;
  p.n = n;
  p.s_bps = s;
  p.t_ref_ms = t_ref;
  p.b_max_bps = b_max;
  p.energy_budget_j = budget;
  p.energy_budget_branch1_factor = budget_factor;
  return p;
}

std::vector<float> as_floats(const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
  return {a.data(), a.data() + a.size()};
}

py::dict step_info(const StepInfo& info) {
  return py::dict("action"_a = info.action, "result"_a = info.result, "invalid"_a = info.invalid,
                  "infeasible"_a = info.infeasible, "bandwidth_bps"_a = info.bandwidth_bps);
}

}  // namespace

PYBIND11_MODULE(_coinfer, m) {
  m.doc() = "Joint early-exit, partition and quantization decisions for device-edge inference";

  py::register_exception<ProfileError>(m, "ProfileError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<EvaluationError>(m, "EvaluationError", PyExc_ValueError);
  py::register_exception<HuffmanError>(m, "HuffmanError", PyExc_ValueError);

  py::enum_<ChannelMode>(m, "ChannelMode")
      .value("raw_rate", ChannelMode::kRawRate)
      .value("shannon", ChannelMode::kShannon);

  py::class_<Action>(m, "Action")
      .def(py::init<int, int, int>(), "ep"_a = 1, "pp"_a = 0, "bits"_a = 8)
      .def_readwrite("ep", &Action::ep)
      .def_readwrite("pp", &Action::pp)
      .def_readwrite("bits", &Action::bits)
      .def(py::self == py::self)
      .def("__repr__", [](const Action& a) { return "Action" + to_string(a); });

  py::class_<EvalResult>(m, "EvalResult")
      .def_readonly("device_latency_ms", &EvalResult::device_latency_ms)
      .def_readonly("transmission_latency_ms", &EvalResult::transmission_latency_ms)
      .def_readonly("edge_latency_ms", &EvalResult::edge_latency_ms)
      .def_readonly("latency_ms", &EvalResult::total_latency_ms)
      .def_readonly("compute_energy_j", &EvalResult::compute_energy_j)
      .def_readonly("transmission_energy_j", &EvalResult::transmission_energy_j)
      .def_readonly("energy_j", &EvalResult::total_energy_j)
      .def_readonly("accuracy", &EvalResult::accuracy)
      .def_readonly("transmitted_bytes", &EvalResult::transmitted_bytes);

  py::class_<ModelProfile>(m, "ModelProfile")
      .def_readonly("name", &ModelProfile::name)
      .def_property_readonly("layer_count",
                             [](const ModelProfile& p) { return p.topology.layers.size(); })
      .def_property_readonly("exits", [](const ModelProfile& p) {
        py::list out;
        for (const auto& e : p.topology.exits) {
          out.append(py::dict("id"_a = e.id, "layer_count"_a = e.layer_count,
                              "accuracy"_a = e.accuracy));
        }
        return out;
      });

  m.def("load_profile", &load_profile, "path"_a);
  m.def("validate_profile", [](const ModelProfile& p) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& v : validate_profile(p)) out.emplace_back(v.field, v.message);
    return out;
  });

  py::class_<SystemModel, std::shared_ptr<SystemModel>>(m, "SystemModel")
      .def(py::init([](const ModelProfile& p, std::vector<int> bits) {
             return std::make_shared<SystemModel>(p, SystemOptions{.bits_set = std::move(bits)});
           }),
           "profile"_a, "bits"_a = std::vector<int>{8, 12, 16})
      .def_property_readonly("profile", &SystemModel::profile)
      .def("is_valid", &SystemModel::is_valid)
      .def("enumerate_actions", &SystemModel::enumerate_actions)
      .def("transmitted_bytes", &SystemModel::transmitted_bytes)
      .def(
          "evaluate",
          [](const SystemModel& sm, const Action& a, double bandwidth, ChannelMode mode) {
            return sm.evaluate(a, make_channel(sm.profile().device, bandwidth, mode));
          },
          "action"_a, "bandwidth_bps"_a, "mode"_a = ChannelMode::kRawRate)
      .def_property_readonly("on_device_action", &SystemModel::on_device_action)
      .def_property_readonly("on_device_latency_ms", &SystemModel::on_device_latency_ms);

  m.def(
      "oracle_best",
      [](const SystemModel& sm, double bandwidth, ChannelMode mode, std::optional<double> n,
         double s, std::optional<double> t_ref, double b_max, std::optional<double> budget,
         std::optional<double> budget_factor) {
        const RewardConfig rc =
            make_reward_config(sm, reward_params(n, s, t_ref, b_max, budget, budget_factor));
        const OracleDecision d =
            oracle_best(sm, make_channel(sm.profile().device, bandwidth, mode), rc);
        return py::make_tuple(d.action, d.reward, d.result);
      },
      "model"_a, "bandwidth_bps"_a, "mode"_a = ChannelMode::kRawRate, "n"_a = py::none(),
      "s"_a = 1e6, "t_ref_ms"_a = py::none(), "b_max"_a = 1e7, "energy_budget_j"_a = py::none(),
      "energy_budget_factor"_a = py::none(),
      "Exhaustive best action; returns (action, reward, result)");

  m.def(
      "quantize",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& x, int bits) {
        const QuantizedTensor q = quantize(as_floats(x), bits);
        return py::make_tuple(py::array_t<std::uint32_t>(q.symbols.size(), q.symbols.data()),
                              q.min, q.max);
      },
      "x"_a, "bits"_a, "Min-max quantization; returns (symbols, min, max)");
  m.def(
      "dequantize",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& x, int bits) {
        const auto y = dequantize(quantize(as_floats(x), bits));
        return py::array_t<double>(y.size(), y.data());
      },
      "x"_a, "bits"_a, "Quantize then reconstruct");
  m.def(
      "compressed_size",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& x, int bits) {
        return compressed_size(as_floats(x), bits);
      },
      "x"_a, "bits"_a);
  m.def("synthetic_feature_map", [](std::size_t n, double sparsity, std::uint64_t seed) {
    const auto v = synthetic_feature_map(n, sparsity, seed);
    return py::array_t<float>(v.size(), v.data());
  });

  m.def(
      "huffman_encode",
      [](const std::vector<std::uint32_t>& symbols) {
        const HuffmanCode c = huffman_encode(symbols);
        return py::make_tuple(py::bytes(reinterpret_cast<const char*>(c.payload.data()),
                                        c.payload.size()),
                              c.bit_length);
      },
      "symbols"_a, "Returns (payload, bit_length)");
  m.def("huffman_roundtrip", [](const std::vector<std::uint32_t>& symbols) {
    return huffman_decode(huffman_encode(symbols));
  });

  py::class_<Environment>(m, "Environment")
      .def(py::init([](const std::string& config_json) {
             const ExperimentConfig c = config_from_json(nlohmann::json::parse(config_json));
             return std::make_unique<Environment>(make_model(c), make_env_config(c));
           }),
           "config_json"_a = "{}")
      .def("reset",
           [](Environment& env) {
             env.reset();
             return env.observation();
           })
      .def("step",
           [](Environment& env, std::size_t action) {
             const StepResult r = env.step(action);
             return py::make_tuple(env.observation(), r.reward, r.done, step_info(r.info));
           })
      .def_property_readonly("action_count",
                             [](const Environment& env) { return env.action_space().size(); })
      .def_property_readonly("action_mask",
                             [](const Environment& env) { return env.action_space().mask(); })
      .def("action_at", [](const Environment& env, std::size_t i) {
        return env.action_space().action_at(i);
      });

  m.def(
      "train",
      [](const std::string& config_json) {
        const ExperimentConfig c = config_from_json(nlohmann::json::parse(config_json));
        const auto model = make_model(c);
        Environment env(model, make_env_config(c));
        std::vector<std::string> metrics{kMetricsHeader};
        const MetricsSink sink = [&](const MetricsRow& r) { metrics.push_back(format_metrics_row(r)); };
        std::optional<AnyAgent> agent;
        {
          py::gil_scoped_release release;
          if (c.agent == "sac") {
            SacAgent a(env.action_space().mask(), make_sac_config(c));
            train_sac(env, a, make_train_config(c), sink);
            agent.emplace(std::move(a));
          } else {
            DqnAgent a(env.action_space().mask(), make_dqn_config(c));
            train_dqn(env, a, make_train_config(c), sink);
            agent.emplace(std::move(a));
          }
        }
        return py::make_tuple(checkpoint_to_json(*agent, *model).dump(), metrics);
      },
      "config_json"_a, "Train the configured agent; returns (checkpoint_json, metrics_csv_lines)");

  m.def(
      "sweep",
      [](const std::string& config_json, const std::vector<std::string>& checkpoints) {
        const ExperimentConfig c = config_from_json(nlohmann::json::parse(config_json));
        const auto model = make_model(c);
        std::vector<AnyAgent> agents;
        agents.reserve(checkpoints.size());
        std::vector<SweepAgent> entries;
        for (const auto& ck : checkpoints) {
          const auto doc = nlohmann::json::parse(ck);
          check_compatible(doc, *model);
          agents.push_back(checkpoint_from_json(doc));
        }
        for (const auto& a : agents) entries.push_back({agent_name(a), greedy_policy(a)});
        std::vector<SweepRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_sweep(model, make_env_config(c), c.sweep.grid_bps, entries,
                           c.sweep.settle_steps, c.sweep.threads);
        }
        std::vector<std::string> out{kSweepHeader};
        for (const auto& r : rows) out.push_back(format_sweep_row(r));
        return out;
      },
      "config_json"_a, "checkpoints"_a = std::vector<std::string>{},
      "Sweep CSV lines for the oracle, the given checkpoints and on-device");
}

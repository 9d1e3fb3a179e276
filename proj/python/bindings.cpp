#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mtrl/experiments.hpp"
#include "mtrl/omerm.hpp"
#include "mtrl/pce.hpp"

namespace py = pybind11;
using namespace mtrl;

namespace {

EnvHandle env_from_json(const std::string& mdp_json, std::uint64_t master,
                        std::uint64_t sid) {
  auto m = std::make_shared<TabularMdp>(mdp_from_json(mdp_json));
  return EnvHandle(std::move(m), derive_stream(master, sid));
}

}  // namespace

PYBIND11_MODULE(mtrl, m) {
  m.doc() = "simulation lab for multi-task tabular RL pre-training and "
            "fine-tuning";
  m.attr("__version__") = kVersion;

  m.def("stream_u64",
        [](std::uint64_t master, std::uint64_t sid, int n) {
          RandomStream s = derive_stream(master, sid);
          std::vector<std::uint64_t> out;
          for (int i = 0; i < n; ++i) out.push_back(s.next_u64());
          return out;
        },
        py::arg("master_seed"), py::arg("stream_id"), py::arg("n"),
        "first n raw outputs of the derived stream");

  m.def("complexity", &complexity_from_probs, py::arg("probs"),
        py::arg("delta"),
        "size of the smallest sub-support with probability >= 1-delta");

  m.def("validate_mdp_json",
        [](const std::string& text) {
          ValidationReport r = validate_mdp(mdp_from_json(text));
          return py::make_tuple(r.ok, r.u1, r.errors);
        },
        py::arg("mdp_json"), "(ok, u1_bound, errors) for an MDP document");

  m.def("optimal_value",
        [](const std::string& text) {
          TabularMdp mdp = mdp_from_json(text);
          return optimal_policy(mdp).second.v(0, mdp.s1);
        },
        py::arg("mdp_json"), "optimal start value of an MDP document");

  m.def("random_tabular_json",
        [](int S, int A, int H, int num_mdps, std::uint64_t master_seed) {
          RandomStream rng =
              derive_stream(master_seed, stream_id(streams::kInstanceGen));
          return distribution_to_json(
              gen_random_tabular(S, A, H, num_mdps, rng), 2);
        },
        py::arg("S"), py::arg("A"), py::arg("H"), py::arg("num_mdps"),
        py::arg("master_seed"), "random task distribution as JSON");

  m.def("theorem3_json",
        [](int M, double gap) {
          return distribution_to_json(gen_theorem3_instance(M, gap), 2);
        },
        py::arg("M"), py::arg("gap"));

  m.def("pretrain_json",
        [](const std::string& dist_json, std::uint64_t K, bool white_box,
           std::uint64_t master_seed, int n_cap) {
          MdpDistribution d = distribution_from_json(dist_json);
          PretrainOptions opt;
          opt.K = K;
          opt.n_cap = n_cap;
          OracleSettings oracle;
          oracle.white_box = white_box;
          RandomStream rng =
              derive_stream(master_seed, stream_id(streams::kPretrain));
          return pvset_to_json(pretrain(d, opt, oracle, rng), 2);
        },
        py::arg("dist_json"), py::arg("K"), py::arg("white_box") = true,
        py::arg("master_seed") = 1, py::arg("n_cap") = 0,
        "policy-value set (JSON) pre-trained at delta=epsilon=1/sqrt(K)");

  m.def("finetune_total_regret",
        [](const std::string& pvset_json, const std::string& mdp_json,
           std::uint64_t K, std::uint64_t master_seed) {
          PolicyValueSet set = pvset_from_json(pvset_json);
          EnvHandle env = env_from_json(mdp_json, master_seed,
                                        stream_id(streams::kTestEnv));
          double d = 1.0 / std::sqrt(double(K));
          FinetuneResult fr = finetune(set, env, K, d, d);
          return py::make_tuple(fr.total_regret, fr.events.size(),
                                fr.fallback);
        },
        py::arg("pvset_json"), py::arg("mdp_json"), py::arg("K"),
        py::arg("master_seed") = 1,
        "(total_regret, eliminations, fell_back) on one task");

  m.def("ucb",
        [](const std::vector<double>& means, double sigma, std::uint64_t T,
           std::uint64_t master_seed) {
          BanditInstance b{means, sigma};
          RandomStream rng =
              derive_stream(master_seed, stream_id(streams::kBandit));
          PullRecord rec = ucb_run(b, T, rng);
          py::dict out;
          out["counts"] = rec.counts;
          out["pseudo_regret"] = pseudo_regret(rec, b);
          out["bound"] = ucb_regret_bound(b.arms(), T);
          return out;
        },
        py::arg("means"), py::arg("sigma"), py::arg("T"),
        py::arg("master_seed") = 1);

  m.def("run_experiment",
        [](const std::string& config_json,
           const std::vector<std::string>& overrides) {
          ExperimentConfig cfg = config_from_json_text(config_json, overrides);
          RunResult res = run(cfg);
          py::dict files;
          for (const auto& f : res.files)
            files[py::str(f.name)] = py::bytes(f.bytes);
          py::dict out;
          out["files"] = files;
          out["deviations"] = res.deviations;
          out["notes"] = res.notes;
          return out;
        },
        py::arg("config_json"),
        py::arg("overrides") = std::vector<std::string>{},
        "run an experiment config in memory; files come back as bytes");

  m.def("report", &report_text, py::arg("csv_paths"),
        "aggregate output CSVs into the summary table");
}

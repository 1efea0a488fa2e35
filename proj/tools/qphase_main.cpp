// Command-line front end: generate / rank / train / sweep / diagram, all
// driven by one JSON config with targeted flag overrides. Errors leave as a
// machine-readable JSON object on stderr with a nonzero exit code.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "qphase/pipeline.hpp"

namespace {

// every override flag; "was it passed?" is answered by the CLI11 option count
struct Overrides {
  std::string config_path;
  int n_sites = 0;
  double grid_step = 0.0;
  std::string algorithm;
  int k_features = 0;
  uint64_t seed_split = 0, seed_shap = 0, seed_vqc = 0;
  double svm_c = 0.0, svm_gamma = 0.0;
  int reps = 0, layers = 0, shots = 0, iterations = 0;
  int background = 0, explain = 0;
  long coalitions = 0;
  int explain_label = 0, output_label = 0;
  int threads = 0;
  std::string out_dir, dataset, report, model;

  CLI::Option *o_n_sites = nullptr, *o_grid_step = nullptr, *o_algorithm = nullptr,
              *o_k = nullptr, *o_seed_split = nullptr, *o_seed_shap = nullptr,
              *o_seed_vqc = nullptr, *o_svm_c = nullptr, *o_svm_gamma = nullptr,
              *o_reps = nullptr, *o_layers = nullptr, *o_shots = nullptr,
              *o_iterations = nullptr, *o_background = nullptr, *o_explain = nullptr,
              *o_coalitions = nullptr, *o_explain_label = nullptr, *o_output_label = nullptr,
              *o_threads = nullptr, *o_out_dir = nullptr,
              *o_dataset = nullptr, *o_report = nullptr, *o_model = nullptr;
};

void attach_common(CLI::App* sub, Overrides& ov) {
  sub->add_option("--config", ov.config_path, "JSON config file; flags override its values");
  ov.o_n_sites = sub->add_option("--n-sites", ov.n_sites, "chain length (even, 4-14)");
  ov.o_grid_step = sub->add_option("--grid-step", ov.grid_step, "(kappa, g) grid step");
  ov.o_algorithm = sub->add_option("--algorithm", ov.algorithm, "svc | qsvm | vqc");
  ov.o_k = sub->add_option("--k", ov.k_features, "number of top-ranked features");
  ov.o_seed_split = sub->add_option("--seed-split", ov.seed_split, "train/test split seed");
  ov.o_seed_shap = sub->add_option("--seed-shap", ov.seed_shap, "attribution sampling seed");
  ov.o_seed_vqc = sub->add_option("--seed-vqc", ov.seed_vqc, "variational training seed");
  ov.o_svm_c = sub->add_option("--svm-c", ov.svm_c, "SVM regularization C");
  ov.o_svm_gamma = sub->add_option("--svm-gamma", ov.svm_gamma, "RBF gamma (0 = 1/(d*var))");
  ov.o_reps = sub->add_option("--reps", ov.reps, "feature-map repetitions");
  ov.o_layers = sub->add_option("--layers", ov.layers, "ansatz entangling layers");
  ov.o_shots = sub->add_option("--shots", ov.shots, "measurement shots (<= 0: exact)");
  ov.o_iterations = sub->add_option("--iterations", ov.iterations, "SPSA iterations");
  ov.o_background = sub->add_option("--background", ov.background, "attribution background rows");
  ov.o_explain = sub->add_option("--explain", ov.explain, "rows to explain");
  ov.o_coalitions = sub->add_option("--coalitions", ov.coalitions,
                                    "coalition sample budget (0 = auto)");
  ov.o_explain_label = sub->add_option("--explain-label", ov.explain_label,
                                       "class label of the explained rows (-1 = all)");
  ov.o_output_label = sub->add_option("--output-label", ov.output_label,
                                      "class label whose probability is explained");
  ov.o_threads = sub->add_option("--threads", ov.threads, "worker threads (0 = hardware)");
  ov.o_out_dir = sub->add_option("--out-dir", ov.out_dir, "artifact directory");
  ov.o_dataset = sub->add_option("--dataset", ov.dataset, "dataset CSV path");
  ov.o_report = sub->add_option("--report", ov.report, "feature report JSON path");
  ov.o_model = sub->add_option("--model", ov.model, "model artifact JSON path");
}

qphase::ExperimentConfig resolve_config(const Overrides& ov) {
  qphase::ExperimentConfig cfg;
  if (!ov.config_path.empty()) cfg = qphase::load_config(ov.config_path);
  if (*ov.o_n_sites) cfg.n_sites = ov.n_sites;
  if (*ov.o_grid_step) cfg.grid_step = ov.grid_step;
  if (*ov.o_algorithm) cfg.algorithm = ov.algorithm;
  if (*ov.o_k) cfg.k_features = ov.k_features;
  if (*ov.o_seed_split) cfg.seed_split = ov.seed_split;
  if (*ov.o_seed_shap) cfg.seed_shap = ov.seed_shap;
  if (*ov.o_seed_vqc) cfg.seed_vqc = ov.seed_vqc;
  if (*ov.o_svm_c) cfg.svm_c = ov.svm_c;
  if (*ov.o_svm_gamma) cfg.svm_gamma = ov.svm_gamma;
  if (*ov.o_reps) cfg.feature_map_reps = ov.reps;
  if (*ov.o_layers) cfg.ansatz_layers = ov.layers;
  if (*ov.o_shots) cfg.shots = ov.shots;
  if (*ov.o_iterations) cfg.spsa_iterations = ov.iterations;
  if (*ov.o_background) cfg.shap_background_rows = ov.background;
  if (*ov.o_explain) cfg.shap_explain_rows = ov.explain;
  if (*ov.o_coalitions) cfg.shap_coalition_samples = ov.coalitions;
  if (*ov.o_explain_label) cfg.shap_explain_label = ov.explain_label;
  if (*ov.o_output_label) cfg.shap_output_label = ov.output_label;
  if (*ov.o_threads) cfg.threads = ov.threads;
  if (*ov.o_out_dir) cfg.out_dir = ov.out_dir;
  if (*ov.o_dataset) cfg.dataset_path = ov.dataset;
  if (*ov.o_report) cfg.report_path = ov.report;
  if (*ov.o_model) cfg.model_path = ov.model;
  cfg.validate();
  return cfg;
}

void fail_json(const std::string& command, const std::string& message) {
  qphase::Json err;
  err["error"] = qphase::Json{{"command", command}, {"message", message}};
  std::cerr << err.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ANNNI phase classification pipeline"};
  app.require_subcommand(1);

  Overrides ov_generate, ov_rank, ov_train, ov_sweep, ov_diagram;
  CLI::App* c_generate = app.add_subcommand("generate", "solve the (kappa, g) grid into a CSV");
  CLI::App* c_rank = app.add_subcommand("rank", "rank features by attribution importance");
  CLI::App* c_train = app.add_subcommand("train", "train a classifier on the top-k features");
  CLI::App* c_sweep = app.add_subcommand("sweep", "accuracy of both quantum models across k");
  CLI::App* c_diagram = app.add_subcommand("diagram", "predict the full grid with a stored model");
  attach_common(c_generate, ov_generate);
  attach_common(c_rank, ov_rank);
  attach_common(c_train, ov_train);
  attach_common(c_sweep, ov_sweep);
  attach_common(c_diagram, ov_diagram);

  int k_min = 2, k_max = 8;
  c_sweep->add_option("--k-min", k_min, "smallest feature count");
  c_sweep->add_option("--k-max", k_max, "largest feature count");

  std::string command = "parse";
  try {
    app.parse(argc, argv);

    if (c_generate->parsed()) {
      command = "generate";
      const auto out = qphase::cmd_generate(resolve_config(ov_generate));
      std::cout << "wrote " << out.dataset_path << " (" << out.rows << " rows x " << out.features
                << " features, " << out.wall_seconds << " s)\n";
    } else if (c_rank->parsed()) {
      command = "rank";
      const auto out = qphase::cmd_rank(resolve_config(ov_rank));
      std::cout << "wrote " << out.report_path << " and " << out.plot_csv_path << " ("
                << out.wall_seconds << " s)\n";
      std::cout << "top features:";
      const std::size_t top = std::min<std::size_t>(5, out.report.ranking.size());
      for (std::size_t i = 0; i < top; ++i) {
        std::cout << ' ' << out.feature_names[static_cast<std::size_t>(out.report.ranking[i])];
      }
      std::cout << '\n';
    } else if (c_train->parsed()) {
      command = "train";
      const auto out = qphase::cmd_train(resolve_config(ov_train));
      std::printf("accuracy %.4f; wrote %s and %s (%.1f s)\n", out.outcome.accuracy,
                  out.result_path.c_str(), out.model_path.c_str(), out.wall_seconds);
    } else if (c_sweep->parsed()) {
      command = "sweep";
      const auto out = qphase::cmd_sweep(resolve_config(ov_sweep), k_min, k_max);
      std::cout << "wrote " << out.csv_path << " (" << out.rows.size() << " rows, "
                << out.wall_seconds << " s)\n";
    } else if (c_diagram->parsed()) {
      command = "diagram";
      const auto out = qphase::cmd_diagram(resolve_config(ov_diagram));
      std::printf("wrote %s (%ld/%ld grid points misclassified, %.1f s)\n", out.csv_path.c_str(),
                  out.misclassified, out.total, out.wall_seconds);
    }
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail_json(command, std::string("argument error: ") + e.what());
    return 2;
  } catch (const std::exception& e) {
    fail_json(command, e.what());
    return 1;
  }
}

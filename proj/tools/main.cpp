#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "adaptqp/adapt.hpp"
#include "adaptqp/dataio.hpp"
#include "adaptqp/errors.hpp"
#include "adaptqp/harness.hpp"
#include "adaptqp/oracle.hpp"

namespace {

using namespace adaptqp;

harness::ReportFormat format_for(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
    return harness::ReportFormat::Csv;
  }
  return harness::ReportFormat::Json;
}

io::FileFormat file_format_for(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
    return io::FileFormat::Csv;
  }
  return io::FileFormat::SvmLight;
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  const std::size_t dot = path.find_last_of('.');
  if (dot == std::string::npos || path.find('/', dot) != std::string::npos) {
    return path + suffix;
  }
  return path.substr(0, dot) + suffix + path.substr(dot);
}

struct RunArgs {
  std::string setting = "mmdtl2";
  std::string source, target;
  std::string synthetic;
  std::vector<int> dims = {32, 64, 128, 256};  // default sweep grid
  int folds = 10;
  std::uint64_t seed = 0;
  double cs = 1.0, ct = 1.0, d = 1.0;
  std::string out;
  bool grid = false;
  bool mmdt_augmented = true;
};

std::vector<harness::ReportRow> run_once(const RunArgs& args, double cs,
                                         double ct, double d) {
  harness::ExperimentConfig cfg;
  cfg.setting = harness::setting_from_string(args.setting);
  cfg.folds = args.folds;
  cfg.seed = args.seed;
  cfg.hyperparams.c_source = cs;
  cfg.hyperparams.c_target = ct;
  cfg.hyperparams.d_weight = d;
  cfg.mmdt_augmented = args.mmdt_augmented;
  cfg.synthetic = args.synthetic;
  cfg.source_path = args.source;
  cfg.target_path = args.target;
  if (!args.source.empty()) cfg.file_format = file_format_for(args.source);

  std::vector<harness::ReportRow> rows;
  if (cfg.synthetic == "shifted") {
    for (int dim : args.dims) {
      cfg.dim = dim;
      auto dim_rows = harness::run_setting(cfg);
      rows.insert(rows.end(), dim_rows.begin(), dim_rows.end());
    }
  } else {
    auto one = harness::run_setting(cfg);
    rows.insert(rows.end(), one.begin(), one.end());
  }
  return rows;
}

void emit_rows(const std::vector<harness::ReportRow>& rows,
               const std::string& out) {
  if (out.empty()) {
    std::cout << harness::report_to_string(rows, harness::ReportFormat::Json);
  } else {
    harness::emit_report(rows, format_for(out), out);
    std::cout << "wrote " << rows.size() << " rows to " << out << "\n";
  }
}

int cmd_run(const RunArgs& args) {
  if (!args.grid) {
    emit_rows(run_once(args, args.cs, args.ct, args.d), args.out);
    return 0;
  }
  // reporting sweep over penalty and distance weights; one output per combo
  const std::vector<double> c_grid = {0.1, 1.0, 10.0};
  const std::vector<double> d_grid = {0.01, 0.1, 1.0, 10.0};
  for (double c : c_grid) {
    for (double d : d_grid) {
      auto rows = run_once(args, c, c, d);
      char suffix[64];
      std::snprintf(suffix, sizeof(suffix), "-c%g-d%g", c, d);
      const std::string out =
          args.out.empty() ? "" : with_suffix(args.out, suffix);
      double mean = 0.0;
      for (const auto& r : rows) mean += r.accuracy;
      mean /= static_cast<double>(rows.size());
      std::cout << "c=" << c << " d=" << d << " mean accuracy " << mean
                << "\n";
      emit_rows(rows, out);
    }
  }
  return 0;
}

int cmd_bench(const std::vector<int>& dims, int n_t, int n_s,
              std::uint64_t seed, int repeats, const std::string& out) {
  auto rows = harness::benchmark_primal_vs_dual(dims, n_t, n_s, seed, repeats);
  if (out.empty()) {
    std::cout << harness::bench_to_string(rows, harness::ReportFormat::Csv);
  } else {
    harness::emit_bench(rows, format_for(out), out);
    std::cout << "wrote " << rows.size() << " rows to " << out << "\n";
  }
  return 0;
}

// Small randomized certification pass over the production path: structural
// identities against the materialized system, dual-vs-primal agreement and a
// first-order audit of each converged solve.
int cmd_audit(std::uint64_t seed, int instances) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> dim_pick(2, 4);
  std::uniform_int_distribution<int> count_pick(3, 8);
  const std::vector<double> d_grid = {0.0, 0.1, 1.0, 10.0};

  bool all_passed = true;
  for (int t = 0; t < instances; ++t) {
    const int m_s = dim_pick(rng), m_t = dim_pick(rng);
    const int n_s = count_pick(rng) + 2, n_t = count_pick(rng);
    const double d = d_grid[static_cast<std::size_t>(t) % d_grid.size()];

    Dataset source, target;
    source.domain = Domain::Source;
    source.features.resize(n_s, m_s);
    for (Eigen::Index i = 0; i < source.features.size(); ++i) {
      source.features.data()[i] = gauss(rng);
    }
    target.domain = Domain::Target;
    target.features.resize(n_t, m_t);
    for (Eigen::Index i = 0; i < target.features.size(); ++i) {
      target.features.data()[i] = gauss(rng);
    }
    for (int i = 0; i < n_s; ++i) source.labels.push_back(1 + i % 2);
    for (int i = 0; i < n_t; ++i) target.labels.push_back(1 + i % 2);

    SvmModel model =
        train_ovr(source.features, source.labels, Vector::Constant(n_s, 1.0));
    PairWeights pw = compute_pair_weights(source.labels, target.labels,
                                          PairWeightMode::ClassNormalized);
    HyperParams hp;
    hp.d_weight = d;

    // structural identity of the materialized system vs the block form
    const Matrix full_v =
        oracle::materialize_full_v(target.features, pw, d, m_s);
    const Matrix b = compute_v_block(target.features, pw, d);
    double v_err = 0.0;
    for (int r = 0; r < m_s; ++r) {
      Matrix block = full_v.block(r * m_t, r * m_t, m_t, m_t);
      v_err = std::max(v_err, (block - b).cwiseAbs().maxCoeff());
    }

    WStepResult step = mmdtl2_w_step(source, target, model, pw, hp, false,
                                     1e-9);
    const TransformMatrix w_ref =
        oracle::primal_reference(source, target, model, pw, hp);
    const double w_err = (step.transform.w - w_ref.w).norm() /
                         (1.0 + w_ref.w.norm());
    oracle::AuditReport report = oracle::audit_solution(
        source, target, model, pw, hp, step.transform, step.qp.solution);

    const bool ok = v_err <= 1e-12 && w_err <= 1e-4 && report.passed;
    all_passed = all_passed && ok;
    std::printf(
        "[%s] instance %d (m_s=%d m_t=%d n_t=%d d=%g): block identity %.2e, "
        "dual-vs-primal %.2e, kkt %.2e, gap %.2e\n",
        ok ? "pass" : "FAIL", t, m_s, m_t, n_t, d, v_err, w_err,
        report.kkt_residual, report.duality_gap);
    if (!ok) std::cout << report.to_json() << "\n";
  }
  std::printf("audit %s\n", all_passed ? "passed" : "FAILED");
  return all_passed ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Domain-transfer estimation and benchmark harness"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand(
      "run", "Paired k-fold cross-validation for one experiment setting");
  run->add_option("--setting", run_args.setting,
                  "baseline|source-only|not-transfer|mmdt|mmdtl2")
      ->required();
  run->add_option("--source", run_args.source, "source dataset (.csv or svmlight)");
  run->add_option("--target", run_args.target, "target dataset");
  run->add_option("--synthetic", run_args.synthetic,
                  "generate data instead: shifted|toy");
  run->add_option("--dims", run_args.dims,
                  "feature dimensions for --synthetic shifted")
      ->delimiter(',');
  run->add_option("--folds", run_args.folds, "cross-validation folds");
  run->add_option("--seed", run_args.seed, "random seed");
  run->add_option("--cs", run_args.cs, "source slack penalty");
  run->add_option("--ct", run_args.ct, "target slack penalty");
  run->add_option("--d", run_args.d, "distance-term weight");
  run->add_option("--out", run_args.out, "report path (.json or .csv)");
  run->add_flag("--grid", run_args.grid,
                "sweep penalties {0.1,1,10} x distance weights {0.01,0.1,1,10}");
  run->add_flag("!--no-mmdt-augment", run_args.mmdt_augmented,
                "drop the learned translation column in mmdt");

  std::vector<int> bench_dims = {16, 32, 64};
  int bench_nt = 180, bench_ns = 400, bench_repeats = 3;
  std::uint64_t bench_seed = 0;
  std::string bench_out;
  CLI::App* bench = app.add_subcommand(
      "bench", "Time one transform step through the primal and dual paths");
  bench->add_option("--dims", bench_dims, "feature dimensions")->delimiter(',');
  bench->add_option("--nt", bench_nt, "total target samples");
  bench->add_option("--ns", bench_ns, "total source samples");
  bench->add_option("--seed", bench_seed, "random seed");
  bench->add_option("--repeats", bench_repeats, "timing repeats (median)");
  bench->add_option("--out", bench_out, "timing table path (.csv or .json)");

  std::uint64_t audit_seed = 0;
  int audit_instances = 12;
  CLI::App* audit = app.add_subcommand(
      "audit", "Certify the production path against brute-force references");
  audit->add_option("--seed", audit_seed, "random seed");
  audit->add_option("--instances", audit_instances, "number of random instances");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(run_args);
    if (bench->parsed()) {
      return cmd_bench(bench_dims, bench_nt, bench_ns, bench_seed,
                       bench_repeats, bench_out);
    }
    if (audit->parsed()) return cmd_audit(audit_seed, audit_instances);
    return 1;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

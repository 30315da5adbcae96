#include "adaptqp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "adaptqp/errors.hpp"
#include "adaptqp/svm.hpp"

namespace adaptqp::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

Dataset take_rows(const Dataset& ds, const std::vector<int>& idx) {
  Dataset out;
  out.domain = ds.domain;
  out.features.resize(static_cast<Eigen::Index>(idx.size()), ds.dim());
  out.labels.reserve(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = ds.features.row(idx[i]);
    out.labels.push_back(ds.labels[static_cast<std::size_t>(idx[i])]);
  }
  return out;
}

std::vector<int> complement_rows(const PairedFolds& folds, bool source,
                                 int held_out) {
  std::vector<int> idx;
  const auto& all = source ? folds.source_folds : folds.target_folds;
  for (std::size_t f = 0; f < all.size(); ++f) {
    if (static_cast<int>(f) == held_out) continue;
    idx.insert(idx.end(), all[f].begin(), all[f].end());
  }
  std::sort(idx.begin(), idx.end());
  return idx;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

std::string format_cell(double v) {
  if (std::isnan(v)) return "n/a";
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

std::string to_string(Setting s) {
  switch (s) {
    case Setting::Baseline: return "baseline";
    case Setting::SourceOnly: return "source-only";
    case Setting::NotTransfer: return "not-transfer";
    case Setting::Mmdt: return "mmdt";
    case Setting::Mmdtl2: return "mmdtl2";
  }
  return "unknown";
}

Setting setting_from_string(const std::string& name) {
  if (name == "baseline") return Setting::Baseline;
  if (name == "source-only") return Setting::SourceOnly;
  if (name == "not-transfer") return Setting::NotTransfer;
  if (name == "mmdt") return Setting::Mmdt;
  if (name == "mmdtl2") return Setting::Mmdtl2;
  throw std::invalid_argument("unknown setting '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (folds < 2) throw std::invalid_argument("ExperimentConfig: folds must be >= 2");
  hyperparams.validate();
  if (!synthetic.empty() && synthetic != "shifted" && synthetic != "toy") {
    throw std::invalid_argument(
        "ExperimentConfig: synthetic must be 'shifted' or 'toy'");
  }
  if (synthetic.empty() && source_path.empty()) {
    throw std::invalid_argument(
        "ExperimentConfig: need a source path or a synthetic recipe");
  }
  if (synthetic == "shifted" && dim < 2) {
    throw std::invalid_argument("ExperimentConfig: synthetic dim must be >= 2");
  }
  if (synthetic.empty()) {
    for (const std::string& path : {source_path, target_path}) {
      if (!path.empty() && !std::filesystem::exists(path)) {
        throw std::invalid_argument("ExperimentConfig: no such file: " + path);
      }
    }
  }
}

PairedFolds kfold_split(const Dataset& source, const Dataset& target,
                        int folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("kfold_split: folds must be >= 2");
  source.validate();
  target.validate();

  auto split_domain = [&](const Dataset& ds) {
    std::map<int, std::vector<int>> by_class;
    for (Eigen::Index i = 0; i < ds.n_samples(); ++i) {
      by_class[ds.labels[static_cast<std::size_t>(i)]].push_back(
          static_cast<int>(i));
    }
    std::vector<std::vector<int>> out(static_cast<std::size_t>(folds));
    for (auto& [cls, idx] : by_class) {
      if (static_cast<int>(idx.size()) < folds) {
        throw std::invalid_argument(
            "kfold_split: class " + std::to_string(cls) + " has only " +
            std::to_string(idx.size()) + " samples in the " +
            adaptqp::to_string(ds.domain) + " domain, need >= " +
            std::to_string(folds));
      }
      // stream depends on (seed, class) only, so equal datasets fold equally
      std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(cls)));
      std::shuffle(idx.begin(), idx.end(), rng);
      for (std::size_t p = 0; p < idx.size(); ++p) {
        out[p % static_cast<std::size_t>(folds)].push_back(idx[p]);
      }
    }
    for (auto& fold : out) std::sort(fold.begin(), fold.end());
    return out;
  };

  PairedFolds pf;
  pf.source_folds = split_domain(source);
  pf.target_folds = split_domain(target);
  return pf;
}

namespace {

struct FoldOutcome {
  double accuracy = 0.0;
  double train_seconds = 0.0;
  double eval_seconds = 0.0;
};

FoldOutcome run_fold(const ExperimentConfig& cfg, const Dataset& source,
                     const Dataset& target, const PairedFolds& folds,
                     int fold) {
  const HyperParams& hp = cfg.hyperparams;
  FoldOutcome out;
  const auto train_start = Clock::now();

  const std::vector<int> source_train = complement_rows(folds, true, fold);
  const std::vector<int> target_train = complement_rows(folds, false, fold);

  switch (cfg.setting) {
    case Setting::Baseline: {
      Dataset train = take_rows(source, source_train);
      SvmModel model =
          train_ovr(train.features, train.labels,
                    Vector::Constant(train.n_samples(), hp.c_source));
      out.train_seconds = seconds_since(train_start);
      const auto eval_start = Clock::now();
      Dataset test = take_rows(source, folds.source_folds[fold]);
      out.accuracy = accuracy(model, test.features, test.labels);
      out.eval_seconds = seconds_since(eval_start);
      break;
    }
    case Setting::SourceOnly: {
      if (source.dim() != target.dim()) {
        throw std::invalid_argument(
            "source-only: source and target dimensions differ");
      }
      Dataset train = take_rows(source, source_train);
      SvmModel model =
          train_ovr(train.features, train.labels,
                    Vector::Constant(train.n_samples(), hp.c_source));
      out.train_seconds = seconds_since(train_start);
      const auto eval_start = Clock::now();
      Dataset test = take_rows(target, folds.target_folds[fold]);
      out.accuracy = accuracy(model, test.features, test.labels);
      out.eval_seconds = seconds_since(eval_start);
      break;
    }
    case Setting::NotTransfer: {
      if (source.dim() != target.dim()) {
        throw std::invalid_argument(
            "not-transfer: source and target dimensions differ");
      }
      Dataset src = take_rows(source, source_train);
      Dataset tgt = take_rows(target, target_train);
      Matrix pooled(src.n_samples() + tgt.n_samples(), src.dim());
      pooled.topRows(src.n_samples()) = src.features;
      pooled.bottomRows(tgt.n_samples()) = tgt.features;
      std::vector<int> labels = src.labels;
      labels.insert(labels.end(), tgt.labels.begin(), tgt.labels.end());
      Vector penalties(pooled.rows());
      penalties.head(src.n_samples()).setConstant(hp.c_source);
      penalties.tail(tgt.n_samples()).setConstant(hp.c_target);
      SvmModel model = train_ovr(pooled, labels, penalties);
      out.train_seconds = seconds_since(train_start);
      const auto eval_start = Clock::now();
      Dataset test = take_rows(target, folds.target_folds[fold]);
      out.accuracy = accuracy(model, test.features, test.labels);
      out.eval_seconds = seconds_since(eval_start);
      break;
    }
    case Setting::Mmdt:
    case Setting::Mmdtl2: {
      Dataset src = take_rows(source, source_train);
      Dataset tgt = take_rows(target, target_train);
      AlternateOptions opts;
      const AdaptMethod method = cfg.setting == Setting::Mmdt
                                     ? AdaptMethod::Mmdt
                                     : AdaptMethod::Mmdtl2;
      if (method == AdaptMethod::Mmdt) opts.augmented = cfg.mmdt_augmented;
      AlternateResult fit = alternate(src, tgt, hp, method, opts);
      out.train_seconds = seconds_since(train_start);
      const auto eval_start = Clock::now();
      Dataset test = take_rows(target, folds.target_folds[fold]);
      const Matrix transformed = apply_transform(fit.transform, test.features);
      out.accuracy = accuracy(fit.model, transformed, test.labels);
      out.eval_seconds = seconds_since(eval_start);
      break;
    }
  }
  return out;
}

}  // namespace

std::vector<ReportRow> run_setting(const ExperimentConfig& cfg,
                                   const Dataset& source,
                                   const Dataset& target) {
  if (cfg.folds < 2) {
    throw std::invalid_argument("run_setting: folds must be >= 2");
  }
  cfg.hyperparams.validate();
  const PairedFolds folds = kfold_split(source, target, cfg.folds, cfg.seed);

  std::vector<ReportRow> rows;
  for (int f = 0; f < cfg.folds; ++f) {
    try {
      const FoldOutcome outcome = run_fold(cfg, source, target, folds, f);
      ReportRow row;
      row.setting = to_string(cfg.setting);
      row.fold = f;
      row.accuracy = outcome.accuracy;
      row.train_seconds = outcome.train_seconds;
      row.eval_seconds = outcome.eval_seconds;
      row.dimension = static_cast<int>(source.dim());
      row.seed = cfg.seed;
      rows.push_back(std::move(row));
    } catch (const std::exception& e) {
      throw std::runtime_error("run_setting: fold " + std::to_string(f) +
                               " failed: " + e.what());
    }
  }
  return rows;
}

std::vector<ReportRow> run_setting(const ExperimentConfig& cfg) {
  cfg.validate();
  Dataset source, target;
  if (cfg.synthetic == "toy") {
    std::tie(source, target) = io::gen_toy_two_class(cfg.seed);
  } else if (cfg.synthetic == "shifted") {
    std::tie(source, target) =
        io::gen_shifted(io::ShiftSpec::defaults(cfg.dim, 2, cfg.seed));
  } else {
    source = io::parse_features(cfg.source_path, cfg.file_format,
                                Domain::Source);
    if (!cfg.target_path.empty()) {
      target = io::parse_features(cfg.target_path, cfg.file_format,
                                  Domain::Target);
    } else if (cfg.setting == Setting::Baseline) {
      target = source;  // baseline folds the source against itself
      target.domain = Domain::Target;
    } else {
      throw std::invalid_argument("run_setting: this setting needs --target");
    }
  }
  return run_setting(cfg, source, target);
}

std::vector<BenchRow> benchmark_primal_vs_dual(const std::vector<int>& dims,
                                               int n_t, int n_s,
                                               std::uint64_t seed,
                                               int repeats) {
  if (dims.empty()) {
    throw std::invalid_argument("benchmark_primal_vs_dual: empty dims");
  }
  if (n_t < 2 || n_s < 2 || repeats < 1) {
    throw std::invalid_argument("benchmark_primal_vs_dual: bad sizes");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  HyperParams hp;  // C_S = C_T = 1, D = 1 defaults
  std::vector<BenchRow> rows;

  for (int dim : dims) {
    auto [source, target] = io::gen_shifted(
        io::ShiftSpec::defaults(dim, 2, mix_seed(seed, static_cast<std::uint64_t>(dim))),
        std::max(1, n_s / 2), std::max(1, n_t / 2));
    SvmModel model =
        train_ovr(source.features, source.labels,
                  Vector::Constant(source.n_samples(), hp.c_source));
    PairWeights pw = compute_pair_weights(source.labels, target.labels,
                                          PairWeightMode::ClassNormalized);

    BenchRow dual_row;
    dual_row.dimension = dim;
    dual_row.path = "dual";
    dual_row.w_agreement = nan;
    TransformMatrix w_dual;
    {
      std::vector<double> setup, opt, calc;
      for (int r = 0; r < repeats; ++r) {
        auto t0 = Clock::now();
        auto [ds, qp] = mmdtl2_build_dual(source, target, model, pw, hp);
        setup.push_back(seconds_since(t0));
        t0 = Clock::now();
        BoxQpResult sol = solve_box_qp(qp, 1e-8);
        opt.push_back(seconds_since(t0));
        t0 = Clock::now();
        w_dual = mmdtl2_recover_w(ds, sol.solution, target, model, pw, hp);
        calc.push_back(seconds_since(t0));
      }
      dual_row.setup_seconds = median(setup);
      dual_row.optimization_seconds = median(opt);
      dual_row.calculation_seconds = median(calc);
      dual_row.total_seconds = dual_row.setup_seconds +
                               dual_row.optimization_seconds +
                               dual_row.calculation_seconds;
    }

    BenchRow primal_row;
    primal_row.dimension = dim;
    primal_row.path = "primal";
    primal_row.calculation_seconds = nan;  // no recovery phase on this path
    primal_row.w_agreement = nan;
    try {
      std::vector<double> setup, opt;
      TransformMatrix w_primal;
      for (int r = 0; r < repeats; ++r) {
        auto t0 = Clock::now();
        PrimalSystem ps = mmdtl2_build_primal(source, target, model, pw, hp);
        setup.push_back(seconds_since(t0));
        t0 = Clock::now();
        InequalityQpResult sol = solve_inequality_qp(ps.qp, 1e-8);
        opt.push_back(seconds_since(t0));
        w_primal.w = unvec_row_major(
            sol.solution.head(ps.source_dim * ps.target_dim), ps.source_dim,
            ps.target_dim);
      }
      primal_row.setup_seconds = median(setup);
      primal_row.optimization_seconds = median(opt);
      primal_row.total_seconds =
          primal_row.setup_seconds + primal_row.optimization_seconds;
      const double agreement = (w_dual.w - w_primal.w).norm() /
                               (1.0 + w_primal.w.norm());
      primal_row.w_agreement = agreement;
      dual_row.w_agreement = agreement;
    } catch (const CapacityError&) {
      primal_row.skipped = true;
      primal_row.setup_seconds = nan;
      primal_row.optimization_seconds = nan;
      primal_row.total_seconds = nan;
    }
    rows.push_back(std::move(primal_row));
    rows.push_back(std::move(dual_row));
  }
  return rows;
}

std::string report_to_string(const std::vector<ReportRow>& rows,
                             ReportFormat format) {
  if (rows.empty()) {
    throw std::invalid_argument("emit_report: no rows");
  }
  if (format == ReportFormat::Json) {
    nlohmann::json j = nlohmann::json::array();
    for (const ReportRow& r : rows) {
      j.push_back({{"setting", r.setting},
                   {"fold", r.fold},
                   {"accuracy", r.accuracy},
                   {"train_seconds", r.train_seconds},
                   {"eval_seconds", r.eval_seconds},
                   {"dimension", r.dimension},
                   {"seed", r.seed}});
    }
    return j.dump(2) + "\n";
  }
  std::string out =
      "setting,fold,accuracy,train_seconds,eval_seconds,dimension,seed\n";
  for (const ReportRow& r : rows) {
    out += r.setting + ',' + std::to_string(r.fold) + ',' +
           format_cell(r.accuracy) + ',' + format_cell(r.train_seconds) + ',' +
           format_cell(r.eval_seconds) + ',' + std::to_string(r.dimension) +
           ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

void emit_report(const std::vector<ReportRow>& rows, ReportFormat format,
                 const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("emit_report: cannot open " + path);
  out << report_to_string(rows, format);
  if (!out) throw IoError("emit_report: write failed for " + path);
}

std::string bench_to_string(const std::vector<BenchRow>& rows,
                            ReportFormat format) {
  if (rows.empty()) {
    throw std::invalid_argument("emit_bench: no rows");
  }
  if (format == ReportFormat::Json) {
    nlohmann::json j = nlohmann::json::array();
    for (const BenchRow& r : rows) {
      nlohmann::json row = {{"dimension", r.dimension},
                            {"path", r.path},
                            {"skipped", r.skipped}};
      auto put = [&row](const char* key, double v) {
        if (std::isnan(v)) {
          row[key] = nullptr;
        } else {
          row[key] = v;
        }
      };
      put("setup_seconds", r.setup_seconds);
      put("optimization_seconds", r.optimization_seconds);
      put("calculation_seconds", r.calculation_seconds);
      put("total_seconds", r.total_seconds);
      put("w_agreement", r.w_agreement);
      j.push_back(std::move(row));
    }
    return j.dump(2) + "\n";
  }
  std::string out =
      "dimension,path,setup_seconds,optimization_seconds,calculation_seconds,"
      "total_seconds,skipped,w_agreement\n";
  for (const BenchRow& r : rows) {
    out += std::to_string(r.dimension) + ',' + r.path + ',' +
           format_cell(r.setup_seconds) + ',' +
           format_cell(r.optimization_seconds) + ',' +
           format_cell(r.calculation_seconds) + ',' +
           format_cell(r.total_seconds) + ',' +
           (r.skipped ? "true" : "false") + ',' +
           format_cell(r.w_agreement) + '\n';
  }
  return out;
}

void emit_bench(const std::vector<BenchRow>& rows, ReportFormat format,
                const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("emit_bench: cannot open " + path);
  out << bench_to_string(rows, format);
  if (!out) throw IoError("emit_bench: write failed for " + path);
}

}  // namespace adaptqp::harness

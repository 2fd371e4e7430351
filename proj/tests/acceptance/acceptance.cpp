// End-to-end acceptance run on MNIST. Runs the shipped configs/mnist.ini
// pipeline, then checks each acceptance criterion against the artifacts and
// prints one PASS/FAIL line per criterion.
//
//   a2d_acceptance [--out DIR] [--known-failure N]...
//
// A criterion listed with --known-failure is still measured and printed as
// FAIL when it fails; it just does not turn the exit status non-zero.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "a2d/config.hpp"
#include "a2d/data.hpp"
#include "a2d/detectors.hpp"
#include "a2d/fingerprint.hpp"
#include "a2d/nn.hpp"
#include "a2d/pipeline.hpp"
#include "a2d/serialize.hpp"
#include "oracles.hpp"

using namespace a2d;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Result {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::string num(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

// Runs the whole pipeline and returns the wall time of each command.
std::map<Command, double> run_pipeline(const RunConfig& cfg, const std::string& hash) {
  std::ostringstream log;
  Pipeline p(cfg, hash, log);
  std::map<Command, double> t;
  for (Command c : {Command::Train, Command::Attack, Command::Fingerprint, Command::FitDetector, Command::Evaluate,
                    Command::Sweep}) {
    const auto t0 = Clock::now();
    p.run(c);
    t[c] = seconds_since(t0);
    std::cerr << "  " << to_string(c) << " " << num(t[c], 3) << " s\n";
  }
  return t;
}

std::vector<double> costs_of(const std::vector<Fingerprint>& fps, const std::string& origin, std::size_t col) {
  std::vector<double> out;
  for (const Fingerprint& f : fps) {
    if (f.origin == origin) out.push_back(static_cast<double>(f.costs[col]));
  }
  return out;
}

Dataset load_corpus_dataset(const fs::path& run, const std::string& name, std::size_t classes) {
  const fs::path dir = run / "corpora";
  return load_idx(dir / (name + "-images.idx"), dir / (name + "-labels.idx"), classes);
}

std::size_t column_index(const std::vector<std::string>& names, const std::string& name) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::runtime_error("no defense column '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

const Json& report_row(const Json& report, const std::string& detector, const std::string& corpus) {
  for (const Json& r : report.at("rows")) {
    if (r.at("detector") == detector && r.at("corpus") == corpus) return r;
  }
  throw std::runtime_error("report has no row " + detector + "/" + corpus);
}

const Json& sweep_rows(const Json& sweep, const std::string& model) {
  for (const Json& r : sweep.at("results")) {
    if (r.at("model") == model) return r.at("rows");
  }
  throw std::runtime_error("sweep has no model " + model);
}

const Json& sweep_row(const Json& rows, double kappa) {
  for (const Json& r : rows) {
    if (r.at("kappa").get<double>() == kappa) return r;
  }
  throw std::runtime_error("sweep has no kappa " + num(kappa));
}

// Backprop input gradients against long double central differences of the same loss.
Result gradient_fidelity(const Model& model, const Dataset& test) {
  const auto t0 = Clock::now();
  constexpr std::size_t kImages = 25, kPixels = 40;
  constexpr double kStep = 1e-6;
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<std::size_t> pixel(0, model.input_dim() - 1);
  std::size_t checked = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < kImages; ++i) {
    const Example& e = test[i * 37];
    std::vector<double> ref(model.output_dim(), 0.1);
    ref[e.label] = 0.9;
    const std::size_t target = (e.label + 1) % model.output_dim();
    const LossKind losses[] = {CrossEntropy{e.label}, MarginCW{target, 2.0}, MeanSquared{ref}};
    for (const LossKind& loss : losses) {
      const InputGradient g = input_gradient(model, e.pixels, loss);
      const auto gv = g.grad.values();
      for (std::size_t s = 0; s < kPixels; ++s) {
        const std::size_t j = pixel(rng);
        std::vector<long double> x(e.pixels.values().begin(), e.pixels.values().end());
        x[j] += kStep;
        const long double up = oracle::loss_ld(model, x, loss);
        x[j] -= 2 * kStep;
        const long double down = oracle::loss_ld(model, x, loss);
        const double fd = static_cast<double>((up - down) / (2 * kStep));
        const double scale = std::max({std::abs(fd), std::abs(gv[j]), 1e-6});
        worst = std::max(worst, std::abs(fd - gv[j]) / scale);
        ++checked;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {1, "gradient fidelity", checked >= 1000 && worst < 1e-4 && secs < 60,
          std::to_string(checked) + " coordinates over 3 losses, max relative error " + num(worst, 3) + ", " +
              num(secs, 3) + " s"};
}

// Exact-tolerance property suites against the brute-force oracles.
Result oracle_equivalences() {
  std::mt19937_64 rng(33);
  std::ostringstream detail;
  bool ok = true;

  auto t0 = Clock::now();
  std::size_t knn_mismatch = 0, knn_queries = 0;
  std::uniform_int_distribution<int> cost(0, 40);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t dims = 1 + trial % 3, n = 150 + 10 * trial, k = 1 + (trial * 7) % 101;
    std::vector<Fingerprint> refs;
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < n; ++i) {
      Fingerprint f;
      f.example_id = (i * 131) % 257;
      f.origin = i % 2 ? "adv" : kBenign;
      for (std::size_t d = 0; d < dims; ++d) f.costs.push_back(static_cast<std::uint64_t>(cost(rng)));
      rows.emplace_back(f.costs.begin(), f.costs.end());
      ids.push_back(f.example_id);
      refs.push_back(std::move(f));
    }
    const KnnDetector det = knn_fit(refs, std::min(k, n));
    for (int q = 0; q < 20; ++q) {
      std::vector<double> query(dims);
      for (double& v : query) v = cost(rng);
      knn_mismatch += det.neighbors(query) != oracle::knn(rows, ids, query, std::min(k, n));
      ++knn_queries;
    }
  }
  const double knn_s = seconds_since(t0);
  ok = ok && knn_mismatch == 0 && knn_s < 60;
  detail << "knn " << knn_mismatch << "/" << knn_queries << " mismatches (" << num(knn_s, 3) << " s)";

  t0 = Clock::now();
  double auc_err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::gamma_distribution<double> gb(3.0 + trial % 5, 6.0), ga(1.0 + trial % 3, 4.0);
    std::vector<double> b(50 + trial), a(30 + 2 * trial);
    for (double& v : b) v = std::round(gb(rng));
    for (double& v : a) v = std::round(ga(rng));
    auc_err = std::max(auc_err, std::abs(auroc(b, a) - oracle::pairwise_auroc(b, a)));
  }
  const double auc_s = seconds_since(t0);
  ok = ok && auc_err <= 1e-12 && auc_s < 60;
  detail << "; auroc max error " << num(auc_err, 3) << " (" << num(auc_s, 3) << " s)";

  t0 = Clock::now();
  double lambda_gap = 0.0;
  for (int trial = 0; trial < 60; ++trial) {
    std::gamma_distribution<double> g(1.0 + trial % 8, 2.0 + trial % 6);
    std::vector<double> c(30 + 8 * trial);
    for (double& v : c) v = std::round(g(rng));
    lambda_gap = std::max(lambda_gap, std::abs(boxcox_fit(c).lambda - oracle::boxcox_lambda(c)));
  }
  const double bc_s = seconds_since(t0);
  ok = ok && lambda_gap <= 0.01 + 1e-12 && bc_s < 60;
  detail << "; box-cox max lambda gap " << num(lambda_gap, 3) << " (" << num(bc_s, 3) << " s)";
  return {8, "oracle equivalences", ok, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path out = fs::temp_directory_path() / "a2d_acceptance";
  std::set<int> known;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--out" && i + 1 < argc) {
      out = argv[++i];
    } else if (a == "--known-failure" && i + 1 < argc) {
      known.insert(std::stoi(argv[++i]));
    } else {
      std::cerr << "usage: a2d_acceptance [--out DIR] [--known-failure N]...\n";
      return 2;
    }
  }

  std::vector<Result> results{oracle_equivalences()};
  try {
    const char* data_dir = std::getenv("A2D_DATA_DIR");
    if (data_dir == nullptr || !fs::exists(fs::path(data_dir) / "train-images-idx3-ubyte")) {
      throw std::runtime_error("MNIST IDX files not found; set A2D_DATA_DIR");
    }
    ConfigOverrides ov;
    ov.out = out / "run1";
    ov.workers = 1;
    ov.data_dir = data_dir;
    const RunConfig cfg = load_config(A2D_CONFIG_FILE, ov);
    fs::remove_all(out);

    std::cerr << "pipeline run 1 (" << ov.out->string() << ")\n";
    const auto times = run_pipeline(cfg, config_hash(cfg, ov));
    const fs::path run = *ov.out;

    const Model model = load_model(run / "model.a2dm");
    const Dataset test = load_idx(fs::path(data_dir) / cfg.data.test_images, fs::path(data_dir) / cfg.data.test_labels);
    results.push_back(gradient_fidelity(model, test));

    // 2: the pipeline's own held-out accuracy row.
    {
      std::istringstream hist(slurp(run / "train_history.csv"));
      std::string line, last;
      while (std::getline(hist, line)) {
        if (line.rfind("test,", 0) == 0) last = line;
      }
      const double acc = std::stod(last.substr(last.rfind(',') + 1));
      const double secs = times.at(Command::Train);
      results.push_back({2, "model quality",
                         cfg.data.train_limit >= 10000 && acc >= 0.95 && secs < 600,
                         std::to_string(cfg.data.train_limit) + " training images, held-out accuracy " + num(acc) +
                             ", " + num(secs, 3) + " s"});
    }

    const FingerprintTable table = read_fingerprints_csv(run / "fingerprints.csv");
    const std::vector<Fingerprint>& fps = table.fingerprints;
    const std::size_t bim_col = column_index(table.defense_names, "bim");
    const std::vector<double> benign_bim = costs_of(fps, kBenign, bim_col);

    // 3: medians and set distances.
    {
      bool ok = true;
      std::ostringstream d;
      d << "median bim cost benign " << median(benign_bim);
      for (const char* name : {"fgsm", "jsma", "cw"}) {
        const double m = median(costs_of(fps, name, bim_col));
        ok = ok && m < median(benign_bim);
        d << ", " << name << " " << m;
      }
      std::vector<FingerprintGroup> groups;
      for (const char* name : {kBenign, "fgsm", "bim", "jsma", "cw"}) {
        FingerprintGroup g{name, {}};
        for (const Fingerprint& f : fps) {
          if (f.origin == name) g.members.push_back(f);
        }
        groups.push_back(std::move(g));
      }
      const DistanceMatrix dm = set_distance_matrix(groups, cfg.seed);
      double min_cross = INFINITY, max_adv = 0.0;
      for (std::size_t i = 1; i < groups.size(); ++i) {
        min_cross = std::min(min_cross, dm.at(0, i));
        for (std::size_t j = i + 1; j < groups.size(); ++j) max_adv = std::max(max_adv, dm.at(i, j));
      }
      ok = ok && min_cross > max_adv;
      d << "; min benign-vs-adversarial distance " << num(min_cross) << ", max adversarial-vs-adversarial "
        << num(max_adv);
      results.push_back({3, "cost separation", ok, d.str()});
    }

    // 4: threshold-free AUROC of the raw bim cost over every fingerprint.
    {
      bool ok = benign_bim.size() >= 500;
      std::ostringstream d;
      d << benign_bim.size() << " benign";
      for (const auto& [name, floor] : std::vector<std::pair<std::string, double>>{
               {"bim", 0.95}, {"cw", 0.95}, {"fgsm", 0.93}, {"jsma", 0.93}}) {
        const std::vector<double> adv = costs_of(fps, name, bim_col);
        const double a = auroc(benign_bim, adv);
        ok = ok && adv.size() >= 500 && a >= floor;
        d << "; " << name << " n=" << adv.size() << " auroc " << num(a);
      }
      const double secs = times.at(Command::Attack) + times.at(Command::Fingerprint) + times.at(Command::FitDetector) +
                          times.at(Command::Evaluate);
      ok = ok && secs < 1800;
      d << "; " << num(secs, 3) << " s";
      results.push_back({4, "auroc", ok, d.str()});
    }

    const Json report = Json::parse(slurp(run / "report.json"));

    // 5: the single z-score rule on held-out fingerprints.
    {
      const Json& row = report_row(report, "z:bim", "all");
      const double fpr = row.at("fpr").get<double>(), acc_adv = row.at("accuracy_adv").get<double>();
      results.push_back({5, "z-score operating point", std::abs(fpr - 0.10) <= 0.04 && acc_adv >= 0.95,
                         "held-out benign fpr " + num(fpr) + ", adversarial accuracy " + num(acc_adv) + " (" +
                             report.at("held_out_benign").dump() + " held-out benign)"});
    }

    // 6: queries per defense, each defense fingerprinted on its own.
    {
      bool ok = true;
      std::ostringstream d;
      const Dataset benign = load_corpus_dataset(run, kBenign, model.num_classes());
      for (const DefenseAttack& def : cfg.defenses) {
        const std::vector<DefenseAttack> one{def};
        const FingerprintBatch b = fingerprint_batch(model, benign, one, 1, kBenign, 0, &benign);
        double adv_queries = 0.0;
        std::size_t adv_n = 0;
        for (const DefenseAttack& a : cfg.attacks) {
          const Dataset corpus = load_corpus_dataset(run, a.name, model.num_classes());
          const FingerprintBatch fb = fingerprint_batch(model, corpus, one, 1, a.name, 0, &benign);
          adv_queries += static_cast<double>(fb.total_queries);
          adv_n += corpus.size();
        }
        const double mb = static_cast<double>(b.total_queries) / benign.size(), ma = adv_queries / adv_n;
        ok = ok && mb > ma;
        if (def.name == "bim") ok = ok && ma <= 40;
        d << (d.tellp() > 0 ? "; " : "") << def.name << " benign " << num(mb) << " vs adversarial " << num(ma);
      }
      results.push_back({6, "query efficiency", ok, d.str()});
    }

    // 7: K-NN on the bim cost, and the multi-defense K-NN against every single detector.
    {
      const double knn_acc = report_row(report, "knn:bim", "all").at("accuracy").get<double>();
      std::map<std::string, std::vector<double>> per_detector;
      for (const Json& r : report.at("rows")) {
        if (r.at("corpus") != "all") per_detector[r.at("detector")].push_back(r.at("accuracy").get<double>());
      }
      const double end_avg = mean(per_detector.at("knn-ensemble"));
      double best_single = 0.0;
      std::string best_name;
      for (const auto& [name, accs] : per_detector) {
        if (name == "knn-ensemble" || name == "ensemble-z") continue;
        if (mean(accs) > best_single) {
          best_single = mean(accs);
          best_name = name;
        }
      }
      results.push_back({7, "k-nn detector", knn_acc >= 0.90 && end_avg >= best_single - 0.03,
                         "knn:bim accuracy " + num(knn_acc) + "; knn-ensemble average " + num(end_avg) +
                             ", best single " + best_name + " " + num(best_single)});
    }

    const Json sweep = Json::parse(slurp(run / "sweep.json"));
    const Json& plain = sweep_rows(sweep, "plain");

    // 9: distortion and cost grow with kappa.
    {
      bool ok = true;
      std::ostringstream d;
      double prev_l2 = -1.0, prev_cost = -1.0;
      for (double k : {0.0, 2.0, 4.0, 6.0, 8.0}) {
        const Json& r = sweep_row(plain, k);
        const double l2 = r.at("mean_l2").get<double>(), c = r.at("mean_cost").get<double>();
        ok = ok && r.at("successes").get<std::size_t>() > 0 && l2 > prev_l2 && c > prev_cost;
        prev_l2 = l2;
        prev_cost = c;
        d << (k > 0 ? "; " : "") << "kappa " << k << " l2 " << num(l2) << " cost " << num(c);
      }
      const double c0 = sweep_row(plain, 0.0).at("mean_cost").get<double>();
      const double c8 = sweep_row(plain, 8.0).at("mean_cost").get<double>();
      ok = ok && c8 >= 5 * c0;
      results.push_back({9, "adaptive trend", ok, d.str()});
    }

    // 10: combined defense over the whole kappa range.
    {
      double worst_residual = 0.0, worst_detect = 1.0, worst_kappa = 0.0;
      for (const Json& r : plain) {
        const double k = r.at("kappa").get<double>();
        worst_residual = std::max(worst_residual, r.at("residual_asr_combined").get<double>());
        if (k <= 10 && r.at("detect_a2d").get<double>() < worst_detect) {
          worst_detect = r.at("detect_a2d").get<double>();
          worst_kappa = k;
        }
      }
      const double secs = times.at(Command::Sweep);
      const double kmax = plain.back().at("kappa").get<double>();
      results.push_back({10, "combined defense",
                         kmax >= 20 && sweep.at("l2_cap").get<double>() == 8.4 && worst_residual <= 0.05 &&
                             worst_detect >= 0.95 && secs < 3600,
                         "max combined residual asr " + num(worst_residual) + "; min a2d detection for kappa<=10 " +
                             num(worst_detect) + " at kappa " + num(worst_kappa) + "; " + num(secs, 3) + " s"});
    }

    // 11: the PGD-trained model against kappa 0.
    {
      const Json& p0 = sweep_row(plain, 0.0);
      const Json& r0 = sweep_row(sweep_rows(sweep, "pgd"), 0.0);
      const double plain_asr = p0.at("asr").get<double>(), pgd_asr = r0.at("asr").get<double>();
      const double detect = r0.at("detect_a2d").get<double>();
      results.push_back({11, "adversarial training interplay",
                         pgd_asr < plain_asr && r0.at("successes").get<std::size_t>() > 0 && detect >= 0.95,
                         "kappa 0 asr plain " + num(plain_asr) + " vs pgd " + num(pgd_asr) +
                             "; a2d detects " + num(detect) + " of pgd successes"});
    }

    // 12: a second run with another worker count must match byte for byte.
    {
      ConfigOverrides ov2 = ov;
      ov2.out = out / "run2";
      ov2.workers = 2;
      const RunConfig cfg2 = load_config(A2D_CONFIG_FILE, ov2);
      std::cerr << "pipeline run 2 (" << ov2.out->string() << ")\n";
      run_pipeline(cfg2, config_hash(cfg2, ov2));
      const Json m1 = Json::parse(slurp(run / "manifest.json"));
      const Json m2 = Json::parse(slurp(*ov2.out / "manifest.json"));
      std::size_t differ = 0;
      for (const auto& [path, sum] : m1.at("artifacts").items()) differ += !m2.at("artifacts").contains(path) ||
                                                                          m2["artifacts"][path] != sum;
      differ += m1.at("artifacts").size() != m2.at("artifacts").size();
      results.push_back({12, "determinism", differ == 0,
                         std::to_string(m1.at("artifacts").size()) + " artifacts compared, " +
                             std::to_string(differ) + " differ"});
    }
  } catch (const std::exception& e) {
    std::cerr << "acceptance run aborted: " << e.what() << "\n";
    std::set<int> done;
    for (const Result& r : results) done.insert(r.id);
    for (int id = 1; id <= 12; ++id) {
      if (!done.count(id)) results.push_back({id, "not evaluated", false, e.what()});
    }
  }

  std::sort(results.begin(), results.end(), [](const Result& a, const Result& b) { return a.id < b.id; });
  bool ok = true;
  for (const Result& r : results) {
    const bool excused = !r.pass && known.count(r.id);
    ok = ok && (r.pass || excused);
    std::cout << "criterion " << r.id << " " << (r.pass ? "PASS" : "FAIL") << " " << r.name << ": " << r.detail
              << (excused ? " [known failure]" : "") << "\n";
  }
  return ok ? 0 : 1;
}

#include "a2d/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "a2d/checksum.hpp"
#include "a2d/detectors.hpp"
#include "a2d/error.hpp"
#include "a2d/fingerprint.hpp"
#include "a2d/hardening.hpp"
#include "a2d/serialize.hpp"
#include "a2d/train.hpp"
#include "parallel.hpp"

namespace a2d {

namespace fs = std::filesystem;

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Train: return "train";
    case Command::Attack: return "attack";
    case Command::Fingerprint: return "fingerprint";
    case Command::FitDetector: return "fit-detector";
    case Command::Detect: return "detect";
    case Command::Evaluate: return "evaluate";
    case Command::Sweep: return "sweep";
  }
  return "?";
}

Command parse_command(std::string_view name) {
  for (Command c : {Command::Train, Command::Attack, Command::Fingerprint, Command::FitDetector, Command::Detect,
                    Command::Evaluate, Command::Sweep}) {
    if (to_string(c) == name) return c;
  }
  throw InvalidInput("unknown command '" + std::string(name) +
                     "' (expected train, attack, fingerprint, fit-detector, detect, evaluate or sweep)");
}

namespace {

constexpr const char* kModelFile = "model.a2dm";
constexpr const char* kFingerprintFile = "fingerprints.csv";
constexpr const char* kDetectorFile = "detector.json";

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error("failed writing " + path.string());
}

Json read_json(const fs::path& path, const std::string& producer) {
  std::ifstream f(path);
  if (!f) throw MissingArtifact(path.string() + " not found; run '" + producer + "' first");
  try {
    return Json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what(), e.byte);
  }
}

void require(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path)) throw MissingArtifact(path.string() + " not found; run '" + producer + "' first");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::vector<std::size_t> correct_indices(const Model& model, const Dataset& data) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (predict(model, data[i].pixels.values()).label == data[i].label) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> slice(const std::vector<std::size_t>& v, std::size_t from, std::size_t count) {
  if (from >= v.size()) return {};
  const std::size_t to = std::min(v.size(), from + count);
  return {v.begin() + static_cast<std::ptrdiff_t>(from), v.begin() + static_cast<std::ptrdiff_t>(to)};
}

fs::path corpus_images(const fs::path& out, const std::string& name) {
  return out / "corpora" / (name + "-images.idx");
}
fs::path corpus_labels(const fs::path& out, const std::string& name) {
  return out / "corpora" / (name + "-labels.idx");
}

Dataset load_corpus(const fs::path& out, const std::string& name, std::size_t num_classes) {
  require(corpus_images(out, name), "attack");
  return load_idx(corpus_images(out, name), corpus_labels(out, name), num_classes);
}

Json defenses_json(const std::vector<DefenseAttack>& defenses) {
  Json arr = Json::array();
  for (const DefenseAttack& d : defenses) arr.push_back(Json{{"name", d.name}, {"config", to_json(d.config)}});
  return arr;
}

std::vector<std::string> defense_names(const std::vector<DefenseAttack>& defenses) {
  std::vector<std::string> names;
  for (const DefenseAttack& d : defenses) names.push_back(d.name);
  return names;
}

struct FitSplit {
  std::vector<Fingerprint> fit;
  std::vector<Fingerprint> held_out;
};

// Per origin, the first floor(fraction * n) fingerprints in file order fit.
FitSplit split_fingerprints(const std::vector<Fingerprint>& all, double fraction) {
  std::map<std::string, std::vector<const Fingerprint*>> groups;
  std::vector<std::string> order;
  for (const Fingerprint& fp : all) {
    auto [it, fresh] = groups.try_emplace(fp.origin);
    if (fresh) order.push_back(fp.origin);
    it->second.push_back(&fp);
  }
  FitSplit s;
  for (const std::string& origin : order) {
    const auto& g = groups[origin];
    const auto n_fit = static_cast<std::size_t>(fraction * static_cast<double>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) (i < n_fit ? s.fit : s.held_out).push_back(*g[i]);
  }
  return s;
}

std::vector<Fingerprint> of_origin(const std::vector<Fingerprint>& fps, const std::string& origin) {
  std::vector<Fingerprint> out;
  for (const Fingerprint& fp : fps) {
    if (fp.origin == origin) out.push_back(fp);
  }
  return out;
}

struct FittedDetectors {
  std::vector<DefenseAttack> defenses;
  std::size_t primary = 0;
  double fit_fraction = 0.5;
  EnsembleZ ensemble;
  KnnDetector knn;
  std::vector<KnnDetector> knn_single;
};

FittedDetectors load_detectors(const fs::path& out) {
  const Json j = read_json(out / kDetectorFile, "fit-detector");
  try {
    std::vector<DefenseAttack> defenses;
    for (const Json& d : j.at("defenses")) {
      defenses.push_back(DefenseAttack{d.at("name").get<std::string>(), attack_config_from_json(d.at("config"))});
    }
    std::vector<KnnDetector> singles;
    for (const Json& k : j.at("knn_single")) singles.push_back(knn_from_json(k));
    return FittedDetectors{std::move(defenses),
                           j.at("primary").get<std::size_t>(),
                           j.at("fit_fraction").get<double>(),
                           ensemble_from_json(j.at("ensemble")),
                           knn_from_json(j.at("knn")),
                           std::move(singles)};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("detector.json: ") + e.what(), 0);
  }
}

std::vector<double> as_doubles(const Fingerprint& fp) {
  return {fp.costs.begin(), fp.costs.end()};
}

}  // namespace

Pipeline::Pipeline(RunConfig cfg, std::string config_hash, std::ostream& log)
    : cfg_(std::move(cfg)), hash_(std::move(config_hash)), log_(log) {}

std::pair<Dataset, Dataset> Pipeline::load_data() const {
  const DataSection& d = cfg_.data;
  if (d.synthetic) {
    const std::size_t total = d.train_limit + 2 * (d.benign_count + d.adv_count);
    const Dataset blobs = synthetic_blobs(10, (total + 9) / 10, d.synthetic_dim, 0.2, cfg_.seed);
    return split(blobs, d.train_limit, blobs.size() - d.train_limit, cfg_.seed);
  }
  const fs::path dir = resolve_data_dir(d.dir);
  Dataset train = load_idx(dir / d.train_images, dir / d.train_labels, 10, d.train_limit);
  Dataset test = load_idx(dir / d.test_images, dir / d.test_labels, 10);
  return {std::move(train), std::move(test)};
}

void Pipeline::record(const std::vector<fs::path>& written) {
  const fs::path path = cfg_.out / "manifest.json";
  std::map<std::string, std::string> artifacts;
  if (fs::exists(path)) {
    const Json old = read_json(path, "any command");
    if (old.contains("artifacts")) {
      for (const auto& [k, v] : old["artifacts"].items()) artifacts[k] = v.get<std::string>();
    }
  }
  for (const fs::path& p : written) artifacts[fs::relative(p, cfg_.out).generic_string()] = sha256_file(p);
  Json m;
  m["config_hash"] = hash_;
  m["seed"] = cfg_.seed;
  m["artifacts"] = Json::object();
  for (const auto& [k, v] : artifacts) m["artifacts"][k] = v;
  write_text(path, m.dump(2) + "\n");
}

void Pipeline::train() {
  fs::create_directories(cfg_.out);
  const auto [train_set, test_set] = load_data();
  Architecture arch{{train_set.input_dim()}};
  for (std::size_t h : cfg_.model.hidden) arch.dims.push_back(h);
  arch.dims.push_back(train_set.num_classes());

  log_ << "training on " << train_set.size() << " examples\n";
  const TrainResult r = a2d::train(arch, train_set, cfg_.model.train);
  const double acc = accuracy(r.model, test_set);
  log_ << "held-out accuracy " << fmt(acc) << "\n";

  const fs::path model_path = cfg_.out / kModelFile;
  save_model(r.model, model_path);
  std::ostringstream csv;
  csv << "epoch,mean_loss,accuracy\n";
  for (std::size_t e = 0; e < r.history.size(); ++e) {
    csv << e + 1 << ',' << fmt(r.history[e].mean_loss) << ',';
    if (r.history[e].accuracy) csv << fmt(*r.history[e].accuracy);
    csv << '\n';
  }
  csv << "test," << "," << fmt(acc) << '\n';
  const fs::path hist = cfg_.out / "train_history.csv";
  write_text(hist, csv.str());
  record({model_path, hist});
}

void Pipeline::attack() {
  require(cfg_.out / kModelFile, "train");
  const Model model = load_model(cfg_.out / kModelFile);
  const std::string model_sha = sha256_file(cfg_.out / kModelFile);
  const Dataset test = load_data().second;
  const std::vector<std::size_t> correct = correct_indices(model, test);
  const std::vector<std::size_t> benign_idx = slice(correct, 0, cfg_.data.benign_count);
  const std::vector<std::size_t> source_idx = slice(correct, cfg_.data.benign_count, cfg_.data.adv_count);
  if (benign_idx.empty()) throw InvalidInput("the model classifies no held-out example correctly");
  const Dataset benign = test.subset(benign_idx, kBenign);
  const Dataset sources = test.subset(source_idx, "sources");

  fs::create_directories(cfg_.out / "corpora");
  std::vector<fs::path> written;
  auto write_corpus = [&](const std::string& name, const Dataset& data, Json sidecar) {
    write_idx(data, corpus_images(cfg_.out, name), corpus_labels(cfg_.out, name), IdxPixelType::Float64);
    const fs::path side = cfg_.out / "corpora" / (name + ".json");
    write_text(side, sidecar.dump(2) + "\n");
    written.insert(written.end(), {corpus_images(cfg_.out, name), corpus_labels(cfg_.out, name), side});
  };

  Json bj;
  bj["name"] = kBenign;
  bj["model_sha256"] = model_sha;
  bj["test_indices"] = benign_idx;
  write_corpus(kBenign, benign, bj);

  for (const DefenseAttack& a : cfg_.attacks) {
    std::vector<AttackOutcome> outcomes(sources.size());
    detail::parallel_for(sources.size(), cfg_.workers, [&](std::size_t i) {
      AttackConfig c = a.config;
      c.seed = mix_seed(c.seed, i);
      outcomes[i] = run_attack(model, sources[i].pixels, c, sources[i].label, &benign);
    });
    std::vector<Example> adv;
    Json sidecar;
    sidecar["name"] = a.name;
    sidecar["config"] = to_json(a.config);
    sidecar["model_sha256"] = model_sha;
    sidecar["attempted"] = sources.size();
    Json rows = Json::array();
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      Json row = to_json(outcomes[i], i);
      row["test_index"] = source_idx[i];
      rows.push_back(std::move(row));
      if (outcomes[i].success) adv.push_back(Example{*outcomes[i].adversarial, sources[i].label});
    }
    sidecar["successes"] = adv.size();
    sidecar["outcomes"] = std::move(rows);
    log_ << a.name << ": " << adv.size() << "/" << sources.size() << " successful\n";
    if (adv.empty()) throw InvalidInput("attack '" + a.name + "' produced no adversarial examples");
    write_corpus(a.name, Dataset(a.name, test.num_classes(), test.input_dim(), std::move(adv)), std::move(sidecar));
  }
  record(written);
}

void Pipeline::fingerprint() {
  require(cfg_.out / kModelFile, "train");
  if (cfg_.defenses.empty()) throw ConfigError("fingerprint needs at least one [defense.<name>] section", 0);
  const Model model = load_model(cfg_.out / kModelFile);
  const Dataset benign = load_corpus(cfg_.out, kBenign, model.num_classes());

  std::vector<Fingerprint> all;
  std::size_t next_id = 0;
  auto add = [&](const Dataset& data, const std::string& origin) {
    FingerprintBatch b = fingerprint_batch(model, data, cfg_.defenses, cfg_.workers, origin, next_id, &benign);
    next_id += data.size();
    log_ << origin << ": " << data.size() << " fingerprints, " << b.total_queries << " queries\n";
    all.insert(all.end(), b.fingerprints.begin(), b.fingerprints.end());
  };
  add(benign, kBenign);
  for (const DefenseAttack& a : cfg_.attacks) add(load_corpus(cfg_.out, a.name, model.num_classes()), a.name);

  const fs::path path = cfg_.out / kFingerprintFile;
  write_fingerprints_csv(path, all, defense_names(cfg_.defenses));
  record({path});
}

void Pipeline::fit_detector() {
  require(cfg_.out / kFingerprintFile, "fingerprint");
  const FingerprintTable table = read_fingerprints_csv(cfg_.out / kFingerprintFile);
  if (table.defense_names != defense_names(cfg_.defenses)) {
    throw InvalidInput("fingerprints.csv columns do not match the configured defenses; rerun 'fingerprint'");
  }
  const std::size_t primary = cfg_.primary_defense();
  const FitSplit s = split_fingerprints(table.fingerprints, cfg_.detector.fit_fraction);
  const std::vector<Fingerprint> benign_fit = of_origin(s.fit, kBenign);
  const std::size_t dims = cfg_.defenses.size();

  const EnsembleZ ens = ensemble_z_fit(benign_fit, std::min(cfg_.detector.vote_k, dims), cfg_.detector.h);
  const std::size_t k = std::min(cfg_.detector.k, s.fit.size());
  Json j;
  j["defenses"] = defenses_json(cfg_.defenses);
  j["primary"] = primary;
  j["fit_fraction"] = cfg_.detector.fit_fraction;
  j["ensemble"] = to_json(ens);
  j["knn"] = to_json(knn_fit(s.fit, k));
  j["knn_single"] = Json::array();
  for (std::size_t c = 0; c < dims; ++c) {
    const std::size_t col[] = {c};
    j["knn_single"].push_back(to_json(knn_fit(select_columns(s.fit, col), k)));
  }
  const ZScoreDetector& z = ens.members()[primary];
  log_ << "z-score on " << cfg_.defenses[primary].name << ": lambda " << fmt(z.transform().lambda) << ", mu "
       << fmt(z.mu()) << ", sigma " << fmt(z.sigma()) << "\n";
  const fs::path path = cfg_.out / kDetectorFile;
  write_text(path, j.dump(2) + "\n");
  record({path});
}

void Pipeline::evaluate() {
  const FittedDetectors det = load_detectors(cfg_.out);
  require(cfg_.out / kFingerprintFile, "fingerprint");
  const FingerprintTable table = read_fingerprints_csv(cfg_.out / kFingerprintFile);
  if (table.defense_names != defense_names(det.defenses)) {
    throw InvalidInput("detector.json and fingerprints.csv disagree on the defenses; rerun 'fit-detector'");
  }
  const FitSplit s = split_fingerprints(table.fingerprints, det.fit_fraction);
  const std::vector<Fingerprint> benign = of_origin(s.held_out, kBenign);

  std::vector<std::string> corpora;
  for (const Fingerprint& fp : s.held_out) {
    if (fp.adversarial() && std::find(corpora.begin(), corpora.end(), fp.origin) == corpora.end()) {
      corpora.push_back(fp.origin);
    }
  }

  struct Named {
    std::string name;
    FingerprintRule rule;
    FingerprintScore score;
  };
  std::vector<Named> rules;
  for (std::size_t c = 0; c < det.defenses.size(); ++c) {
    const ZScoreDetector& z = det.ensemble.members()[c];
    rules.push_back({"z:" + det.defenses[c].name,
                     [&z, c](const Fingerprint& fp) { return z.classify(static_cast<double>(fp.costs[c])); },
                     [&z, c](const Fingerprint& fp) { return z.z(static_cast<double>(fp.costs[c])); }});
  }
  rules.push_back({"ensemble-z", [&](const Fingerprint& fp) { return det.ensemble.classify(fp); }, nullptr});
  for (std::size_t c = 0; c < det.defenses.size(); ++c) {
    const KnnDetector& knn = det.knn_single[c];
    rules.push_back({"knn:" + det.defenses[c].name,
                     [&knn, c](const Fingerprint& fp) {
                       const double cost[] = {static_cast<double>(fp.costs[c])};
                       return knn.classify(cost);
                     },
                     nullptr});
  }
  rules.push_back({"knn-ensemble", [&](const Fingerprint& fp) { return det.knn.classify(fp); }, nullptr});

  std::ostringstream csv;
  csv << "detector,corpus,true_positive,false_negative,true_negative,false_positive,accuracy_benign,accuracy_adv,"
         "accuracy,fpr,tpr,auroc,mean_queries_benign,mean_queries_adv\n";
  Json rows = Json::array();
  auto emit = [&](const Named& r, const std::string& corpus_name, const std::vector<Fingerprint>& corpus) {
    const DetectionReport rep = a2d::evaluate(r.rule, corpus, r.score);
    Json row{{"detector", r.name}, {"corpus", corpus_name}};
    row.update(to_json(rep));
    rows.push_back(row);
    csv << r.name << ',' << corpus_name << ',' << rep.true_positive << ',' << rep.false_negative << ','
        << rep.true_negative << ',' << rep.false_positive << ',' << fmt(rep.accuracy_benign) << ','
        << fmt(rep.accuracy_adv) << ',' << fmt(rep.accuracy) << ',' << fmt(rep.fpr) << ',' << fmt(rep.tpr) << ','
        << (rep.auroc ? fmt(*rep.auroc) : "") << ',' << fmt(rep.mean_queries_benign) << ','
        << fmt(rep.mean_queries_adv) << '\n';
    if (corpus_name == "all") {
      log_ << r.name << ": accuracy " << fmt(rep.accuracy) << ", fpr " << fmt(rep.fpr) << "\n";
    }
  };
  for (const Named& r : rules) {
    for (const std::string& name : corpora) {
      std::vector<Fingerprint> corpus = benign;
      const std::vector<Fingerprint> adv = of_origin(s.held_out, name);
      corpus.insert(corpus.end(), adv.begin(), adv.end());
      emit(r, name, corpus);
    }
    if (!corpora.empty()) emit(r, "all", s.held_out);
  }
  if (corpora.empty()) throw InvalidInput("no adversarial fingerprints to evaluate; add [attack.<name>] sections");

  Json report;
  report["seed"] = cfg_.seed;
  report["held_out_benign"] = benign.size();
  report["rows"] = std::move(rows);
  const fs::path json_path = cfg_.out / "report.json";
  const fs::path csv_path = cfg_.out / "report.csv";
  write_text(json_path, report.dump(2) + "\n");
  write_text(csv_path, csv.str());
  record({json_path, csv_path});
}

std::vector<std::string> Pipeline::detect(const fs::path& images) {
  require(cfg_.out / kModelFile, "train");
  const Model model = load_model(cfg_.out / kModelFile);
  const FittedDetectors det = load_detectors(cfg_.out);
  std::optional<Dataset> pool;
  if (fs::exists(corpus_images(cfg_.out, kBenign))) pool = load_corpus(cfg_.out, kBenign, model.num_classes());

  const std::vector<Tensor> inputs = load_idx_images(images);
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != model.input_dim()) {
      throw InvalidInput("image width " + std::to_string(inputs[i].size()) + " does not match the model input " +
                         std::to_string(model.input_dim()));
    }
    const Fingerprint fp = fingerprint_one(model, inputs[i], det.defenses, i, kBenign, pool ? &*pool : nullptr);
    const std::vector<double> costs = as_doubles(fp);
    const ZScoreDetector& primary = det.ensemble.members()[det.primary];
    std::ostringstream os;
    os << "image " << i << ": " << to_string(primary.classify(costs[det.primary])) << " (predicted "
       << predict(model, inputs[i].values()).label << ")";
    for (std::size_t c = 0; c < costs.size(); ++c) {
      os << ' ' << det.defenses[c].name << " cost=" << fp.costs[c] << " z=" << std::fixed << std::setprecision(3)
         << det.ensemble.members()[c].z(costs[c]) << std::defaultfloat;
    }
    os << " ensemble=" << to_string(det.ensemble.classify(costs)) << " knn=" << to_string(det.knn.classify(costs));
    lines.push_back(os.str());
  }
  return lines;
}

void Pipeline::sweep() {
  require(cfg_.out / kModelFile, "train");
  if (cfg_.defenses.empty()) throw ConfigError("sweep needs at least one [defense.<name>] section", 0);
  const SweepSection& sw = cfg_.sweep;
  const Model plain = load_model(cfg_.out / kModelFile);
  const auto [train_set, test] = load_data();
  const DefenseAttack defense = cfg_.defenses[cfg_.primary_defense()];
  const std::vector<DefenseAttack> defenses{defense};
  std::vector<fs::path> written;

  std::vector<std::pair<std::string, Model>> models;
  models.emplace_back("plain", plain);
  if (sw.adversarial_training) {
    Architecture arch{{plain.input_dim()}};
    for (const Layer& l : plain.layers()) {
      if (l.kind == LayerKind::Dense) arch.dims.push_back(l.out_dim);
    }
    log_ << "adversarial training on " << std::min(sw.at_train_limit, train_set.size()) << " examples\n";
    TrainResult at = pgd_adversarial_train(arch, train_set.head(sw.at_train_limit, "at"), sw.pgd, sw.at_train);
    const fs::path at_path = cfg_.out / "at_model.a2dm";
    save_model(at.model, at_path);
    written.push_back(at_path);
    log_ << "adversarially trained accuracy " << fmt(accuracy(at.model, test)) << "\n";
    models.emplace_back("pgd", std::move(at.model));
  }

  // Inputs every model labels correctly: the fit set first, then the sweep inputs.
  std::vector<std::size_t> correct;
  for (std::size_t i = 0; i < test.size(); ++i) {
    bool ok = true;
    for (const auto& m : models) ok = ok && predict(m.second, test[i].pixels.values()).label == test[i].label;
    if (ok) correct.push_back(i);
  }
  const Dataset fit = test.subset(slice(correct, 0, sw.benign_fit), "fit");
  const Dataset inputs = test.subset(slice(correct, sw.benign_fit, sw.count), "sweep");
  if (inputs.empty()) throw InvalidInput("no correctly classified held-out inputs left for the sweep");

  log_ << "training autoencoder\n";
  const Model ae_model = train_autoencoder(train_set.head(sw.at_train_limit, "ae"), sw.ae_bottleneck, sw.ae_train,
                                           sw.ae_hidden);
  const AeDetector ae = ae_fit_threshold(ae_model, fit, sw.ae_fpr);
  const fs::path ae_path = cfg_.out / "ae.a2dm";
  save_model(ae.autoencoder(), ae_path);
  written.push_back(ae_path);

  SweepConfig scfg;
  scfg.kappas = sw.kappas;
  scfg.l2_cap = sw.l2_cap;
  scfg.cw = sw.cw;
  scfg.workers = cfg_.workers;

  std::string csv;
  Json results = Json::array();
  for (const auto& [tag, model] : models) {
    const FingerprintBatch benign = fingerprint_batch(model, fit, defenses, cfg_.workers);
    const std::vector<double> costs = column(benign.fingerprints, 0, false);
    const ZScoreDetector z = zscore_fit(costs, cfg_.detector.h);
    SweepDetectors d{defenses, [&z](const Fingerprint& fp) { return z.classify(static_cast<double>(fp.costs[0])); },
                     &ae};
    log_ << "sweeping " << tag << " model over " << scfg.kappas.size() << " kappas x " << inputs.size()
         << " inputs\n";
    const SweepResult r = kappa_sweep(model, inputs, scfg, d, tag);
    const std::string part = sweep_csv(r);
    csv += csv.empty() ? part : part.substr(part.find('\n') + 1);

    Json rows = Json::array();
    for (const SweepRow& row : r.rows) {
      rows.push_back(Json{{"kappa", row.kappa},
                          {"attempted", row.attempted},
                          {"successes", row.successes},
                          {"asr", row.asr},
                          {"mean_l2", row.mean_l2},
                          {"mean_cost", row.mean_cost},
                          {"detect_a2d", row.detect_a2d},
                          {"detect_ae", row.detect_ae},
                          {"detect_combined", row.detect_combined},
                          {"residual_asr_a2d", row.residual_asr_a2d},
                          {"residual_asr_ae", row.residual_asr_ae},
                          {"residual_asr_combined", row.residual_asr_combined}});
    }
    results.push_back(Json{{"model", tag}, {"zscore", to_json(z)}, {"rows", std::move(rows)}});
  }

  Json j;
  j["seed"] = cfg_.seed;
  j["defense"] = Json{{"name", defense.name}, {"config", to_json(defense.config)}};
  j["cw"] = to_json(sw.cw);
  j["l2_cap"] = sw.l2_cap;
  j["ae"] = Json{{"bottleneck", sw.ae_bottleneck}, {"hidden", sw.ae_hidden}, {"tau", ae.tau()}};
  j["results"] = std::move(results);
  const fs::path csv_path = cfg_.out / "sweep.csv";
  const fs::path json_path = cfg_.out / "sweep.json";
  write_text(csv_path, csv);
  write_text(json_path, j.dump(2) + "\n");
  written.insert(written.end(), {csv_path, json_path});
  record(written);
}

void Pipeline::run(Command c) {
  switch (c) {
    case Command::Train: return train();
    case Command::Attack: return attack();
    case Command::Fingerprint: return fingerprint();
    case Command::FitDetector: return fit_detector();
    case Command::Evaluate: return evaluate();
    case Command::Sweep: return sweep();
    case Command::Detect: throw InvalidInput("detect needs an image file");
  }
}

}  // namespace a2d

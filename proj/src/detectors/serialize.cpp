#include "a2d/serialize.hpp"

#include <string>

#include "a2d/error.hpp"

namespace a2d {
namespace {

template <class T>
T field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing JSON field '") + key + "'", 0);
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("JSON field '") + key + "': " + e.what(), 0);
  }
}

Json targeting_json(const Targeting& t) {
  if (std::holds_alternative<Untargeted>(t)) return "untargeted";
  if (const auto* r = std::get_if<TargetRank>(&t)) return Json{{"rank", r->rank}};
  return Json{{"class", std::get<TargetClass>(t).label}};
}

Targeting targeting_from(const Json& j) {
  if (j.is_string() && j.get<std::string>() == "untargeted") return Untargeted{};
  if (j.is_object() && j.contains("rank")) return TargetRank{field<std::size_t>(j, "rank")};
  if (j.is_object() && j.contains("class")) return TargetClass{field<std::size_t>(j, "class")};
  throw FormatError("unrecognised targeting value", 0);
}

}  // namespace

Json to_json(const AttackConfig& c) {
  Json j;
  j["kind"] = std::string(to_string(c.kind));
  j["epsilon"] = c.epsilon;
  j["alpha"] = c.alpha;
  j["max_iter"] = c.max_iter;
  j["theta"] = c.theta;
  j["gamma"] = c.gamma;
  j["mse_threshold"] = c.mse_threshold;
  j["kappa"] = c.kappa;
  j["c"] = c.c;
  j["norm"] = c.fgsm_norm == Norm::Linf ? "linf" : "l2";
  j["targeting"] = targeting_json(c.targeting);
  j["seed"] = c.seed;
  return j;
}

AttackConfig attack_config_from_json(const Json& j) {
  AttackConfig c;
  try {
    c.kind = parse_attack_kind(field<std::string>(j, "kind"));
  } catch (const InvalidInput& e) {
    throw FormatError(e.what(), 0);
  }
  c.epsilon = field<double>(j, "epsilon");
  c.alpha = field<double>(j, "alpha");
  c.max_iter = field<std::size_t>(j, "max_iter");
  c.theta = field<double>(j, "theta");
  c.gamma = field<double>(j, "gamma");
  c.mse_threshold = field<double>(j, "mse_threshold");
  c.kappa = field<double>(j, "kappa");
  c.c = field<double>(j, "c");
  c.fgsm_norm = field<std::string>(j, "norm") == "l2" ? Norm::L2 : Norm::Linf;
  c.targeting = targeting_from(j.at("targeting"));
  c.seed = field<std::uint64_t>(j, "seed");
  return c;
}

Json to_json(const AttackOutcome& o, std::size_t example_id) {
  Json j;
  j["example_id"] = example_id;
  j["success"] = o.success;
  j["iterations"] = o.iterations;
  j["queries"] = o.queries;
  j["source_label"] = o.source_label;
  j["target"] = o.target ? Json(*o.target) : Json(nullptr);
  j["final_label"] = o.final_label;
  j["distortion_l0"] = o.distortion_l0;
  j["distortion_l2"] = o.distortion_l2;
  j["distortion_linf"] = o.distortion_linf;
  return j;
}

Json to_json(const ZScoreDetector& d) {
  return Json{{"boxcox_lambda", d.transform().lambda},
              {"boxcox_offset", d.transform().offset},
              {"mu", d.mu()},
              {"sigma", d.sigma()},
              {"threshold_h", d.threshold()}};
}

ZScoreDetector zscore_from_json(const Json& j) {
  return ZScoreDetector(BoxCox{field<double>(j, "boxcox_lambda"), field<double>(j, "boxcox_offset")},
                        field<double>(j, "mu"), field<double>(j, "sigma"), field<double>(j, "threshold_h"));
}

Json to_json(const EnsembleZ& e) {
  Json members = Json::array();
  for (const ZScoreDetector& m : e.members()) members.push_back(to_json(m));
  return Json{{"vote_k", e.vote_k()}, {"members", members}};
}

EnsembleZ ensemble_from_json(const Json& j) {
  std::vector<ZScoreDetector> members;
  const Json& arr = j.contains("members") ? j.at("members") : Json();
  if (!arr.is_array()) throw FormatError("ensemble 'members' must be an array", 0);
  for (const Json& m : arr) members.push_back(zscore_from_json(m));
  return EnsembleZ(std::move(members), field<std::size_t>(j, "vote_k"));
}

Json to_json(const KnnDetector& k) {
  Json refs = Json::array();
  for (const Fingerprint& fp : k.references()) {
    refs.push_back(Json{{"example_id", fp.example_id}, {"origin", fp.origin}, {"costs", fp.costs}});
  }
  return Json{{"k", k.k()}, {"references", refs}};
}

KnnDetector knn_from_json(const Json& j) {
  std::vector<Fingerprint> refs;
  const Json& arr = j.contains("references") ? j.at("references") : Json();
  if (!arr.is_array()) throw FormatError("knn 'references' must be an array", 0);
  for (const Json& r : arr) {
    Fingerprint fp;
    fp.example_id = field<std::size_t>(r, "example_id");
    fp.origin = field<std::string>(r, "origin");
    fp.costs = field<std::vector<std::uint64_t>>(r, "costs");
    refs.push_back(std::move(fp));
  }
  return KnnDetector(std::move(refs), field<std::size_t>(j, "k"));
}

Json to_json(const DetectionReport& r) {
  Json j;
  j["true_positive"] = r.true_positive;
  j["false_negative"] = r.false_negative;
  j["true_negative"] = r.true_negative;
  j["false_positive"] = r.false_positive;
  j["accuracy_benign"] = r.accuracy_benign;
  j["accuracy_adv"] = r.accuracy_adv;
  j["accuracy"] = r.accuracy;
  j["fpr"] = r.fpr;
  j["tpr"] = r.tpr;
  j["auroc"] = r.auroc ? Json(*r.auroc) : Json(nullptr);
  j["mean_queries_benign"] = r.mean_queries_benign;
  j["mean_queries_adv"] = r.mean_queries_adv;
  return j;
}

}  // namespace a2d

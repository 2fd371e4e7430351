#include "a2d/detectors.hpp"
#include "a2d/error.hpp"

namespace a2d {

DetectionReport evaluate(const FingerprintRule& rule, std::span<const Fingerprint> corpus,
                         const FingerprintScore& score) {
  DetectionReport r;
  double q_benign = 0.0, q_adv = 0.0;
  std::vector<double> s_benign, s_adv;
  for (const Fingerprint& fp : corpus) {
    const bool flagged = rule(fp) == Verdict::Adversarial;
    if (fp.adversarial()) {
      ++(flagged ? r.true_positive : r.false_negative);
      q_adv += static_cast<double>(fp.queries);
      if (score) s_adv.push_back(score(fp));
    } else {
      ++(flagged ? r.false_positive : r.true_negative);
      q_benign += static_cast<double>(fp.queries);
      if (score) s_benign.push_back(score(fp));
    }
  }
  const std::size_t benign = r.true_negative + r.false_positive;
  const std::size_t adv = r.true_positive + r.false_negative;
  if (benign == 0 || adv == 0) throw InvalidInput("evaluation corpus needs both benign and adversarial fingerprints");
  r.accuracy_benign = static_cast<double>(r.true_negative) / static_cast<double>(benign);
  r.accuracy_adv = static_cast<double>(r.true_positive) / static_cast<double>(adv);
  r.accuracy = static_cast<double>(r.true_negative + r.true_positive) / static_cast<double>(benign + adv);
  r.fpr = static_cast<double>(r.false_positive) / static_cast<double>(benign);
  r.tpr = r.accuracy_adv;
  r.mean_queries_benign = q_benign / static_cast<double>(benign);
  r.mean_queries_adv = q_adv / static_cast<double>(adv);
  if (score) r.auroc = auroc(s_benign, s_adv);
  return r;
}

}  // namespace a2d

#include <iomanip>
#include <sstream>

#include "a2d/error.hpp"
#include "a2d/hardening.hpp"
#include "../parallel.hpp"

namespace a2d {
namespace {

struct Cell {
  bool success = false;
  double l2 = 0.0;
  double cost = 0.0;
  bool flag_a2d = false;
  bool flag_ae = false;
};

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

SweepResult kappa_sweep(const Model& model, const Dataset& inputs, const SweepConfig& cfg,
                        const SweepDetectors& detectors, std::string model_tag) {
  if (cfg.kappas.empty()) throw InvalidInput("kappa sweep needs at least one kappa");
  if (!(cfg.l2_cap > 0.0)) throw InvalidInput("l2_cap must be positive");
  if (cfg.cw.kind != AttackKind::CW_L2) throw InvalidInput("kappa sweep crafts examples with a CW_L2 config");
  if (!detectors.a2d || detectors.defenses.empty()) throw InvalidInput("kappa sweep needs an attack-cost detector");

  const std::size_t n = inputs.size();
  std::vector<Cell> cells(cfg.kappas.size() * n);
  detail::parallel_for(cells.size(), cfg.workers, [&](std::size_t idx) {
    const std::size_t k = idx / n;
    const std::size_t i = idx % n;
    AttackConfig cw = cfg.cw;
    cw.kappa = cfg.kappas[k];
    const Example& e = inputs[i];
    const AttackOutcome o = cw_l2(model, e.pixels, cw, e.label);
    Cell& c = cells[idx];
    c.success = o.success && o.distortion_l2 <= cfg.l2_cap;
    if (!c.success) return;
    c.l2 = o.distortion_l2;
    const Fingerprint fp = fingerprint_one(model, *o.adversarial, detectors.defenses, i, "cw");
    c.cost = static_cast<double>(fp.costs.front());
    c.flag_a2d = detectors.a2d(fp) == Verdict::Adversarial;
    c.flag_ae = detectors.ae != nullptr && detectors.ae->classify(o.adversarial->values()) == Verdict::Adversarial;
  });

  SweepResult result;
  result.model_tag = std::move(model_tag);
  for (std::size_t k = 0; k < cfg.kappas.size(); ++k) {
    SweepRow row;
    row.kappa = cfg.kappas[k];
    row.attempted = n;
    std::size_t det_a2d = 0, det_ae = 0, det_any = 0;
    double l2 = 0.0, cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Cell& c = cells[k * n + i];
      if (!c.success) continue;
      ++row.successes;
      l2 += c.l2;
      cost += c.cost;
      det_a2d += c.flag_a2d;
      det_ae += c.flag_ae;
      det_any += c.flag_a2d || c.flag_ae;
    }
    row.asr = ratio(row.successes, n);
    if (row.successes > 0) {
      row.mean_l2 = l2 / static_cast<double>(row.successes);
      row.mean_cost = cost / static_cast<double>(row.successes);
    }
    row.detect_a2d = ratio(det_a2d, row.successes);
    row.detect_ae = ratio(det_ae, row.successes);
    row.detect_combined = ratio(det_any, row.successes);
    row.residual_asr_a2d = ratio(row.successes - det_a2d, n);
    row.residual_asr_ae = ratio(row.successes - det_ae, n);
    row.residual_asr_combined = ratio(row.successes - det_any, n);
    result.rows.push_back(row);
  }
  return result;
}

std::string sweep_csv(const SweepResult& r) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "model,kappa,attempted,successes,asr,mean_l2,mean_cost,detect_a2d,detect_ae,detect_combined,"
        "residual_asr_a2d,residual_asr_ae,residual_asr_combined\n";
  for (const SweepRow& row : r.rows) {
    os << r.model_tag << ',' << row.kappa << ',' << row.attempted << ',' << row.successes << ',' << row.asr << ','
       << row.mean_l2 << ',' << row.mean_cost << ',' << row.detect_a2d << ',' << row.detect_ae << ','
       << row.detect_combined << ',' << row.residual_asr_a2d << ',' << row.residual_asr_ae << ','
       << row.residual_asr_combined << '\n';
  }
  return os.str();
}

}  // namespace a2d

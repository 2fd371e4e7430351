#include "a2d/fingerprint.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "a2d/error.hpp"
#include "parallel.hpp"

namespace a2d {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finaliser over the combined words
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Fingerprint fingerprint_one(const Model& model, const Tensor& x, std::span<const DefenseAttack> defenses,
                            std::size_t example_id, std::string origin, const Dataset* pool) {
  Fingerprint fp;
  fp.example_id = example_id;
  fp.origin = std::move(origin);
  fp.costs.reserve(defenses.size());
  for (const DefenseAttack& d : defenses) {
    AttackConfig cfg = d.config;
    cfg.seed = mix_seed(cfg.seed, example_id);
    const AttackOutcome o = run_attack(model, x, cfg, std::nullopt, pool);
    fp.costs.push_back(o.success ? o.iterations : cfg.max_iter);
    fp.queries += o.queries;
  }
  return fp;
}

FingerprintBatch fingerprint_batch(const Model& model, const Dataset& data, std::span<const DefenseAttack> defenses,
                                   std::size_t workers, const std::string& origin, std::size_t first_id,
                                   const Dataset* pool) {
  for (const DefenseAttack& d : defenses) d.config.validate();
  FingerprintBatch out;
  out.fingerprints.resize(data.size());
  detail::parallel_for(data.size(), workers, [&](std::size_t i) {
    out.fingerprints[i] = fingerprint_one(model, data[i].pixels, defenses, first_id + i, origin, pool);
  });
  for (const Fingerprint& fp : out.fingerprints) out.total_queries += fp.queries;
  return out;
}

std::vector<double> mean_costs(std::span<const Fingerprint> fps) {
  if (fps.empty()) throw InvalidInput("mean of an empty fingerprint set");
  std::vector<double> m(fps.front().costs.size(), 0.0);
  for (const Fingerprint& fp : fps) {
    if (fp.costs.size() != m.size()) throw InvalidInput("fingerprints have different lengths");
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += static_cast<double>(fp.costs[j]);
  }
  for (double& v : m) v /= static_cast<double>(fps.size());
  return m;
}

namespace {

double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

DistanceMatrix set_distance_matrix(std::span<const FingerprintGroup> groups, std::uint64_t seed) {
  if (groups.size() < 2) throw InvalidInput("set distances need at least two groups");
  DistanceMatrix dm;
  std::vector<std::vector<double>> means;
  for (const FingerprintGroup& g : groups) {
    if (g.members.empty()) throw InvalidInput("fingerprint group '" + g.name + "' is empty");
    dm.names.push_back(g.name);
    means.push_back(mean_costs(g.members));
    if (means.back().size() != means.front().size()) throw InvalidInput("groups use different defense counts");
  }
  const std::size_t n = groups.size();
  dm.values.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dm.values[i * n + j] = dm.values[j * n + i] = euclid(means[i], means[j]);
    }
    const auto& members = groups[i].members;
    if (members.size() < 2) continue;
    std::vector<std::size_t> order(members.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(mix_seed(seed, i));
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t half = members.size() / 2;
    std::vector<Fingerprint> a, b;
    for (std::size_t k = 0; k < order.size(); ++k) (k < half ? a : b).push_back(members[order[k]]);
    dm.values[i * n + i] = euclid(mean_costs(a), mean_costs(b));
  }
  return dm;
}

std::string fingerprints_csv(std::span<const Fingerprint> fps, std::span<const std::string> defense_names) {
  std::ostringstream os;
  os << "example_id,origin";
  for (const std::string& name : defense_names) os << ",cost_" << name;
  os << ",queries\n";
  for (const Fingerprint& fp : fps) {
    if (fp.costs.size() != defense_names.size()) throw InvalidInput("fingerprint length does not match defenses");
    os << fp.example_id << ',' << fp.origin;
    for (std::uint64_t c : fp.costs) os << ',' << c;
    os << ',' << fp.queries << '\n';
  }
  return os.str();
}

void write_fingerprints_csv(const std::filesystem::path& path, std::span<const Fingerprint> fps,
                            std::span<const std::string> defense_names) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << fingerprints_csv(fps, defense_names);
  if (!f) throw Error("failed writing " + path.string());
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::uint64_t parse_count(const std::string& s, std::size_t line) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw FormatError("expected a non-negative integer, got '" + s + "'", line);
  }
  return std::stoull(s);
}

}  // namespace

FingerprintTable read_fingerprints_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw MissingArtifact("fingerprint file " + path.string() + " not found; run the fingerprint command first");
  FingerprintTable table;
  std::string line;
  if (!std::getline(f, line)) throw FormatError("empty fingerprint file", 1);
  const auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "example_id" || header[1] != "origin" || header.back() != "queries") {
    throw FormatError("fingerprint header must be example_id,origin,cost_...,queries", 1);
  }
  for (std::size_t i = 2; i + 1 < header.size(); ++i) {
    if (header[i].rfind("cost_", 0) != 0) throw FormatError("column '" + header[i] + "' is not a cost column", 1);
    table.defense_names.push_back(header[i].substr(5));
  }
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw FormatError("row has the wrong number of columns", lineno);
    Fingerprint fp;
    fp.example_id = parse_count(cells[0], lineno);
    fp.origin = cells[1];
    for (std::size_t i = 2; i + 1 < cells.size(); ++i) fp.costs.push_back(parse_count(cells[i], lineno));
    fp.queries = parse_count(cells.back(), lineno);
    table.fingerprints.push_back(std::move(fp));
  }
  return table;
}

}  // namespace a2d

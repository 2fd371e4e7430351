#include "a2d/config.hpp"

#include <charconv>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "a2d/checksum.hpp"
#include "a2d/error.hpp"

namespace a2d {

SweepSection::SweepSection() {
  pgd = defense_defaults(AttackKind::BIM_Linf);
  pgd.epsilon = 0.1;
  pgd.alpha = 0.02;
  pgd.max_iter = 7;
}

std::size_t RunConfig::primary_defense() const {
  if (defenses.empty()) throw ConfigError("config has no [defense.<name>] sections", 0);
  if (detector.defense.empty()) return 0;
  for (std::size_t i = 0; i < defenses.size(); ++i) {
    if (defenses[i].name == detector.defense) return i;
  }
  throw ConfigError("[detector] defense '" + detector.defense + "' has no [defense." + detector.defense + "] section",
                    detector.defense_line);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Entry {
  std::string key;
  std::string value;
  std::size_t line;
};

struct Section {
  std::string name;
  std::size_t line;
  std::vector<Entry> entries;
};

class Values {
 public:
  explicit Values(const Entry& e) : e_(e) {}

  [[noreturn]] void fail(const std::string& expected) const {
    throw ConfigError("key '" + e_.key + "' expects " + expected + ", got '" + e_.value + "'", e_.line);
  }

  double real() const {
    double v = 0.0;
    const char* b = e_.value.data();
    const char* end = b + e_.value.size();
    auto [p, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || p != end) fail("a number");
    return v;
  }

  std::uint64_t count() const {
    std::uint64_t v = 0;
    const char* b = e_.value.data();
    const char* end = b + e_.value.size();
    auto [p, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || p != end) fail("a non-negative integer");
    return v;
  }

  bool boolean() const {
    if (e_.value == "true" || e_.value == "1" || e_.value == "yes") return true;
    if (e_.value == "false" || e_.value == "0" || e_.value == "no") return false;
    fail("true or false");
  }

  template <class T, class Parse>
  std::vector<T> list(Parse parse) const {
    std::vector<T> out;
    std::stringstream ss(e_.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      Entry sub{e_.key, trim(item), e_.line};
      out.push_back(parse(Values(sub)));
    }
    if (out.empty()) fail("a comma-separated list");
    return out;
  }

  const std::string& text() const { return e_.value; }

 private:
  Entry e_;
};

[[noreturn]] void unknown_key(const Entry& e, const std::string& section) {
  throw ConfigError("unknown key '" + e.key + "' in [" + section + "]", e.line);
}

Targeting parse_target(const Values& v) {
  const std::string& t = v.text();
  if (t == "untargeted") return Untargeted{};
  auto number = [&](std::size_t pos) {
    std::size_t n = 0;
    const char* b = t.data() + pos;
    const char* end = t.data() + t.size();
    auto [p, ec] = std::from_chars(b, end, n);
    if (ec != std::errc() || p != end || b == end) v.fail("untargeted, rank:<r> or class:<c>");
    return n;
  };
  if (t.rfind("rank:", 0) == 0) return TargetRank{number(5)};
  if (t.rfind("class:", 0) == 0) return TargetClass{number(6)};
  v.fail("untargeted, rank:<r> or class:<c>");
}

DefenseAttack parse_attack(const Section& s, const std::string& name, bool defense) {
  AttackKind kind;
  std::size_t kind_line = s.line;
  std::string kind_name = name;
  for (const Entry& e : s.entries) {
    if (e.key == "kind") {
      kind_name = e.value;
      kind_line = e.line;
    }
  }
  try {
    kind = parse_attack_kind(kind_name);
  } catch (const InvalidInput& ex) {
    throw ConfigError(std::string(ex.what()) + "; set 'kind' in [" + s.name + "]", kind_line);
  }
  AttackConfig c = defense ? defense_defaults(kind) : generation_defaults(kind);
  for (const Entry& e : s.entries) {
    const Values v(e);
    if (e.key == "kind") continue;
    if (e.key == "epsilon") c.epsilon = v.real();
    else if (e.key == "alpha") c.alpha = v.real();
    else if (e.key == "max_iter") c.max_iter = v.count();
    else if (e.key == "theta") c.theta = v.real();
    else if (e.key == "gamma") c.gamma = v.real();
    else if (e.key == "mse_threshold") c.mse_threshold = v.real();
    else if (e.key == "kappa") c.kappa = v.real();
    else if (e.key == "c") c.c = v.real();
    else if (e.key == "norm") {
      if (e.value == "linf") c.fgsm_norm = Norm::Linf;
      else if (e.value == "l2") c.fgsm_norm = Norm::L2;
      else v.fail("linf or l2");
    } else if (e.key == "target") c.targeting = parse_target(v);
    else unknown_key(e, s.name);
  }
  try {
    c.validate();
  } catch (const InvalidInput& ex) {
    throw ConfigError(std::string("[") + s.name + "] " + ex.what(), s.line);
  }
  return DefenseAttack{name, c};
}

void parse_train_key(TrainConfig& t, const Entry& e, const std::string& prefix, bool& matched) {
  const Values v(e);
  matched = true;
  if (e.key == prefix + "learning_rate") t.learning_rate = v.real();
  else if (e.key == prefix + "epochs") t.epochs = v.count();
  else if (e.key == prefix + "batch_size") t.batch_size = v.count();
  else if (e.key == prefix + "weight_init_scale") t.weight_init_scale = v.real();
  else matched = false;
}

void check_train(const TrainConfig& t, const Section& s) {
  try {
    t.validate();
  } catch (const InvalidInput& ex) {
    throw ConfigError("[" + s.name + "] " + ex.what(), s.line);
  }
}

std::vector<Section> tokenize(std::string_view text, Section& globals) {
  std::vector<Section> sections;
  Section* current = &globals;
  std::set<std::string> seen;
  std::istringstream is{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const auto hash = raw.find_first_of("#;");
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header '" + line + "'", lineno);
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (!seen.insert(name).second) throw ConfigError("duplicate section [" + name + "]", lineno);
      sections.push_back(Section{name, lineno, {}});
      current = &sections.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value, got '" + line + "'", lineno);
    Entry e{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno};
    if (e.key.empty()) throw ConfigError("missing key before '='", lineno);
    for (const Entry& prev : current->entries) {
      if (prev.key == e.key) throw ConfigError("duplicate key '" + e.key + "'", lineno);
    }
    current->entries.push_back(std::move(e));
  }
  return sections;
}

std::string attack_name(const std::string& section, std::size_t prefix, std::size_t line) {
  std::string name = section.substr(prefix);
  if (name.empty() || name.find_first_of(" \t,") != std::string::npos) {
    throw ConfigError("section [" + section + "] needs a name without spaces or commas", line);
  }
  return name;
}

}  // namespace

RunConfig parse_config(std::string_view text, const ConfigOverrides& overrides) {
  RunConfig cfg;
  cfg.source_text = std::string(text);
  Section globals{"", 0, {}};
  const std::vector<Section> sections = tokenize(text, globals);

  for (const Entry& e : globals.entries) {
    const Values v(e);
    if (e.key == "seed") cfg.seed = v.count();
    else if (e.key == "out") cfg.out = e.value;
    else if (e.key == "workers") cfg.workers = v.count();
    else throw ConfigError("unknown global key '" + e.key + "'", e.line);
  }

  for (const Section& s : sections) {
    if (s.name.rfind("attack.", 0) == 0) {
      cfg.attacks.push_back(parse_attack(s, attack_name(s.name, 7, s.line), false));
    } else if (s.name.rfind("defense.", 0) == 0) {
      cfg.defenses.push_back(parse_attack(s, attack_name(s.name, 8, s.line), true));
    } else if (s.name == "data") {
      for (const Entry& e : s.entries) {
        const Values v(e);
        if (e.key == "dir") cfg.data.dir = e.value;
        else if (e.key == "train_images") cfg.data.train_images = e.value;
        else if (e.key == "train_labels") cfg.data.train_labels = e.value;
        else if (e.key == "test_images") cfg.data.test_images = e.value;
        else if (e.key == "test_labels") cfg.data.test_labels = e.value;
        else if (e.key == "train_limit") cfg.data.train_limit = v.count();
        else if (e.key == "benign_count") cfg.data.benign_count = v.count();
        else if (e.key == "adv_count") cfg.data.adv_count = v.count();
        else if (e.key == "synthetic") cfg.data.synthetic = v.boolean();
        else if (e.key == "synthetic_dim") cfg.data.synthetic_dim = v.count();
        else unknown_key(e, s.name);
      }
    } else if (s.name == "model") {
      for (const Entry& e : s.entries) {
        bool matched = false;
        parse_train_key(cfg.model.train, e, "", matched);
        if (matched) continue;
        if (e.key == "hidden") {
          cfg.model.hidden = Values(e).list<std::size_t>([](const Values& x) { return x.count(); });
          for (std::size_t h : cfg.model.hidden) {
            if (h == 0) throw ConfigError("hidden layer widths must be positive", e.line);
          }
        } else {
          unknown_key(e, s.name);
        }
      }
      check_train(cfg.model.train, s);
    } else if (s.name == "detector") {
      for (const Entry& e : s.entries) {
        const Values v(e);
        if (e.key == "defense") {
          cfg.detector.defense = e.value;
          cfg.detector.defense_line = e.line;
        } else if (e.key == "h") cfg.detector.h = v.real();
        else if (e.key == "vote_k") cfg.detector.vote_k = v.count();
        else if (e.key == "k") cfg.detector.k = v.count();
        else if (e.key == "fit_fraction") cfg.detector.fit_fraction = v.real();
        else unknown_key(e, s.name);
      }
      if (!(cfg.detector.fit_fraction > 0.0 && cfg.detector.fit_fraction < 1.0)) {
        throw ConfigError("[detector] fit_fraction must lie in (0, 1)", s.line);
      }
      if (cfg.detector.k == 0) throw ConfigError("[detector] k must be positive", s.line);
      if (cfg.detector.vote_k == 0) throw ConfigError("[detector] vote_k must be positive", s.line);
    } else if (s.name == "sweep") {
      SweepSection& w = cfg.sweep;
      for (const Entry& e : s.entries) {
        const Values v(e);
        bool matched = false;
        parse_train_key(w.ae_train, e, "ae_", matched);
        if (matched) continue;
        parse_train_key(w.at_train, e, "at_", matched);
        if (matched) continue;
        if (e.key == "kappas") w.kappas = v.list<double>([](const Values& x) { return x.real(); });
        else if (e.key == "l2_cap") w.l2_cap = v.real();
        else if (e.key == "count") w.count = v.count();
        else if (e.key == "benign_fit") w.benign_fit = v.count();
        else if (e.key == "c") w.cw.c = v.real();
        else if (e.key == "alpha") w.cw.alpha = v.real();
        else if (e.key == "max_iter") w.cw.max_iter = v.count();
        else if (e.key == "target") w.cw.targeting = parse_target(v);
        else if (e.key == "ae_fpr") w.ae_fpr = v.real();
        else if (e.key == "ae_bottleneck") w.ae_bottleneck = v.count();
        else if (e.key == "ae_hidden") w.ae_hidden = v.count();
        else if (e.key == "adversarial_training") w.adversarial_training = v.boolean();
        else if (e.key == "pgd_epsilon") w.pgd.epsilon = v.real();
        else if (e.key == "pgd_alpha") w.pgd.alpha = v.real();
        else if (e.key == "pgd_steps") w.pgd.max_iter = v.count();
        else if (e.key == "at_train_limit") w.at_train_limit = v.count();
        else unknown_key(e, s.name);
      }
      for (double k : w.kappas) {
        if (!(k >= 0.0)) throw ConfigError("[sweep] kappas must be >= 0", s.line);
      }
      if (!(w.l2_cap > 0.0)) throw ConfigError("[sweep] l2_cap must be positive", s.line);
      if (!(w.ae_fpr >= 0.0 && w.ae_fpr < 1.0)) throw ConfigError("[sweep] ae_fpr must lie in [0, 1)", s.line);
      check_train(w.ae_train, s);
      check_train(w.at_train, s);
      try {
        w.cw.validate();
        w.pgd.validate();
      } catch (const InvalidInput& ex) {
        throw ConfigError(std::string("[sweep] ") + ex.what(), s.line);
      }
    } else {
      throw ConfigError("unknown section [" + s.name + "]", s.line);
    }
  }

  if (overrides.seed) cfg.seed = *overrides.seed;
  if (overrides.out) cfg.out = *overrides.out;
  if (overrides.workers) cfg.workers = *overrides.workers;
  if (overrides.data_dir) cfg.data.dir = *overrides.data_dir;
  if (cfg.workers == 0) throw ConfigError("workers must be at least 1", 0);

  cfg.model.train.seed = cfg.seed;
  cfg.sweep.ae_train.seed = mix_seed(cfg.seed, 1);
  cfg.sweep.at_train.seed = mix_seed(cfg.seed, 2);
  cfg.sweep.cw.seed = cfg.seed;
  for (auto& a : cfg.attacks) a.config.seed = cfg.seed;
  for (auto& d : cfg.defenses) d.config.seed = cfg.seed;
  if (!cfg.defenses.empty() && !cfg.detector.defense.empty()) cfg.primary_defense();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path.string(), 0);
  const std::string text(std::istreambuf_iterator<char>(f), {});
  return parse_config(text, overrides);
}

std::string config_hash(const RunConfig& cfg, const ConfigOverrides& overrides) {
  std::ostringstream os;
  os << cfg.source_text << "\n--\n";
  if (overrides.seed) os << "seed=" << *overrides.seed << '\n';
  if (overrides.out) os << "out=" << overrides.out->string() << '\n';
  if (overrides.workers) os << "workers=" << *overrides.workers << '\n';
  if (overrides.data_dir) os << "data_dir=" << overrides.data_dir->string() << '\n';
  return sha256_hex(os.str());
}

}  // namespace a2d

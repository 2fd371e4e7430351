#pragma once
// Config-driven pipeline behind the command-line tool. Every command reads
// its inputs from and writes its artifacts to the configured output
// directory, then refreshes manifest.json there:
//
//   train         model.a2dm, train_history.csv
//   attack        corpora/<name>-{images,labels}.idx + <name>.json, benign likewise
//   fingerprint   fingerprints.csv
//   fit-detector  detector.json
//   evaluate      report.json, report.csv
//   sweep         ae.a2dm, [at_model.a2dm], sweep.csv, sweep.json
//   detect        nothing; prints one verdict line per image

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "a2d/config.hpp"
#include "a2d/data.hpp"

namespace a2d {

enum class Command { Train, Attack, Fingerprint, FitDetector, Detect, Evaluate, Sweep };

std::string_view to_string(Command c);
Command parse_command(std::string_view name);  // throws InvalidInput

class Pipeline {
 public:
  // `log` receives progress lines; artifacts never contain timing data.
  Pipeline(RunConfig cfg, std::string config_hash, std::ostream& log);

  const RunConfig& config() const noexcept { return cfg_; }
  const std::filesystem::path& out() const noexcept { return cfg_.out; }

  void train();
  void attack();
  void fingerprint();
  void fit_detector();
  void evaluate();
  void sweep();
  // One line per image in the IDX file.
  std::vector<std::string> detect(const std::filesystem::path& images);

  // Dispatches every command except detect.
  void run(Command c);

 private:
  std::pair<Dataset, Dataset> load_data() const;
  void record(const std::vector<std::filesystem::path>& written);

  RunConfig cfg_;
  std::string hash_;
  std::ostream& log_;
};

}  // namespace a2d

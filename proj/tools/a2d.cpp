#include <CLI11.hpp>

#include <iostream>

#include "a2d/config.hpp"
#include "a2d/error.hpp"
#include "a2d/pipeline.hpp"

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kMissing = 3 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attack-cost adversarial example detection"};
  std::string command;
  std::string image;
  std::string config_path;
  a2d::ConfigOverrides ov;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::string out;
  std::string data_dir;

  app.add_option("command", command, "train | attack | fingerprint | fit-detector | detect | evaluate | sweep")
      ->required();
  app.add_option("image", image, "IDX image file (detect only)");
  app.add_option("-c,--config", config_path, "INI run configuration");
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  auto* workers_opt = app.add_option("--workers", workers, "Worker threads for attacks and fingerprints")
                          ->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out", out, "Output directory");
  auto* data_opt = app.add_option("--data-dir", data_dir, "Directory with the MNIST IDX files (or $A2D_DATA_DIR)");
  CLI11_PARSE(app, argc, argv);

  if (*seed_opt) ov.seed = seed;
  if (*workers_opt) ov.workers = workers;
  if (*out_opt) ov.out = out;
  if (*data_opt) ov.data_dir = data_dir;

  try {
    const a2d::Command cmd = a2d::parse_command(command);
    a2d::RunConfig cfg = config_path.empty() ? a2d::parse_config("", ov) : a2d::load_config(config_path, ov);
    const std::string hash = a2d::config_hash(cfg, ov);
    a2d::Pipeline p(std::move(cfg), hash, std::cerr);
    if (cmd == a2d::Command::Detect) {
      if (image.empty()) {
        std::cerr << "error: detect needs an IDX image file\n";
        return kUsage;
      }
      for (const std::string& line : p.detect(image)) std::cout << line << '\n';
    } else {
      if (!image.empty()) {
        std::cerr << "error: only detect takes an image argument\n";
        return kUsage;
      }
      p.run(cmd);
    }
  } catch (const a2d::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const a2d::MissingArtifact& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kMissing;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}

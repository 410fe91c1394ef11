#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "saussol/maps.hpp"
#include "saussol/osc.hpp"
#include "saussol/process.hpp"
#include "saussol/transfer.hpp"

namespace saussol {

struct ProcessConfig {
  std::string kind = "iid";  // "iid" | "markov"
  std::vector<double> probabilities{1.0};
  std::vector<std::vector<double>> transition;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  std::string name;
  // family: either a built-in name or explicit branches; alpha/eps0/S always
  // resolved into `family`
  MapFamily family;
  std::string familyBuiltin;  // empty for custom families
  ProcessConfig process;

  int gridN = 128;
  Backend backend = Backend::Ulam;

  int ladderSize = 16;
  double ladderRatio = 0.75;

  // ly section
  int lyRandomBoxes = 30;
  int lyTrigSamples = 20;
  std::uint64_t lyEnsembleSeed = 7;
  double xi = 0.75;
  bool runVerifyLy = true;

  // density section
  long sMax = 256;
  double tolL1 = 1e-6;

  // analysis section
  std::vector<std::int64_t> anchors{0};
  long kMax = 200;
  long normStride = 10;
  double clusterTol = 0.05;
  int partitionPerAxis = 2;
  int randomBoxes = 4;
  int numX0 = 100;
  long birkhoffN = 10000;

  std::string outputDir = "out";

  OscParams oscParams() const;
  BaseProcess buildProcess(std::uint64_t seedOverride = 0) const;
};

// Parses and validates a JSON config file; error messages carry the JSON path
// of the offending entry.
ExperimentConfig loadConfig(const std::string& path);

// Stable content hash of the config file (whitespace-insensitive: hashes the
// canonical serialization).
std::uint64_t configHash(const std::string& path);

struct RunManifest {
  std::string subcommand;
  std::string configPath;
  std::uint64_t configHash = 0;
  std::uint64_t seedOverride = 0;
  int threads = 1;
  std::vector<std::string> artifacts;  // paths relative to the manifest
};

void saveManifest(const RunManifest& m, const std::string& path);
RunManifest loadManifest(const std::string& path);

}  // namespace saussol

#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chsd/config.hpp"
#include "chsd/output.hpp"
#include "chsd/stepper.hpp"

namespace chsd {

/// Exclusive claim on an output directory through a `.lock` file; refuses to
/// start when the file already exists.
class RunLock {
 public:
  explicit RunLock(const std::string& dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct RunSummary {
  RunResult result;
  std::string csv_path;
  std::vector<std::string> snapshots;
};

using ProgressCallback = std::function<void(const StepReport&)>;

/// Runs a validated config end to end: output directory, lock, `run_status`
/// marker, time series, config echo (`config.used`) and snapshots at step 0,
/// every snapshot_every steps and at the final step.
RunSummary run_config(const Config& config, const ProgressCallback& progress = {});

struct ConvergenceResult {
  std::vector<double> dts;
  /// ||phi_{dt_i}(T) - phi_{dt_{i+1}}(T)||_L2.
  std::vector<double> differences;
  /// differences[i] / differences[i + 1]; empty when exact.
  std::vector<double> ratios;
  /// Every difference is at roundoff level; the order is undefined.
  bool exact = false;
  /// Differences strictly decrease.
  bool monotone = false;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Self-convergence in time: the same config at each dt (largest first, each
/// halving the previous), compared at T. Writes no files.
ConvergenceResult self_convergence(const Config& config, const std::vector<double>& dt_list);
/// As above over prepared configs; rejects mismatched seed, initial
/// condition, mesh or final time.
ConvergenceResult self_convergence(const std::vector<Config>& configs);

/// Final phase field of a run without output files.
State run_quiet(const Config& config);

/// L2 norm of a field on the phase space.
double phase_l2(const SpaceSet& spaces, const Vector& phi);

}  // namespace chsd

#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chsd/darcy.hpp"
#include "chsd/stepper.hpp"

namespace chsd {

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact CSV header of the time series.
inline constexpr const char* kTimeseriesHeader =
    "step,t,dt,E,D_darcy,D_visc,D_mobility,D_bjsj,mass,mass_drift,div_defect,z_norm,"
    "picard_iters,slack";

/// Shortest decimal that round-trips to the same double.
std::string format_number(double x);

/// One CSV row; mass_drift is |mass_after - m0|.
std::string timeseries_row(const StepReport& r, double m0);

/// Incremental time-series writer; every row is flushed so a failed run keeps
/// its accepted steps. m0 is taken from the first report's mass_before.
class TimeseriesWriter {
 public:
  explicit TimeseriesWriter(const std::string& path);
  void append(const StepReport& report);

 private:
  std::string path_;
  std::ofstream out_;
  std::optional<double> m0_;
};

void write_timeseries(const std::vector<StepReport>& reports, const std::string& path);

/// Legacy VTK ASCII unstructured grid on the mesh vertices (P2 fields are
/// sampled at vertices only). P is P_m wherever the matrix pressure lives,
/// P_c elsewhere; u is u_c wherever the conduit velocity lives, otherwise the
/// mean of the Darcy cell averages of the adjacent matrix cells.
void write_snapshot(const std::string& path, const State& state, const SpaceSet& spaces,
                    const DarcyField& um);

}  // namespace chsd

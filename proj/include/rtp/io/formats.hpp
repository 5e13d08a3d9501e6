#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtp/core/density.hpp"
#include "rtp/core/lattice.hpp"

namespace rtp::io {

/// Shortest-safe text for a double: 17 significant digits, exact round trip.
std::string format_real(double v);

/// Snapshot rows `t,x_index,sigma,count` (all sites, both layers).
void write_snapshot_csv(std::ostream& out, double t, const LatticeConfiguration& cfg);
/// Rows `t,m`.
void write_series_csv(std::ostream& out, const std::vector<double>& times, const std::vector<double>& values);
/// Rows `t,x_index,sigma,value`, one block per slice.
void write_trajectory_csv(std::ostream& out, const DensityTrajectory& traj);

/// Reads `t,x_index,sigma,value`. Times must form a uniform grid from 0 and
/// every (x, sigma) must be present on each slice. Throws ConfigurationError.
DensityTrajectory read_trajectory_csv(std::istream& in);
DensityTrajectory read_trajectory_csv(const std::filesystem::path& path);
/// A single field: `x_index,sigma,value`, or the trajectory format (slice t = 0 is used).
DensityField read_density_csv(const std::filesystem::path& path);

/// Named profiles: `uniform(a,b)` gives rho(., +1) = a and rho(., -1) = b;
/// `sine(mean,amp,layer)` gives mean + amp sin(2 pi x) on `layer` (+1 or -1)
/// and `mean` on the other layer. Throws ConfigurationError on bad syntax.
DensityField::Profile parse_profile(const std::string& text);
bool is_named_profile(const std::string& text);

/// Inline JSON if the argument starts with '{', otherwise a JSON file path.
nlohmann::json load_json_argument(const std::string& arg);

}  // namespace rtp::io

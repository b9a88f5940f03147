#pragma once

#include "tagprof/cluster.hpp"
#include "tagprof/stats.hpp"

#include <iosfwd>

namespace tagprof {

/// Reachability bar plot in ordering position; undefined bars are drawn at
/// the top of the axis and `eps_cut` as a horizontal line.
void write_reachability_svg(std::ostream& out, const ReachabilityOrdering& ordering, double eps_cut);

/// Genre coordinates on the first two principal components.
void write_projection_svg(std::ostream& out, const ProfileProjection& projection);

/// Heat map of normalized genre profiles (genres by traits).
void write_profiles_svg(std::ostream& out, const std::vector<GenreProfile>& profiles);

}  // namespace tagprof

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nicons/analysis.hpp"
#include "nicons/sim.hpp"

namespace nicons {

// Column names: t, x_plant_<i>_<k>..., x_ctrl_<i>_<k>..., Y1_<i>_<k>...,
// Y2_<i>_<k>..., Ydot1_<i>_<k>..., then edge_max, all_pairs_max when a
// consensus series is supplied. Nodes are numbered from 1.
std::vector<std::string> trajectory_csv_header(const Layout& layout, bool with_consensus);

// `consensus`, when non-null, must have one entry per sample.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<ConsensusPoint>* consensus = nullptr);

// Per-node plant outputs against time as SVG polylines.
void write_outputs_svg(std::ostream& os, const Trajectory& traj, const std::string& title);

}  // namespace nicons

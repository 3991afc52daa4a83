#include "nicons/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace nicons {

namespace {

void put_number(std::ostream& os, double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  os.write(buf.data(), res.ptr - buf.data());
}

void put_vector(std::ostream& os, const Vec& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    os << ',';
    put_number(os, v(k));
  }
}

}  // namespace

std::vector<std::string> trajectory_csv_header(const Layout& layout, bool with_consensus) {
  std::vector<std::string> cols{"t"};
  auto per_node = [&](const std::string& prefix, std::size_t width) {
    for (std::size_t i = 0; i < layout.nodes; ++i)
      for (std::size_t k = 0; k < width; ++k)
        cols.push_back(prefix + "_" + std::to_string(i + 1) + "_" + std::to_string(k));
  };
  per_node("x_plant", layout.plant_states);
  per_node("x_ctrl", layout.ctrl_states);
  per_node("Y1", layout.io_dim);
  per_node("Y2", layout.io_dim);
  per_node("Ydot1", layout.io_dim);
  if (with_consensus) {
    cols.emplace_back("edge_max");
    cols.emplace_back("all_pairs_max");
  }
  return cols;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<ConsensusPoint>* consensus) {
  if (consensus && consensus->size() != traj.size()) {
    throw std::invalid_argument("consensus series length differs from the trajectory");
  }
  const auto header = trajectory_csv_header(traj.layout, consensus != nullptr);
  for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
  os << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Signals& s = traj.samples[k];
    put_number(os, traj.times[k]);
    put_vector(os, s.x);
    put_vector(os, s.plant_outputs);
    put_vector(os, s.net_outputs);
    put_vector(os, s.plant_output_rates);
    if (consensus) {
      os << ',';
      put_number(os, (*consensus)[k].edge_max);
      os << ',';
      put_number(os, (*consensus)[k].all_pairs_max);
    }
    os << '\n';
  }
}

void write_outputs_svg(std::ostream& os, const Trajectory& traj, const std::string& title) {
  constexpr double kWidth = 800, kHeight = 450, kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
  constexpr std::array<const char*, 8> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                  "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  const std::size_t series = traj.layout.nodes * traj.layout.io_dim;
  double t0 = 0, t1 = 1, lo = -1, hi = 1;
  if (traj.size() > 0) {
    t0 = traj.times.front();
    t1 = std::max(traj.times.back(), t0 + 1e-12);
    lo = hi = traj.samples.front().plant_outputs(0);
    for (const Signals& s : traj.samples) {
      lo = std::min(lo, s.plant_outputs.minCoeff());
      hi = std::max(hi, s.plant_outputs.maxCoeff());
    }
    if (hi - lo < 1e-12) {
      lo -= 1;
      hi += 1;
    }
  }
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double t) { return kLeft + pw * (t - t0) / (t1 - t0); };
  auto sy = [&](double y) { return kTop + ph * (hi - y) / (hi - lo); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title
     << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double t = t0 + (t1 - t0) * k / 4.0;
    const double y = lo + (hi - lo) * k / 4.0;
    os << "<text x=\"" << sx(t) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">" << t << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy(y) + 4 << "\" text-anchor=\"end\">" << y << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">Time (s)</text>\n";
  os << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" transform=\"rotate(-90 16 " << kTop + ph / 2
     << ")\" text-anchor=\"middle\">Output</text>\n";

  const std::size_t stride = std::max<std::size_t>(1, traj.size() / 2000);
  for (std::size_t c = 0; c < series; ++c) {
    os << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << kColors[c % kColors.size()]
       << "\" points=\"";
    for (std::size_t k = 0; k < traj.size(); k += stride) {
      os << sx(traj.times[k]) << ',' << sy(traj.samples[k].plant_outputs(c)) << ' ';
    }
    if (traj.size() > 0 && (traj.size() - 1) % stride != 0) {
      os << sx(traj.times.back()) << ',' << sy(traj.samples.back().plant_outputs(c));
    }
    os << "\"/>\n";
    os << "<text x=\"" << kLeft + 10 << "\" y=\"" << kTop + 16 + 14 * c << "\" fill=\""
       << kColors[c % kColors.size()] << "\">Node " << c / traj.layout.io_dim + 1 << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace nicons

#pragma once

#include <string>
#include <vector>

#include "blocklab/sweep.hpp"
#include "blocklab/training.hpp"

namespace blocklab {

// Reward-vs-iteration curve; one polyline vertex per iteration with a
// mean reward. The parsed data table is embedded in an SVG comment so the
// figure is auditable without a plotting toolchain. Output is a pure
// function of the input.
std::string curve_svg(const std::vector<IterationStats>& series, const std::string& title);

// h x p heatmaps of training_reward and convergence_iteration. Cells
// without a convergence iteration are drawn with an "X" marker; failed
// cells are hatched. `metric` selects "training_reward" or
// "convergence_iteration".
std::string heatmap_svg(const std::vector<SweepResult>& results, const std::string& metric,
                        const std::string& title);

}  // namespace blocklab

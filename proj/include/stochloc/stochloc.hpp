#ifndef STOCHLOC_STOCHLOC_HPP
#define STOCHLOC_STOCHLOC_HPP

#include "stochloc/common.hpp"
#include "stochloc/targets.hpp"
#include "stochloc/time_grid.hpp"
#include "stochloc/denoisers.hpp"
#include "stochloc/gaussian_processes.hpp"
#include "stochloc/discrete_processes.hpp"
#include "stochloc/losses.hpp"
#include "stochloc/analysis.hpp"
#include "stochloc/diagnostics.hpp"

#endif  // STOCHLOC_STOCHLOC_HPP

#pragma once

#include "sparsetraj/rng.hpp"
#include "sparsetraj/distributions.hpp"
#include "sparsetraj/polyline.hpp"
#include "sparsetraj/network.hpp"
#include "sparsetraj/trajectory.hpp"
#include "sparsetraj/idx.hpp"
#include "sparsetraj/bounds.hpp"
#include "sparsetraj/verify.hpp"
#include "sparsetraj/svg_plot.hpp"
#include "sparsetraj/experiment.hpp"
#include "sparsetraj/config_io.hpp"
#include "sparsetraj/figures.hpp"

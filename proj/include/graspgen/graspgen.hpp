#pragma once

#include "graspgen/bench.hpp"
#include "graspgen/config.hpp"
#include "graspgen/dataset.hpp"
#include "graspgen/errors.hpp"
#include "graspgen/generator.hpp"
#include "graspgen/geometry.hpp"
#include "graspgen/gripper.hpp"
#include "graspgen/histogram.hpp"
#include "graspgen/pipeline.hpp"
#include "graspgen/record.hpp"
#include "graspgen/scoring.hpp"
#include "graspgen/shapes.hpp"
#include "graspgen/spatial_grid.hpp"
#include "graspgen/stability.hpp"

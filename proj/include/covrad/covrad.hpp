#pragma once

#include "covrad/covering.hpp"
#include "covrad/error.hpp"
#include "covrad/experiments.hpp"
#include "covrad/io.hpp"
#include "covrad/nets.hpp"
#include "covrad/occupancy.hpp"
#include "covrad/point_cloud.hpp"
#include "covrad/rng.hpp"
#include "covrad/sampler.hpp"
#include "covrad/spaces.hpp"
#include "covrad/spatial_index.hpp"
#include "covrad/stats.hpp"
